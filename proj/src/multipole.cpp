#include "vdwlab/multipole.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "vdwlab/errors.hpp"

namespace vdwlab {

double legendre(int n, double z) {
  if (n < 0) throw DomainError("Legendre degree must be >= 0");
  if (!(std::abs(z) <= 1.0 + 1e-12)) throw DomainError("Legendre argument outside [-1, 1]");
  z = std::clamp(z, -1.0, 1.0);
  if (n == 0) return 1.0;
  double p0 = 1.0, p1 = z;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

namespace {

double dot3(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
double norm3(const Vec3& a) { return std::sqrt(dot3(a, a)); }
Vec3 sub3(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
Vec3 neg3(const Vec3& a) { return {-a[0], -a[1], -a[2]}; }

// |x|^n P_n(x.e / |x|), with the zero vector contributing only at n = 0.
double radial_legendre(const Vec3& x, const Vec3& e, int n) {
  if (n == 0) return 1.0;
  const double r = norm3(x);
  if (r == 0.0) return 0.0;
  return std::pow(r, n) * legendre(n, dot3(x, e) / r);
}

}  // namespace

void ClusterPair::validate() const {
  if (std::abs(norm3(direction) - 1.0) > 1e-12)
    throw DomainError("direction must be a unit vector");
  if (!(separation > 0.0)) throw DomainError("separation must be positive");
  if (Z1 < 1 || Z2 < 1) throw DomainError("nuclear charges must be positive");
}

double f_n(const ClusterPair& pair, int n) {
  if (n < 0) throw DomainError("multipole order must be >= 0");
  const Vec3& e = pair.direction;
  double F1 = 0.0, F2 = 0.0, F3 = 0.0;
  for (const auto& xi : pair.positions_1) F1 += radial_legendre(xi, e, n);
  for (const auto& xj : pair.positions_2) F2 += radial_legendre(neg3(xj), e, n);
  for (const auto& xi : pair.positions_1)
    for (const auto& xj : pair.positions_2) F3 += radial_legendre(sub3(xi, xj), e, n);
  return pair.e2 * (-pair.Z2 * F1 - pair.Z1 * F2 + F3);
}

double f2_closed(const ClusterPair& pair) {
  if (!pair.neutral()) throw ModelError("closed form of f2 holds for neutral pairs only");
  const Vec3& e = pair.direction;
  double s = 0.0;
  for (const auto& xi : pair.positions_1)
    for (const auto& xj : pair.positions_2)
      s += 3.0 * dot3(xi, e) * dot3(xj, e) - dot3(xi, xj);
  return -pair.e2 * s;
}

double f3_closed(const ClusterPair& pair) {
  if (!pair.neutral()) throw ModelError("closed form of f3 holds for neutral pairs only");
  const Vec3& e = pair.direction;
  double s = 0.0;
  for (const auto& a : pair.positions_1)
    for (const auto& b : pair.positions_2) {
      const double al = dot3(a, e), be = dot3(b, e);
      const double aa = dot3(a, a), bb = dot3(b, b), ab = dot3(a, b);
      s += 15.0 * al * be * (be - al) + 3.0 * (aa * be - bb * al) + 6.0 * ab * (al - be);
    }
  return 0.5 * pair.e2 * s;
}

double intercluster_interaction(const ClusterPair& pair) {
  pair.validate();
  const double D = pair.separation;
  const Vec3 Dv{D * pair.direction[0], D * pair.direction[1], D * pair.direction[2]};
  double s = 0.0;
  for (const auto& xi : pair.positions_1) s -= pair.Z2 / norm3(sub3(xi, Dv));
  for (const auto& xj : pair.positions_2) s -= pair.Z1 / norm3(sub3(neg3(xj), Dv));
  for (const auto& xi : pair.positions_1)
    for (const auto& xj : pair.positions_2) s += 1.0 / norm3(sub3(sub3(xi, xj), Dv));
  s += static_cast<double>(pair.Z1) * pair.Z2 / D;
  return pair.e2 * s;
}

double d_beta(const ClusterPair& pair) {
  double s = 0.0;
  for (const auto& x : pair.positions_1) s += dot3(x, x);
  for (const auto& x : pair.positions_2) s += dot3(x, x);
  return std::sqrt(s);
}

MultipoleSet multipole_set(const ClusterPair& pair, int max_order) {
  MultipoleSet m;
  m.d_beta = d_beta(pair);
  m.separation = pair.separation;
  for (int n = 0; n <= max_order; ++n) {
    m.orders.push_back(n);
    m.values.push_back(f_n(pair, n));
  }
  return m;
}

double multipole_remainder(const ClusterPair& pair, int k) {
  pair.validate();
  if (k < 0) throw DomainError("remainder order must be non-negative");
  const double D = pair.separation;
  const Vec3& e = pair.direction;
  // 1/|D e - y| - 1/D without cancellation
  auto delta = [&](const Vec3& y) {
    const Vec3 Dv{D * e[0], D * e[1], D * e[2]};
    const double r = norm3(sub3(Dv, y));
    return (2.0 * D * dot3(e, y) - dot3(y, y)) / (D * r * (D + r));
  };
  double s = 0.0;
  for (const auto& xi : pair.positions_1) s -= pair.Z2 * delta(xi);
  for (const auto& xj : pair.positions_2) s -= pair.Z1 * delta(neg3(xj));
  for (const auto& xi : pair.positions_1)
    for (const auto& xj : pair.positions_2) s += delta(sub3(xi, xj));
  s *= pair.e2;
  // the 1/D parts of every term add up to f_0 / D
  if (k == 0) s += f_n(pair, 0) / D;
  for (int n = 1; n < k; ++n) s -= f_n(pair, n) / std::pow(D, n + 1);
  return s;
}

RemainderReport remainder_check(const std::vector<ClusterPair>& family, int k,
                                const std::vector<double>& D_grid) {
  if (k < 1) throw DomainError("remainder order must be >= 1");
  if (D_grid.size() < 2) throw DomainError("need at least two separations");
  if (family.empty()) throw DomainError("empty configuration family");
  const double dmin = *std::min_element(D_grid.begin(), D_grid.end());
  double dmax_beta = 0.0;
  for (const auto& p : family) {
    const double d = d_beta(p);
    if (d > dmin / 4.0)
      throw DomainError("configuration with d_beta = " + std::to_string(d) +
                        " lies outside the convergence region for D = " + std::to_string(dmin));
    dmax_beta = std::max(dmax_beta, d);
  }
  RemainderReport rep;
  rep.k = k;
  for (double D : D_grid) {
    RemainderRow row;
    row.D = D;
    for (auto p : family) {
      p.separation = D;
      const double R = std::abs(multipole_remainder(p, k));
      row.max_R = std::max(row.max_R, R);
      const double d = d_beta(p);
      if (d > 0.0) rep.constant = std::max(rep.constant, R * std::pow(D, k + 1) / std::pow(d, k));
    }
    rep.rows.push_back(row);
  }
  for (auto& row : rep.rows)
    row.bound = rep.constant * std::pow(dmax_beta, k) / std::pow(row.D, k + 1);
  double mx = 0.0, my = 0.0;
  int cnt = 0;
  for (const auto& row : rep.rows) {
    if (!(row.max_R > 0.0)) continue;
    mx += std::log(row.D);
    my += std::log(row.max_R);
    ++cnt;
  }
  if (cnt < 2) throw FitError("remainder vanishes on the separation grid");
  mx /= cnt;
  my /= cnt;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& row : rep.rows) {
    if (!(row.max_R > 0.0)) continue;
    const double dx = std::log(row.D) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(row.max_R) - my);
  }
  rep.slope = sxy / sxx;
  return rep;
}

void write_remainder_csv(const RemainderReport& report, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw DomainError("cannot open " + path.string() + " for writing");
  os << "D,max_R_k,bound_value\n";
  char buf[128];
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", r.D, r.max_R, r.bound);
    os << buf;
  }
}

ClusterPair parity_apply(ParityWhich which, const ClusterPair& pair) {
  ClusterPair out = pair;
  if (which != ParityWhich::C2)
    for (auto& x : out.positions_1) x = neg3(x);
  if (which != ParityWhich::C1)
    for (auto& x : out.positions_2) x = neg3(x);
  return out;
}

ConfigFunction parity_apply(ParityWhich which, ConfigFunction f) {
  return [which, f = std::move(f)](const ClusterPair& p) { return f(parity_apply(which, p)); };
}

// ---------------------------------------------------------------------------

namespace {

using Poly = Poly6;

Poly multiply(const Poly& a, const Poly& b) {
  Poly out;
  for (const auto& [ea, ca] : a)
    for (const auto& [eb, cb] : b) {
      Exponents6 e;
      for (int i = 0; i < 6; ++i) e[static_cast<std::size_t>(i)] = ea[static_cast<std::size_t>(i)] + eb[static_cast<std::size_t>(i)];
      out[e] += ca * cb;
    }
  return out;
}

void add_scaled(Poly& a, const Poly& b, double s) {
  for (const auto& [e, c] : b) a[e] += s * c;
}

// Linear form sum_i w_i v_i in the six variables.
Poly linear(const std::array<double, 6>& w) {
  Poly p;
  for (int i = 0; i < 6; ++i)
    if (w[static_cast<std::size_t>(i)] != 0.0) {
      Exponents6 e{};
      e[static_cast<std::size_t>(i)] = 1;
      p[e] = w[static_cast<std::size_t>(i)];
    }
  return p;
}

// |v|^n P_n(v.e/|v|) for v = A x1 + B x2 as a polynomial, by the recurrence
// n S_n = (2n - 1)(v.e) S_{n-1} - (n - 1)|v|^2 S_{n-2}.
Poly solid_harmonic(int n, double A, double B, const Vec3& e) {
  const Poly ve = linear({A * e[0], A * e[1], A * e[2], B * e[0], B * e[1], B * e[2]});
  Poly v2;
  for (int c = 0; c < 3; ++c) {
    std::array<double, 6> w{};
    w[static_cast<std::size_t>(c)] = A;
    w[static_cast<std::size_t>(c + 3)] = B;
    const Poly comp = linear(w);
    add_scaled(v2, multiply(comp, comp), 1.0);
  }
  Poly s0{{Exponents6{}, 1.0}};
  if (n == 0) return s0;
  Poly s1 = ve;
  for (int k = 2; k <= n; ++k) {
    Poly s2 = multiply(ve, s1);
    for (auto& [e2, c] : s2) c *= (2.0 * k - 1.0) / k;
    add_scaled(s2, multiply(v2, s0), -(k - 1.0) / k);
    s0 = std::move(s1);
    s1 = std::move(s2);
  }
  return s1;
}

}  // namespace

Poly6 pair_polynomial(int n, const Vec3& direction, double e2) {
  if (n < 0) throw DomainError("multipole order must be >= 0");
  if (std::abs(norm3(direction) - 1.0) > 1e-12)
    throw DomainError("direction must be a unit vector");
  Poly6 f;
  add_scaled(f, solid_harmonic(n, 1.0, 0.0, direction), -e2);
  add_scaled(f, solid_harmonic(n, 0.0, -1.0, direction), -e2);
  add_scaled(f, solid_harmonic(n, 1.0, -1.0, direction), e2);
  Poly6 out;
  for (const auto& [e, c] : f)
    if (std::abs(c) > 1e-15 * std::max(1.0, e2)) out.emplace(e, c);
  return out;
}

double evaluate(const Poly6& p, const Vec3& x1, const Vec3& x2) {
  const double v[6] = {x1[0], x1[1], x1[2], x2[0], x2[1], x2[2]};
  double s = 0.0;
  for (const auto& [e, c] : p) {
    double t = c;
    for (int i = 0; i < 6; ++i)
      for (int k = 0; k < e[static_cast<std::size_t>(i)]; ++k) t *= v[i];
    s += t;
  }
  return s;
}

}  // namespace vdwlab
