#include "vdwlab/vdw.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vdwlab/errors.hpp"
#include "vdwlab/kernels.hpp"

namespace vdwlab {

namespace {

using cplx = std::complex<double>;

double norm3(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

Vec3 unit(const Vec3& v) {
  const double n = norm3(v);
  if (!(n > 0.0)) throw GeometryError("zero direction vector");
  return {v[0] / n, v[1] / n, v[2] / n};
}

}  // namespace

AtomSpectrum::AtomSpectrum(std::vector<double> energies,
                           std::map<Exponents3, Eigen::MatrixXcd> moments)
    : energies_(std::move(energies)), moments_(std::move(moments)) {
  if (energies_.empty()) throw ShapeError("atom spectrum needs at least one state");
  for (std::size_t i = 1; i < energies_.size(); ++i)
    if (energies_[i] < energies_[i - 1]) throw DomainError("atomic energies must ascend");
  const auto n = static_cast<Eigen::Index>(energies_.size());
  for (const auto& [e, m] : moments_) {
    if (m.rows() != n || m.cols() != n) throw ShapeError("moment matrix size mismatch");
    if (e[0] < 0 || e[1] < 0 || e[2] < 0) throw DomainError("negative monomial exponent");
  }
}

Eigen::MatrixXcd AtomSpectrum::moment(const Exponents3& e) const {
  const auto n = static_cast<Eigen::Index>(size());
  if (e == Exponents3{0, 0, 0}) return Eigen::MatrixXcd::Identity(n, n);
  auto it = moments_.find(e);
  if (it == moments_.end()) return Eigen::MatrixXcd::Zero(n, n);
  return it->second;
}

AtomSpectrum AtomSpectrum::truncated(int n_keep) const {
  if (n_keep < 1) throw DomainError("n_keep must be positive");
  const int n = std::min(n_keep, size());
  std::vector<double> e(energies_.begin(), energies_.begin() + n);
  std::map<Exponents3, Eigen::MatrixXcd> m;
  for (const auto& [k, v] : moments_) m.emplace(k, v.topLeftCorner(n, n));
  return AtomSpectrum(std::move(e), std::move(m));
}

double AtomSpectrum::hermiticity_defect() const {
  double d = 0.0;
  for (const auto& [k, m] : moments_) d = std::max(d, (m - m.adjoint()).cwiseAbs().maxCoeff());
  return d;
}

AtomSpectrum two_level_atom(double gap, double dipole) {
  if (!(gap > 0.0)) throw DomainError("two-level gap must be positive");
  Eigen::MatrixXcd z = Eigen::MatrixXcd::Zero(2, 2);
  z(0, 1) = z(1, 0) = dipole;
  return AtomSpectrum({0.0, gap}, {{Exponents3{0, 0, 1}, z}});
}

AtomSpectrum three_level_atom(double gap_p, double dipole, double gap_q, double quad,
                              double quad_ground) {
  if (!(gap_p > 0.0) || !(gap_q > 0.0)) throw DomainError("three-level gaps must be positive");
  std::vector<double> e{0.0, gap_p, gap_q};
  int p = 1, q = 2;
  if (gap_q < gap_p) {
    std::swap(e[1], e[2]);
    std::swap(p, q);
  }
  Eigen::MatrixXcd z = Eigen::MatrixXcd::Zero(3, 3), zz = Eigen::MatrixXcd::Zero(3, 3);
  z(0, p) = z(p, 0) = dipole;
  zz(0, q) = zz(q, 0) = quad;
  zz(0, 0) = quad_ground;
  return AtomSpectrum(std::move(e), {{Exponents3{0, 0, 1}, z}, {Exponents3{0, 0, 2}, zz}});
}

AtomSpectrum oscillator_atom(double omega, int n_keep, int max_degree) {
  if (!(omega > 0.0)) throw DomainError("oscillator frequency must be positive");
  if (n_keep < 1) throw DomainError("n_keep must be positive");
  if (max_degree < 0) throw DomainError("max_degree must be non-negative");
  std::vector<std::array<int, 3>> states;
  int shell = 0;
  while (static_cast<int>(states.size()) < n_keep) {
    for (int a = shell; a >= 0; --a)
      for (int b = shell - a; b >= 0; --b) states.push_back({a, b, shell - a - b});
    ++shell;
  }
  states.resize(static_cast<std::size_t>(n_keep));

  // 1D position powers in a basis large enough to be exact on kept states
  const int big = shell + max_degree + 1;
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(big, big);
  for (int n = 0; n + 1 < big; ++n) x(n, n + 1) = x(n + 1, n) = std::sqrt((n + 1) / (2.0 * omega));
  std::vector<Eigen::MatrixXd> xp{Eigen::MatrixXd::Identity(big, big)};
  for (int p = 1; p <= max_degree; ++p) xp.push_back(xp.back() * x);

  std::vector<double> energies;
  for (const auto& st : states) energies.push_back(omega * (st[0] + st[1] + st[2] + 1.5));
  std::map<Exponents3, Eigen::MatrixXcd> moments;
  const auto n = static_cast<Eigen::Index>(states.size());
  for (int deg = 1; deg <= max_degree; ++deg)
    for (int a = 0; a <= deg; ++a)
      for (int b = 0; a + b <= deg; ++b) {
        const int c = deg - a - b;
        Eigen::MatrixXcd m(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
          for (Eigen::Index j = 0; j < n; ++j) {
            const auto& si = states[static_cast<std::size_t>(i)];
            const auto& sj = states[static_cast<std::size_t>(j)];
            m(i, j) = xp[static_cast<std::size_t>(a)](si[0], sj[0]) *
                      xp[static_cast<std::size_t>(b)](si[1], sj[1]) *
                      xp[static_cast<std::size_t>(c)](si[2], sj[2]);
          }
        moments.emplace(Exponents3{a, b, c}, std::move(m));
      }
  return AtomSpectrum(std::move(energies), std::move(moments));
}

AtomSpectrum atom_spectrum_from_states(const std::vector<double>& energies,
                                       const std::vector<WaveFunction>& states, int max_degree) {
  if (states.empty() || states.size() != energies.size())
    throw ShapeError("need one state per energy");
  if (max_degree < 0) throw DomainError("max_degree must be non-negative");
  const GridSpec& grid = states.front().grid();
  if (grid.particles != 1) throw ShapeError("atomic states must be single-particle");
  for (const auto& s : states)
    if (!(s.grid() == grid)) throw ShapeError("states on different grids");

  const std::size_t N = grid.size();
  std::vector<std::span<const cplx>> cols;
  for (const auto& s : states) cols.push_back(s.values());

  // coordinate of every lattice point along each axis
  std::array<std::vector<double>, 3> coord;
  const int n = grid.points;
  for (int a = 0; a < 3; ++a) coord[static_cast<std::size_t>(a)].assign(N, 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    if (grid.dim == 1) {
      coord[2][i] = grid.coordinate(static_cast<int>(i));
    } else {
      const std::size_t n2 = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
      coord[0][i] = grid.coordinate(static_cast<int>(i / n2));
      coord[1][i] = grid.coordinate(static_cast<int>((i / static_cast<std::size_t>(n)) % static_cast<std::size_t>(n)));
      coord[2][i] = grid.coordinate(static_cast<int>(i % static_cast<std::size_t>(n)));
    }
  }

  // moments between unit-norm states, whatever the scaling of the inputs
  Eigen::VectorXd inv(static_cast<Eigen::Index>(states.size()));
  for (std::size_t s = 0; s < states.size(); ++s) {
    double q = 0.0;
    for (const auto& z : cols[s]) q += std::norm(z);
    if (!(q > 0.0)) throw DomainError("zero state");
    inv[static_cast<Eigen::Index>(s)] = 1.0 / std::sqrt(q);
  }
  std::map<Exponents3, Eigen::MatrixXcd> moments;
  std::vector<double> w(N);
  for (int deg = 1; deg <= max_degree; ++deg) {
    for (int a = 0; a <= deg; ++a) {
      for (int b = 0; a + b <= deg; ++b) {
        const int c = deg - a - b;
        if (grid.dim == 1 && (a != 0 || b != 0)) continue;
        for (std::size_t i = 0; i < N; ++i)
          w[i] = std::pow(coord[0][i], a) * std::pow(coord[1][i], b) * std::pow(coord[2][i], c);
        Eigen::MatrixXcd m = inv.asDiagonal() * kernels::parallel::weighted_gram(cols, w, cols, 1.0) *
                             inv.asDiagonal();
        moments.emplace(Exponents3{a, b, c}, 0.5 * (m + m.adjoint()));
      }
    }
  }
  return AtomSpectrum(energies, std::move(moments));
}

ProductBasis::ProductBasis(std::vector<AtomSpectrum> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.size() < 2 || atoms_.size() > 3) throw ShapeError("product basis needs 2 or 3 atoms");
  const std::size_t M = atoms_.size();
  dims_.resize(M);
  strides_.resize(M);
  for (std::size_t k = 0; k < M; ++k) dims_[k] = atoms_[k].size();
  Eigen::Index s = 1;
  for (std::size_t k = M; k-- > 0;) {
    strides_[k] = s;
    s *= dims_[k];
  }
  size_ = s;
  energies_.resize(size_);
  for (Eigen::Index i = 0; i < size_; ++i) {
    double e = 0.0;
    for (std::size_t k = 0; k < M; ++k)
      e += atoms_[k].energies()[static_cast<std::size_t>((i / strides_[k]) % dims_[k])];
    energies_[i] = e;
  }
  mu_ = 0.0;
  for (const auto& a : atoms_) mu_ += a.energies().front();
}

Eigen::VectorXcd ProductBasis::ground() const {
  Eigen::VectorXcd g = Eigen::VectorXcd::Zero(size_);
  g[0] = 1.0;
  return g;
}

void ProductBasis::require_nondegenerate_ground(double tol) const {
  for (const auto& a : atoms_) {
    const auto& e = a.energies();
    if (e.size() > 1 && e[1] - e[0] <= tol * std::max(1.0, std::abs(e[0])))
      throw DegeneracyError("atomic ground state is degenerate");
  }
}

Eigen::VectorXcd ProductBasis::apply_pair(int k, int l, const Poly6& poly,
                                          const Eigen::VectorXcd& v) const {
  const int M = atoms();
  if (k < 0 || l < 0 || k >= M || l >= M || k == l) throw DomainError("bad atom pair");
  if (v.size() != size_) throw ShapeError("vector size does not match product basis");
  const auto uk = static_cast<std::size_t>(k), ul = static_cast<std::size_t>(l);
  const Eigen::Index nk = dims_[uk], nl = dims_[ul], sk = strides_[uk], sl = strides_[ul];

  // group terms by the exponents on atom k so each left factor is built once
  std::map<Exponents3, Eigen::MatrixXcd> right;
  std::map<Exponents3, std::map<Exponents3, double>> grouped;
  for (const auto& [e, c] : poly) grouped[{e[0], e[1], e[2]}][{e[3], e[4], e[5]}] += c;

  // slices with every other atom index fixed: list their base offsets
  std::vector<Eigen::Index> bases;
  for (Eigen::Index i = 0; i < size_; ++i)
    if ((i / sk) % nk == 0 && (i / sl) % nl == 0) bases.push_back(i);

  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(size_);
  Eigen::MatrixXcd V(nk, nl), W(nk, nl);
  for (const auto& [ek, terms] : grouped) {
    const Eigen::MatrixXcd A = atoms_[uk].moment(ek);
    Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(nl, nl);
    for (const auto& [el, c] : terms) {
      auto it = right.find(el);
      if (it == right.end()) it = right.emplace(el, atoms_[ul].moment(el)).first;
      B += c * it->second;
    }
    if (A.cwiseAbs().maxCoeff() == 0.0 || B.cwiseAbs().maxCoeff() == 0.0) continue;
    for (Eigen::Index base : bases) {
      for (Eigen::Index a = 0; a < nk; ++a)
        for (Eigen::Index b = 0; b < nl; ++b) V(a, b) = v[base + a * sk + b * sl];
      W.noalias() = A * V * B.transpose();
      for (Eigen::Index a = 0; a < nk; ++a)
        for (Eigen::Index b = 0; b < nl; ++b) out[base + a * sk + b * sl] += W(a, b);
    }
  }
  return out;
}

Eigen::VectorXcd ProductBasis::apply_multipole(int k, int l, int n, const Vec3& direction,
                                               double e2, const Eigen::VectorXcd& v) const {
  return apply_pair(k, l, pair_polynomial(n, unit(direction), e2), v);
}

ResolventResult resolvent_apply(const ProductBasis& basis, double mu,
                                const Eigen::VectorXcd& source, double kernel_tol) {
  if (source.size() != basis.size()) throw ShapeError("source size does not match basis");
  const Eigen::VectorXd& E = basis.energies();
  const double snorm = source.norm();
  const double deg = 1e-10 * std::max(1.0, std::abs(mu));
  ResolventResult r;
  r.x = Eigen::VectorXcd::Zero(source.size());
  Eigen::VectorXcd comp = source;
  for (Eigen::Index i = 0; i < source.size(); ++i) {
    const double d = E[i] - mu;
    if (std::abs(d) <= deg) {
      if (std::abs(source[i]) > kernel_tol * snorm)
        throw OrthogonalityError("source has a component in the kernel of H - mu");
      comp[i] = 0.0;
    } else {
      r.x[i] = source[i] / d;
    }
  }
  if (snorm > 0.0) {
    const Eigen::VectorXcd back = (E.array() - mu).matrix().cast<cplx>().cwiseProduct(r.x);
    r.residual = (back - comp).norm() / snorm;
  }
  return r;
}

namespace {

double second_order(const ProductBasis& basis, int n, const Vec3& direction, double e2) {
  basis.require_nondegenerate_ground();
  Eigen::VectorXcd v = basis.apply_multipole(0, 1, n, direction, e2, basis.ground());
  v[0] = 0.0;  // first-order part, handled separately
  const ResolventResult r = resolvent_apply(basis, basis.mu(), v);
  return v.dot(r.x).real();
}

}  // namespace

double compute_a1(const ProductBasis& basis, const Vec3& direction, double e2) {
  return second_order(basis, 2, direction, e2);
}

double compute_a2(const ProductBasis& basis, const Vec3& direction, double e2) {
  return second_order(basis, 3, direction, e2);
}

double triangle_scale(const std::array<Vec3, 3>& x) {
  double p = 1.0;
  for (int k = 0; k < 3; ++k) {
    const Vec3& a = x[static_cast<std::size_t>(k)];
    const Vec3& b = x[static_cast<std::size_t>((k + 1) % 3)];
    p *= norm3({b[0] - a[0], b[1] - a[1], b[2] - a[2]});
  }
  return std::cbrt(p);
}

double compute_a3(const ProductBasis& basis, const std::array<Vec3, 3>& x, double e2,
                  const std::array<double, 3>& pair_scale) {
  if (basis.atoms() != 3) throw ShapeError("a3 needs a three-atom product basis");
  basis.require_nondegenerate_ground();
  std::array<Vec3, 3> dir;
  std::array<double, 3> len;
  for (int p = 0; p < 3; ++p) {
    const Vec3& a = x[static_cast<std::size_t>(p)];
    const Vec3& b = x[static_cast<std::size_t>((p + 1) % 3)];
    const Vec3 d{b[0] - a[0], b[1] - a[1], b[2] - a[2]};
    len[static_cast<std::size_t>(p)] = norm3(d);
    if (!(len[static_cast<std::size_t>(p)] > 1e-12)) throw GeometryError("coincident atoms");
    dir[static_cast<std::size_t>(p)] = unit(d);
  }
  // pair p couples atoms p and p+1
  auto coupling = [&](int p, const Eigen::VectorXcd& v) {
    const auto up = static_cast<std::size_t>(p);
    const double s = pair_scale[up] / std::pow(len[up], 3);
    return Eigen::VectorXcd(s * basis.apply_multipole(p, (p + 1) % 3, 2, dir[up], e2, v));
  };
  Eigen::VectorXcd V0 = coupling(0, basis.ground()) + coupling(1, basis.ground()) +
                        coupling(2, basis.ground());
  const double e1 = V0[0].real();
  V0[0] = 0.0;
  const Eigen::VectorXcd y = resolvent_apply(basis, basis.mu(), V0).x;
  const Eigen::VectorXcd Vy = coupling(0, y) + coupling(1, y) + coupling(2, y);
  const double e3 = y.dot(Vy).real() - e1 * y.squaredNorm();
  return e3 * std::pow(triangle_scale(x), 9);
}

std::vector<std::pair<int, double>> truncation_curve(const std::vector<AtomSpectrum>& atoms,
                                                     const std::vector<int>& n_keep,
                                                     const Vec3& direction, double e2) {
  std::vector<std::pair<int, double>> out;
  for (int n : n_keep) {
    std::vector<AtomSpectrum> t;
    for (const auto& a : atoms) t.push_back(a.truncated(n));
    out.emplace_back(n, compute_a1(ProductBasis(std::move(t)), direction, e2));
  }
  return out;
}

double expansion_eval(const VdwReport& r, double D) {
  if (!(D > 0.0)) throw DomainError("separation must be positive");
  double v = -r.a1 / std::pow(D, 6) - r.a2 / std::pow(D, 8);
  if (r.three_body) {
    if (!(r.d_scale > 0.0)) throw DomainError("three-body scale must be positive");
    v += r.a3 / std::pow(r.d_scale, 9);
  }
  return v;
}

double rspt_oracle(int order, const Eigen::MatrixXcd& H0, const Eigen::MatrixXcd& V) {
  if (order != 2 && order != 3) throw UnsupportedError("rspt_oracle supports orders 2 and 3");
  if (H0.rows() != H0.cols() || V.rows() != H0.rows() || V.cols() != H0.cols())
    throw ShapeError("H0 and V must be square and of equal size");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H0);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double E0 = ev[0];
  if (ev.size() > 1 && ev[1] - E0 <= 1e-10 * std::max(1.0, std::abs(E0)))
    throw DegeneracyError("unperturbed ground state is degenerate");
  const Eigen::VectorXcd phi = es.eigenvectors().col(0);
  const Eigen::Index n = H0.rows();
  const Eigen::MatrixXcd P = phi * phi.adjoint();
  const Eigen::MatrixXcd Q = Eigen::MatrixXcd::Identity(n, n) - P;
  // Q (H0 - E0) Q + P is invertible and agrees with H0 - E0 on the complement
  const Eigen::MatrixXcd A =
      Q * (H0 - E0 * Eigen::MatrixXcd::Identity(n, n)) * Q + P;
  const Eigen::VectorXcd Vphi = V * phi;
  const cplx E1 = phi.dot(Vphi);
  const Eigen::VectorXcd b = Q * Vphi;
  const Eigen::VectorXcd x = Q * A.partialPivLu().solve(b);
  if (order == 2) return -b.dot(x).real();
  return (x.dot(V * x) - E1 * x.squaredNorm()).real();
}

std::vector<OrthogonalityEntry> orthogonality_battery(const ProductBasis& basis,
                                                      const Vec3& direction, double e2) {
  basis.require_nondegenerate_ground();
  const Eigen::VectorXcd phi = basis.ground();
  std::array<Eigen::VectorXcd, 6> f;
  for (int n = 2; n <= 5; ++n)
    f[static_cast<std::size_t>(n)] = basis.apply_multipole(0, 1, n, direction, e2, phi);
  auto reduced = [&](Eigen::VectorXcd v) {
    v[0] = 0.0;
    return resolvent_apply(basis, basis.mu(), v).x;
  };
  const Eigen::VectorXcd phi2 = reduced(f[2]);
  const Eigen::VectorXcd phi3 = reduced(f[3]);
  const Eigen::VectorXcd f2phi2 = basis.apply_multipole(0, 1, 2, direction, e2, phi2);

  std::vector<OrthogonalityEntry> out;
  auto add = [&](const char* name, const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
    OrthogonalityEntry e;
    e.name = name;
    e.value = a.dot(b);
    e.scale = a.norm() * b.norm();
    e.relative = e.scale > 0.0 ? std::abs(e.value) / e.scale : 0.0;
    out.push_back(e);
  };
  add("<phi,f2 phi>", phi, f[2]);
  add("<phi,f3 phi>", phi, f[3]);
  add("<phi2,phi3>", phi2, phi3);
  add("<phi2,f3 phi>", phi2, f[3]);
  add("<phi2,f5 phi>", phi2, f[5]);
  add("<phi3,f2 phi>", phi3, f[2]);
  add("<phi3,f4 phi>", phi3, f[4]);
  add("<phi2,f2 phi2>", phi2, f2phi2);
  add("<phi2,f4 phi>", phi2, f[4]);
  return out;
}

}  // namespace vdwlab
