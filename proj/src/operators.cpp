#include "vdwlab/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "vdwlab/errors.hpp"
#include "vdwlab/kernels.hpp"

namespace vdwlab {

namespace {
constexpr double kPi = std::numbers::pi;
}

std::string to_string(KineticKind kind) {
  return kind == KineticKind::PseudoRelativistic ? "pseudo-relativistic"
                                                 : "nonrelativistic";
}

KineticKind parse_kinetic(const std::string& name) {
  if (name == "pseudo-relativistic" || name == "relativistic" || name == "rel")
    return KineticKind::PseudoRelativistic;
  if (name == "nonrelativistic" || name == "nonrel") return KineticKind::NonRelativistic;
  throw DomainError("unknown kinetic kind '" + name + "'");
}

double kinetic_symbol(KineticKind kind, double k2) {
  if (kind == KineticKind::NonRelativistic) return 0.5 * k2;
  return k2 / (std::sqrt(k2 + 1.0) + 1.0);
}

double default_softening(int dim) { return dim == 3 ? 0.1 : 1.0; }

void AtomModel::validate() const {
  if (Z < 1) throw ModelError("nuclear charge Z must be >= 1");
  if (!(e2 >= 0.0) || !std::isfinite(e2)) throw ModelError("e2 must be finite and >= 0");
  if (!(softening >= 0.0) || !std::isfinite(softening))
    throw ModelError("softening must be finite and >= 0");
  if (dim != 1 && dim != 3) throw ModelError("atom dimension must be 1 or 3");
  if (n_electrons < 1) throw ModelError("n_electrons must be >= 1");
  if (n_electrons > Z)
    throw ModelError("n_electrons must not exceed Z (atoms and positive ions only)");
  if (kinetic == KineticKind::PseudoRelativistic && dim == 3 &&
      Z * e2 > kCriticalCoupling)
    throw ModelError("supercritical coupling: Z*e2 = " + std::to_string(Z * e2) +
                     " exceeds 2/pi");
}

std::vector<double> kinetic_diagonal(KineticKind kind, const GridSpec& grid) {
  grid.validate();
  const std::size_t n = grid.size();
  std::vector<double> sym(n);
  std::vector<double> k(static_cast<std::size_t>(grid.points));
  for (int j = 0; j < grid.points; ++j) k[static_cast<std::size_t>(j)] = grid.wavenumber(j);
  const int axes = grid.axes();
#pragma omp parallel
  {
    std::vector<int> idx(static_cast<std::size_t>(axes));
#pragma omp for schedule(static)
    for (std::size_t i = 0; i < n; ++i) {
      grid.unflatten(i, idx);
      double t = 0.0;
      for (int p = 0; p < grid.particles; ++p) {
        double k2 = 0.0;
        for (int a = 0; a < grid.dim; ++a) {
          const double ka = k[static_cast<std::size_t>(idx[static_cast<std::size_t>(p * grid.dim + a)])];
          k2 += ka * ka;
        }
        t += kinetic_symbol(kind, k2);
      }
      sym[i] = t;
    }
  }
  return sym;
}

WaveFunction apply_kinetic(KineticKind kind, const WaveFunction& psi) {
  const auto sym = kinetic_diagonal(kind, psi.grid());
  std::vector<cplx> v(psi.values().begin(), psi.values().end());
  fft_forward(psi.grid(), v);
  kernels::parallel::multiply(v, sym);
  fft_backward(psi.grid(), v);
  return WaveFunction(psi.grid(), std::move(v));
}

double kinetic_form(KineticKind kind, const WaveFunction& psi) {
  const auto sym = kinetic_diagonal(kind, psi.grid());
  std::vector<cplx> v(psi.values().begin(), psi.values().end());
  fft_forward(psi.grid(), v);
  std::vector<cplx> tv(v);
  kernels::parallel::multiply(tv, sym);
  return kernels::parallel::dot(v, tv).real() * psi.grid().cell_volume();
}

// ---------------------------------------------------------------------------

Hamiltonian::Hamiltonian(GridSpec grid, KineticKind kinetic, double e2, double softening,
                         std::vector<Nucleus> nuclei)
    : grid_(grid), kinetic_(kinetic), e2_(e2), softening_(softening),
      nuclei_(std::move(nuclei)) {
  grid_.validate();
  if (grid_.size() > kMaxGridPoints)
    throw CapacityError("grid of " + std::to_string(grid_.size()) +
                        " points exceeds the capacity limit of " +
                        std::to_string(kMaxGridPoints));
  if (!(softening_ > 0.0))
    throw ModelError("lattice Hamiltonians need a positive softening length");
  symbol_ = vdwlab::kinetic_diagonal(kinetic_, grid_);

  for (std::size_t a = 0; a < nuclei_.size(); ++a)
    for (std::size_t b = a + 1; b < nuclei_.size(); ++b) {
      double r2 = 0.0;
      for (int c = 0; c < grid_.dim; ++c) {
        const double d = nuclei_[a].position[static_cast<std::size_t>(c)] -
                         nuclei_[b].position[static_cast<std::size_t>(c)];
        r2 += d * d;
      }
      nuclear_repulsion_ +=
          e2_ * nuclei_[a].charge * nuclei_[b].charge * soft_coulomb(r2, softening_);
    }

  const std::size_t n = grid_.size();
  potential_.assign(n, 0.0);
  const int dim = grid_.dim;
  const int np = grid_.particles;
  std::vector<double> coord(static_cast<std::size_t>(grid_.points));
  for (int j = 0; j < grid_.points; ++j) coord[static_cast<std::size_t>(j)] = grid_.coordinate(j);
#pragma omp parallel
  {
    std::vector<int> idx(static_cast<std::size_t>(grid_.axes()));
    std::vector<double> x(static_cast<std::size_t>(grid_.axes()));
#pragma omp for schedule(static)
    for (std::size_t i = 0; i < n; ++i) {
      grid_.unflatten(i, idx);
      for (std::size_t a = 0; a < x.size(); ++a) x[a] = coord[static_cast<std::size_t>(idx[a])];
      double v = nuclear_repulsion_;
      for (int p = 0; p < np; ++p) {
        for (const auto& nuc : nuclei_) {
          double r2 = 0.0;
          for (int c = 0; c < dim; ++c) {
            const double d = x[static_cast<std::size_t>(p * dim + c)] -
                             nuc.position[static_cast<std::size_t>(c)];
            r2 += d * d;
          }
          v -= e2_ * nuc.charge * soft_coulomb(r2, softening_);
        }
        for (int q = p + 1; q < np; ++q) {
          double r2 = 0.0;
          for (int c = 0; c < dim; ++c) {
            const double d = x[static_cast<std::size_t>(p * dim + c)] -
                             x[static_cast<std::size_t>(q * dim + c)];
            r2 += d * d;
          }
          v += e2_ * soft_coulomb(r2, softening_);
        }
      }
      potential_[i] = v;
    }
  }
}

void Hamiltonian::apply(std::span<const cplx> in, std::span<cplx> out) const {
  if (in.size() != grid_.size() || out.size() != grid_.size())
    throw ShapeError("Hamiltonian::apply: buffer size does not match grid");
  std::vector<cplx> scratch(in.begin(), in.end());
  fft_forward(grid_, scratch);
  kernels::parallel::multiply(scratch, symbol_);
  fft_backward(grid_, scratch);
  const std::size_t n = in.size();
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) out[i] = scratch[i] + potential_[i] * in[i];
}

WaveFunction Hamiltonian::apply(const WaveFunction& psi) const {
  if (!(psi.grid() == grid_)) throw ShapeError("Hamiltonian::apply: grid mismatch");
  std::vector<cplx> out(grid_.size());
  apply(psi.values(), out);
  return WaveFunction(grid_, std::move(out));
}

double Hamiltonian::expectation(const WaveFunction& psi) const {
  return inner(psi, apply(psi)).real();
}

Hamiltonian build_hamiltonian(const AtomModel& atom, const GridSpec& grid) {
  atom.validate();
  grid.validate();
  if (grid.dim != atom.dim)
    throw ShapeError("grid dimension does not match the atom dimension");
  GridSpec g = grid;
  g.particles = atom.n_electrons;
  if (g.size() > kMaxGridPoints || g.axes() > 12)
    throw CapacityError("configuration grid too large for " +
                        std::to_string(atom.n_electrons) + " electrons");
  return Hamiltonian(g, atom.kinetic, atom.e2, atom.softening,
                     {Nucleus{{0.0, 0.0, 0.0}, atom.Z}});
}

// ---------------------------------------------------------------------------

namespace {

double bessel_kernel(double r) { return std::cyl_bessel_k(2.0, r) / (r * r); }

double one_minus_window(double r, double tau) {
  const double s = r / tau;
  return -std::expm1(-s * s * s * s);
}

double radial_integral(const std::function<double(double)>& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 12, 1e-14);
}

}  // namespace

double kernel_tail_mass(double r0) {
  auto f = [](double r) { return std::cyl_bessel_k(2.0, r); };
  double s = 0.0;
  double a = r0;
  for (int i = 0; i < 8; ++i) {
    s += radial_integral(f, a, a + 10.0);
    a += 10.0;
  }
  return s / kPi;
}

double kinetic_form_kernel(const WaveFunction& psi, const KernelQuadratureOptions& opt) {
  const GridSpec& g = psi.grid();
  if (g.dim != 3 || g.particles != 1)
    throw UnsupportedError("kernel quadrature is implemented for single-particle 3D grids only");
  if (!(opt.r_cut > 0.0)) throw DomainError("r_cut must be positive");
  const int n = g.points;
  const int m = 2 * n;
  const double h = g.spacing();
  const double h3 = h * h * h;
  const GridSpec pad{3, m, 2.0 * g.box_length, 1};

  // Non-periodic autocorrelation A(r) = int conj(psi(x)) psi(x + r) dx.
  std::vector<cplx> buf(pad.size(), cplx{0.0, 0.0});
  auto vals = psi.values();
  for (int i = 0; i < n; ++i) {
    const int pi = (i + n / 2) % n;
    for (int j = 0; j < n; ++j) {
      const int pj = (j + n / 2) % n;
      for (int k = 0; k < n; ++k) {
        const int pk = (k + n / 2) % n;
        buf[(static_cast<std::size_t>(pi) * m + pj) * m + pk] =
            vals[(static_cast<std::size_t>(i) * n + j) * n + k];
      }
    }
  }
  fft_forward(pad, buf);
  for (auto& z : buf) z = std::norm(z);
  fft_backward(pad, buf);
  const double scale = std::sqrt(static_cast<double>(pad.size())) * h3;
  std::vector<double> A(pad.size());
  for (std::size_t i = 0; i < A.size(); ++i) A[i] = buf[i].real() * scale;
  buf.clear();
  buf.shrink_to_fit();

  auto at = [&](int x, int y, int z) {
    auto w = [m](int v) { return static_cast<std::size_t>(((v % m) + m) % m); };
    return A[(w(x) * m + w(y)) * m + w(z)];
  };
  const double a0 = A[0];
  auto G = [&](int x, int y, int z) { return 2.0 * a0 - 2.0 * at(x, y, z); };

  // Second moment matrix of G at the origin, G(r) ~ r.M.r.
  double M[3][3];
  for (int a = 0; a < 3; ++a) {
    int e[3] = {0, 0, 0};
    e[a] = 1;
    const double y1 = G(e[0], e[1], e[2]) / (h * h);
    const double y2 = G(2 * e[0], 2 * e[1], 2 * e[2]) / (4.0 * h * h);
    M[a][a] = (4.0 * y1 - y2) / 3.0;
  }
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b) {
      int p[3] = {0, 0, 0}, q[3] = {0, 0, 0};
      p[a] = 1; p[b] = 1;
      q[a] = 1; q[b] = -1;
      const double x1 = (G(p[0], p[1], p[2]) - G(q[0], q[1], q[2])) / (4.0 * h * h);
      const double x2 =
          (G(2 * p[0], 2 * p[1], 2 * p[2]) - G(2 * q[0], 2 * q[1], 2 * q[2])) / (16.0 * h * h);
      M[a][b] = M[b][a] = (4.0 * x1 - x2) / 3.0;
    }
  const double trM = M[0][0] + M[1][1] + M[2][2];

  const double tau = 4.0 * h;
  const double near_reach = 3.0 * tau;
  const double rc = opt.r_cut;
  const double c = 1.0 / (4.0 * kPi * kPi);

  // Near part: window times (kernel*G minus its singular quadratic piece),
  // plus the quadratic piece integrated analytically.
  std::vector<double> Gfield(A.size());
  for (std::size_t i = 0; i < A.size(); ++i) Gfield[i] = 2.0 * a0 - 2.0 * A[i];
  const std::array<int, 3> dims{m, m, m};
  double near = kernels::parallel::weighted_lattice_sum(
      Gfield, dims, h, [&](double x, double y, double z) {
        const double r2 = x * x + y * y + z * z;
        if (r2 == 0.0 || r2 > near_reach * near_reach) return 0.0;
        const double r = std::sqrt(r2);
        const double w = std::exp(-std::pow(r / tau, 4));
        return w * c * bessel_kernel(r);
      });
  // Subtract the quadratic model over the same lattice points.
  double quad = 0.0;
  const int reach = static_cast<int>(std::ceil(near_reach / h));
  for (int x = -reach; x <= reach; ++x)
    for (int y = -reach; y <= reach; ++y)
      for (int z = -reach; z <= reach; ++z) {
        const double rx = x * h, ry = y * h, rz = z * h;
        const double r2 = rx * rx + ry * ry + rz * rz;
        if (r2 == 0.0 || r2 > near_reach * near_reach) continue;
        const double q2 = M[0][0] * rx * rx + M[1][1] * ry * ry + M[2][2] * rz * rz +
                          2.0 * (M[0][1] * rx * ry + M[0][2] * rx * rz + M[1][2] * ry * rz);
        const double w = std::exp(-std::pow(std::sqrt(r2) / tau, 4));
        quad += w * q2 / (2.0 * kPi * kPi * r2 * r2);
      }
  near -= quad * h3;
  near += 2.0 * trM / (3.0 * kPi) * tau * std::tgamma(1.25);

  // Far part: constant piece by radial quadrature, correlation piece on the lattice.
  auto far_radial = [&](double r) {
    if (r == 0.0) return 0.0;
    return bessel_kernel(r) * one_minus_window(r, tau) * 4.0 * kPi * r * r;
  };
  double far_const = 0.0;
  const double breaks[] = {0.0, tau, 3.0 * tau, 10.0, 20.0, 30.0, rc};
  for (std::size_t i = 0; i + 1 < std::size(breaks); ++i) {
    const double lo = std::min(breaks[i], rc), hi = std::min(breaks[i + 1], rc);
    if (hi > lo) far_const += radial_integral(far_radial, lo, hi);
  }
  far_const *= 2.0 * a0 * c;
  const double far_corr = kernels::parallel::weighted_lattice_sum(
      A, dims, h, [&](double x, double y, double z) {
        const double r2 = x * x + y * y + z * z;
        if (r2 > rc * rc) return 0.0;
        if (r2 == 0.0) return 2.0 * c / std::pow(tau, 4);
        const double r = std::sqrt(r2);
        return c * bessel_kernel(r) * one_minus_window(r, tau);
      });
  return near + far_const - 2.0 * far_corr;
}

// ---------------------------------------------------------------------------

double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t);
  const double b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

CutoffFamily::CutoffFamily(double rho) : rho_(rho) {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw DomainError("rho must be positive");
}

double CutoffFamily::u(double r) const {
  const double r1 = inner_radius();
  if (r <= r1) return 1.0;
  if (r >= outer_radius()) return 0.0;
  return std::cos(0.5 * kPi * smooth_step((r - r1) / r1));
}

double CutoffFamily::v(double r) const {
  const double r1 = inner_radius();
  if (r <= r1) return 0.0;
  if (r >= outer_radius()) return 1.0;
  return std::sin(0.5 * kPi * smooth_step((r - r1) / r1));
}

bool in_transition_shell(double r, double rho) {
  return r > 3.0 * rho / 32.0 && r <= 9.0 * rho / 32.0;
}

namespace {

std::vector<double> radii(const GridSpec& g) {
  if (g.particles != 1) throw ShapeError("expected a single-particle grid");
  const std::size_t n = g.size();
  std::vector<double> r(n);
  std::vector<int> idx(static_cast<std::size_t>(g.axes()));
  for (std::size_t i = 0; i < n; ++i) {
    g.unflatten(i, idx);
    double r2 = 0.0;
    for (int a : idx) {
      const double x = g.coordinate(a);
      r2 += x * x;
    }
    r[i] = std::sqrt(r2);
  }
  return r;
}

}  // namespace

double localization_error_1(const WaveFunction& h, const CutoffFamily& cut, KineticKind kind) {
  const GridSpec& g = h.grid();
  const auto r = radii(g);
  const auto sym = kinetic_diagonal(kind, g);
  const std::size_t n = g.size();
  std::vector<cplx> hu(n), hv(n), hh(h.values().begin(), h.values().end());
  for (std::size_t i = 0; i < n; ++i) {
    hu[i] = cut.u(r[i]) * hh[i];
    hv[i] = cut.v(r[i]) * hh[i];
  }
  fft_forward(g, hu);
  fft_forward(g, hv);
  fft_forward(g, hh);
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i)
    d[i] = sym[i] * (std::norm(hu[i]) + std::norm(hv[i]) - std::norm(hh[i]));
  // Ordered summation for reproducibility.
  double s = 0.0;
  for (double x : d) s += x;
  return s * g.cell_volume();
}

double shell_norm2(const WaveFunction& h, double rho) {
  const auto r = radii(h.grid());
  double s = 0.0;
  auto v = h.values();
  for (std::size_t i = 0; i < r.size(); ++i)
    if (in_transition_shell(r[i], rho)) s += std::norm(v[i]);
  return s * h.grid().cell_volume();
}

// ---------------------------------------------------------------------------

PartitionOfUnity::PartitionOfUnity(std::array<double, 3> x1, std::array<double, 3> x2,
                                   double rho)
    : x1_(x1), x2_(x2), cut_(rho) {}

std::array<double, 3> PartitionOfUnity::weights(const std::array<double, 3>& z) const {
  auto dist = [&](const std::array<double, 3>& c) {
    return std::hypot(z[0] - c[0], z[1] - c[1], z[2] - c[2]);
  };
  const double r1 = dist(x1_), r2 = dist(x2_);
  return {cut_.v(r1) * cut_.v(r2), cut_.u(r1), cut_.u(r2)};
}

double PartitionOfUnity::cutoff(const ClusterLabels& beta,
                                std::span<const std::array<double, 3>> config) const {
  if (beta.size() != config.size())
    throw ShapeError("cluster labels and configuration differ in length");
  double j = 1.0;
  for (std::size_t i = 0; i < config.size(); ++i) {
    if (beta[i] < 0 || beta[i] > 2) throw DomainError("cluster label must be 0, 1 or 2");
    j *= weights(config[i])[static_cast<std::size_t>(beta[i])];
  }
  return j;
}

std::map<ClusterLabels, double> PartitionOfUnity::members(
    std::span<const std::array<double, 3>> config) const {
  const std::size_t ne = config.size();
  if (ne > 12) throw CapacityError("too many electrons for explicit enumeration");
  std::vector<std::array<double, 3>> w(ne);
  for (std::size_t i = 0; i < ne; ++i) w[i] = weights(config[i]);
  std::map<ClusterLabels, double> out;
  std::size_t total = 1;
  for (std::size_t i = 0; i < ne; ++i) total *= 3;
  ClusterLabels beta(ne, 0);
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t c = code;
    double j = 1.0;
    for (std::size_t i = ne; i-- > 0;) {
      beta[i] = static_cast<int>(c % 3);
      c /= 3;
      j *= w[i][static_cast<std::size_t>(beta[i])];
    }
    out.emplace(beta, j);
  }
  return out;
}

PartitionOfUnity partition_build(const std::vector<std::array<double, 3>>& nuclei,
                                 double rho) {
  if (nuclei.size() != 2) throw GeometryError("partition of unity needs exactly two nuclei");
  const auto& a = nuclei[0];
  const auto& b = nuclei[1];
  const double d = std::hypot(a[0] - b[0], a[1] - b[1], a[2] - b[2]);
  if (!(d > 2.0 * rho / 4.0))
    throw GeometryError("nuclei separated by " + std::to_string(d) +
                        ", need more than rho/2 = " + std::to_string(rho / 2.0));
  return PartitionOfUnity(a, b, rho);
}

double partition_check(const PartitionOfUnity& p,
                       const std::vector<std::vector<std::array<double, 3>>>& samples) {
  double worst = 0.0;
  for (const auto& x : samples) {
    double s = 0.0;
    for (const auto& [beta, j] : p.members(x)) s += j * j;
    worst = std::max(worst, std::abs(s - 1.0));
  }
  return worst;
}

}  // namespace vdwlab
