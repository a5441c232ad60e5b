#include "vdwlab/dimer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <Eigen/Dense>

#include "vdwlab/errors.hpp"

namespace vdwlab {

void DimerModel::validate() const {
  atom.validate();
  grid.validate();
  if (atom.dim != 1 || grid.dim != 1) throw UnsupportedError("dimers are one-dimensional");
  if (atom.Z != 1 || atom.n_electrons != 1)
    throw UnsupportedError("dimer atoms carry one electron and Z = 1");
  if (grid.particles != 1) throw ShapeError("dimer grid describes one particle axis");
  check_sector(sector, 2);
  if (!(margin_decay_lengths >= 0.0)) throw DomainError("margin must be non-negative");
}

namespace {

// kappa with t(i kappa) = E for a bound energy E < 0
double decay_rate(KineticKind kind, double E) {
  const double eps = -E;
  if (!(eps > 0.0)) throw DomainError("atom is not bound on this lattice");
  if (kind == KineticKind::NonRelativistic) return std::sqrt(2.0 * eps);
  if (eps >= 1.0) return 1.0;
  return std::sqrt(1.0 - (1.0 - eps) * (1.0 - eps));
}

int half_shift(const GridSpec& g, double D) {
  const double m = D / (2.0 * g.spacing());
  const double r = std::round(m);
  if (!(D > 0.0) || std::abs(m - r) > 1e-9 * std::max(1.0, m))
    throw GeometryError("separation must be a positive even multiple of the lattice spacing");
  return static_cast<int>(r);
}

}  // namespace

AtomReference atom_reference(const DimerModel& model, const SolverOptions& opt) {
  model.validate();
  const SpectrumSlice s = solve_sector(model.atom, model.grid, Sector::Full, 1, opt);
  AtomReference ref;
  ref.energy = s.eigenvalues.front();
  ref.decay_rate = decay_rate(model.atom.kinetic, ref.energy);
  double total = 0.0;
  for (const auto& z : s.eigenvectors.front().values()) {
    ref.density.push_back(std::norm(z));
    total += std::norm(z);
  }
  for (auto& r : ref.density) r /= total;
  return ref;
}

double first_order_energy(const DimerModel& model, const std::vector<double>& rho, double D) {
  const GridSpec& g = model.grid;
  const int n = g.points;
  if (static_cast<int>(rho.size()) != n) throw ShapeError("density size does not match grid");
  const int m = half_shift(g, D);
  const double a = model.atom.softening;
  std::vector<double> x(static_cast<std::size_t>(n)), ra(x.size()), rb(x.size());
  for (int i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    x[ui] = g.coordinate(i);
    ra[ui] = rho[static_cast<std::size_t>((i + m) % n)];
    rb[ui] = rho[static_cast<std::size_t>(((i - m) % n + n) % n)];
  }
  const double XA = -0.5 * D, XB = 0.5 * D;
  double s = soft_coulomb(D * D, a);
  for (std::size_t i = 0; i < x.size(); ++i) {
    s -= ra[i] * soft_coulomb((x[i] - XB) * (x[i] - XB), a);
    s -= rb[i] * soft_coulomb((x[i] - XA) * (x[i] - XA), a);
  }
  double ee = 0.0;
#pragma omp parallel for reduction(+ : ee) schedule(static)
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (ra[i] == 0.0) continue;
    double row = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j)
      row += rb[j] * soft_coulomb((x[i] - x[j]) * (x[i] - x[j]), a);
    ee += ra[i] * row;
  }
  return model.atom.e2 * (s + ee);
}

DimerPoint dimer_solve(const DimerModel& model, const AtomReference& ref, double D,
                       const SolverOptions& opt) {
  model.validate();
  half_shift(model.grid, D);
  const double reach = 0.5 * D + model.margin_decay_lengths / ref.decay_rate;
  if (reach > 0.5 * model.grid.box_length)
    throw DomainError("box too small: atoms at +-D/2 need half-width " + std::to_string(reach));
  GridSpec g2 = model.grid;
  g2.particles = 2;
  std::vector<Nucleus> nuclei{Nucleus{{-0.5 * D, 0.0, 0.0}, 1}, Nucleus{{0.5 * D, 0.0, 0.0}, 1}};
  const Hamiltonian H(g2, model.atom.kinetic, model.atom.e2, model.atom.softening, nuclei);
  const Eigenpairs ep = lanczos_lowest(H, model.sector, 1, opt);
  DimerPoint p;
  p.D = D;
  p.energy = ep.values.front();
  p.residual = ep.residuals.front();
  p.mu = 2.0 * ref.energy;
  p.first_order = first_order_energy(model, ref.density, D);
  p.dispersion = p.mu + p.first_order - p.energy;
  return p;
}

std::vector<double> separation_grid(const GridSpec& grid, double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi >= lo) || n < 1) throw DomainError("bad separation range");
  const double step = 2.0 * grid.spacing();
  std::vector<double> out;
  for (int i = 0; i < n; ++i) {
    const double t = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
    const double D = lo * std::pow(hi / lo, t);
    const double r = std::max(1.0, std::round(D / step)) * step;
    if (out.empty() || r > out.back() + 0.5 * step) out.push_back(r);
  }
  return out;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw FitError("need at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || y[i] == 0.0) throw FitError("log-log fit needs nonzero values");
    mx += std::log(x[i]);
    my += std::log(std::abs(y[i]));
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(std::abs(y[i])) - my);
  }
  if (!(sxx > 0.0)) throw FitError("separations do not vary");
  return sxy / sxx;
}

void fit_dispersion(DimerScan& scan) {
  const auto n = static_cast<Eigen::Index>(scan.points.size());
  if (n < 3) throw FitError("need at least three separations");
  Eigen::MatrixXd A(n, 2);
  Eigen::VectorXd b = Eigen::VectorXd::Ones(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const DimerPoint& p = scan.points[static_cast<std::size_t>(i)];
    if (!(p.dispersion > 0.0)) throw FitError("dispersion energy is not positive");
    A(i, 0) = std::pow(p.D, -6) / p.dispersion;
    A(i, 1) = std::pow(p.D, -8) / p.dispersion;
  }
  const Eigen::Vector2d c = A.colPivHouseholderQr().solve(b);
  scan.C6 = c[0];
  scan.C8 = c[1];
  scan.fit_rms = std::sqrt((A * c - b).squaredNorm() / static_cast<double>(n));
  std::vector<double> D, rest, disp, raw;
  for (const auto& p : scan.points) {
    D.push_back(p.D);
    rest.push_back(p.dispersion - scan.C6 * std::pow(p.D, -6));
    disp.push_back(p.dispersion);
    raw.push_back(p.energy - p.mu);
  }
  scan.residual_slope = loglog_slope(D, rest);
  scan.dispersion_slope = loglog_slope(D, disp);
  scan.raw_slope = loglog_slope(D, raw);
}

DimerScan scan_and_fit(const DimerModel& model, const std::vector<double>& D_grid,
                       const SolverOptions& opt) {
  DimerScan scan;
  scan.seed = opt.seed;
  const AtomReference ref = atom_reference(model, opt);
  scan.atom_energy = ref.energy;
  for (double D : D_grid) scan.points.push_back(dimer_solve(model, ref, D, opt));
  fit_dispersion(scan);
  return scan;
}

void write_dimer_csv(const DimerScan& scan, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot open " + path.string());
  out << "D,energy,mu_inf,first_order,dispersion,residual\n";
  char buf[256];
  for (const auto& p : scan.points) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", p.D, p.energy, p.mu,
                  p.first_order, p.dispersion, p.residual);
    out << buf;
  }
}

}  // namespace vdwlab
