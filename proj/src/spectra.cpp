#include "vdwlab/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Dense>

#include "vdwlab/errors.hpp"

namespace vdwlab {

namespace {

using Mat = Eigen::MatrixXcd;
using Col = Eigen::VectorXcd;
using Index = Eigen::Index;

struct Problem {
  const Hamiltonian& H;
  Sector sector;
  int matvecs = 0;

  std::size_t size() const { return H.grid().size(); }
  void apply(const cplx* in, cplx* out) {
    H.apply(std::span<const cplx>(in, size()), std::span<cplx>(out, size()));
    ++matvecs;
  }
  void project(cplx* v) const { project_sector(sector, H.grid(), std::span<cplx>(v, size())); }
};

// Classical Gram-Schmidt, two passes, against the first k columns of B.
template <class Vector>
Col orthogonalize(const Mat& B, Index k, Vector&& v) {
  Col c = Col::Zero(k);
  if (k == 0) return c;
  for (int pass = 0; pass < 2; ++pass) {
    const Col d = B.leftCols(k).adjoint() * v;
    v.noalias() -= B.leftCols(k) * d;
    c += d;
  }
  return c;
}

Col random_start(Problem& pb, const Mat& locked, const Mat& basis, Index k,
                 std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  const auto n = static_cast<Index>(pb.size());
  for (int attempt = 0; attempt < 8; ++attempt) {
    Col v(n);
    for (Index i = 0; i < n; ++i) v(i) = cplx(nd(rng), 0.0);
    pb.project(v.data());
    orthogonalize(locked, locked.cols(), v);
    orthogonalize(basis, k, v);
    const double nv = v.norm();
    if (nv > 1e-8 * std::sqrt(static_cast<double>(n))) return v / nv;
  }
  throw DegeneracyError("sector exhausted: no start vector orthogonal to the locked states");
}

struct RunResult {
  std::vector<double> values;
  Mat vectors;
  std::vector<double> residuals;
};

double explicit_residual(Problem& pb, const Col& x, double theta) {
  Col hx(x.size());
  pb.apply(x.data(), hx.data());
  return (hx - theta * x).norm();
}

RunResult finish(Problem& pb, Mat X, const Eigen::VectorXd& theta, int need,
                 const SolverOptions& opt, bool& ok) {
  RunResult out;
  ok = true;
  for (int i = 0; i < need; ++i) {
    X.col(i).normalize();
    const double r = explicit_residual(pb, X.col(i), theta(i));
    if (r > opt.tolerance) ok = false;
    out.values.push_back(theta(i));
    out.residuals.push_back(r);
  }
  out.vectors = X.leftCols(need);
  return out;
}

// Thick-restart Lanczos on the complement of `locked`; H V = V T + f b^T.
RunResult lanczos_run(Problem& pb, const Mat& locked, int need, const SolverOptions& opt,
                      std::uint64_t seed) {
  const auto n = static_cast<Index>(pb.size());
  const int m = opt.basis_size > 0 ? std::max(opt.basis_size, need + 8)
                                   : std::max(need + 32, 2 * need + 16);
  const int keep = std::max(need + 4, (m + need) / 2);
  std::mt19937_64 rng(seed);

  Mat V(n, m);
  Index k = 0;
  Mat T = Mat::Zero(m, m);
  Col b, f(n), w(n);

  auto extend = [&](const Col& v) {
    const Index j = k;
    V.col(j) = v;
    k = j + 1;
    pb.apply(V.col(j).data(), w.data());
    pb.project(w.data());
    orthogonalize(locked, locked.cols(), w);
    const Col c = orthogonalize(V, k, w);
    for (Index i = 0; i < j; ++i) {
      T(i, j) = c(i);
      T(j, i) = std::conj(c(i));
    }
    T(j, j) = c(j).real();
    f = w;
    b = Col::Zero(k);
    b(j) = 1.0;
  };

  extend(random_start(pb, locked, V, 0, rng));

  double tol_factor = 0.5;
  double best = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart <= opt.max_restarts; ++restart) {
    while (k < m) {
      const double beta = f.norm();
      const double tnorm = std::max(1.0, T.topLeftCorner(k, k).norm());
      if (beta <= 1e-13 * tnorm)
        extend(random_start(pb, locked, V, k, rng));  // invariant subspace
      else
        extend(f / beta);
    }
    Mat Tk = T.topLeftCorner(k, k);
    Tk = 0.5 * (Tk + Tk.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Mat> es(Tk);
    const Eigen::VectorXd theta = es.eigenvalues();
    const Mat& Y = es.eigenvectors();
    const double fn = f.norm();
    bool converged = true;
    double worst = 0.0;
    for (int i = 0; i < need; ++i) {
      const double est = fn * std::abs(b.cwiseProduct(Y.col(i)).sum());
      worst = std::max(worst, est);
      if (est > tol_factor * opt.tolerance) converged = false;
    }
    best = std::min(best, worst);

    const int nk = std::min<int>(keep, static_cast<int>(k));
    Mat X = V.leftCols(k) * Y.leftCols(nk);
    if (converged) {
      bool ok = false;
      RunResult out = finish(pb, X, theta, need, opt, ok);
      if (ok) return out;
      tol_factor *= 0.1;
      if (tol_factor < 1e-4)
        throw ConvergenceError("Lanczos residual stagnated above tolerance",
                               *std::max_element(out.residuals.begin(), out.residuals.end()));
    }
    Col nb(nk);
    for (int i = 0; i < nk; ++i) nb(i) = b.cwiseProduct(Y.col(i)).sum();
    V.leftCols(nk) = X;
    k = nk;
    T.setZero();
    for (int i = 0; i < nk; ++i) T(i, i) = theta(i);
    b = nb;
  }
  throw ConvergenceError("Lanczos did not converge within " +
                             std::to_string(opt.max_restarts) + " restarts",
                         best);
}

// Block Davidson on the complement of `locked`, preconditioned with
// (T - theta)^-1 in momentum space.
RunResult davidson_run(Problem& pb, const Mat& locked, int need, const SolverOptions& opt,
                       std::uint64_t seed) {
  const auto n = static_cast<Index>(pb.size());
  const int p = need;
  const int m = opt.basis_size > 0 ? std::max(opt.basis_size, 2 * p + 2)
                                   : std::max(3 * p, p + 16);
  const int keep = std::max(2 * p, p + 4);
  const auto sym = pb.H.kinetic_diagonal();
  std::mt19937_64 rng(seed);

  Mat V(n, m + p), W(n, m + p);
  Mat S = Mat::Zero(m + p, m + p);
  Index k = 0;

  auto add = [&](const Col& v) {
    const Index j = k;
    V.col(j) = v;
    pb.apply(V.col(j).data(), W.col(j).data());
    k = j + 1;
    const Col c = V.leftCols(k).adjoint() * W.col(j);
    for (Index i = 0; i < k; ++i) {
      S(i, j) = c(i);
      S(j, i) = std::conj(c(i));
    }
  };
  for (int i = 0; i < p; ++i) add(random_start(pb, locked, V, k, rng));

  double best = std::numeric_limits<double>::infinity();
  Col r(n);
  for (int iter = 0; iter <= opt.max_restarts * 8; ++iter) {
    Mat Sk = S.topLeftCorner(k, k);
    Sk = 0.5 * (Sk + Sk.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Mat> es(Sk);
    const Eigen::VectorXd theta = es.eigenvalues();
    const Mat& Y = es.eigenvectors();

    const bool restart = k + p > m;
    const int nr = restart ? std::min<int>(keep, static_cast<int>(k)) : p;
    Mat X = V.leftCols(k) * Y.leftCols(nr);
    Mat HX = W.leftCols(k) * Y.leftCols(nr);
    Mat R = HX.leftCols(p) - X.leftCols(p) * theta.head(p).asDiagonal();
    bool converged = true;
    double worst = 0.0;
    std::vector<double> rn(static_cast<std::size_t>(p));
    for (int i = 0; i < p; ++i) {
      rn[static_cast<std::size_t>(i)] = R.col(i).norm();
      worst = std::max(worst, rn[static_cast<std::size_t>(i)]);
      if (rn[static_cast<std::size_t>(i)] > 0.5 * opt.tolerance) converged = false;
    }
    best = std::min(best, worst);

    if (converged) {
      bool ok = false;
      RunResult out = finish(pb, X, theta, need, opt, ok);
      if (ok) return out;
      throw ConvergenceError("Davidson residual estimate disagrees with the explicit residual",
                             *std::max_element(out.residuals.begin(), out.residuals.end()));
    }

    if (restart) {
      V.leftCols(nr) = X;
      W.leftCols(nr) = HX;
      k = nr;
      S.setZero();
      for (int i = 0; i < nr; ++i) S(i, i) = theta(i);
    }

    const Index before = k;
    for (int i = 0; i < p; ++i) {
      if (rn[static_cast<std::size_t>(i)] <= 0.5 * opt.tolerance) continue;
      r = R.col(i);
      fft_forward(pb.H.grid(), std::span<cplx>(r.data(), static_cast<std::size_t>(n)));
      for (Index q = 0; q < n; ++q)
        r(q) /= std::max(sym[static_cast<std::size_t>(q)] - theta(i), 0.25);
      fft_backward(pb.H.grid(), std::span<cplx>(r.data(), static_cast<std::size_t>(n)));
      pb.project(r.data());
      orthogonalize(locked, locked.cols(), r);
      orthogonalize(V, k, r);
      const double nr2 = r.norm();
      if (!(nr2 > 1e-14)) continue;
      add(r / nr2);
    }
    if (k == before) add(random_start(pb, locked, V, k, rng));
  }
  throw ConvergenceError("Davidson did not converge", best);
}

RunResult run(Problem& pb, const Mat& locked, int need, const SolverOptions& opt,
              std::uint64_t seed) {
  return opt.method == EigenMethod::Lanczos ? lanczos_run(pb, locked, need, opt, seed)
                                            : davidson_run(pb, locked, need, opt, seed);
}

}  // namespace

Eigenpairs lanczos_lowest(const Hamiltonian& H, Sector sector, int n_states,
                          const SolverOptions& opt) {
  if (n_states < 1) throw DomainError("n_states must be >= 1");
  check_sector(sector, H.grid().particles);
  Problem pb{H, sector};
  const auto n = static_cast<Index>(H.grid().size());
  Mat locked(n, 0);
  std::vector<double> values, residuals;

  auto lock = [&](RunResult&& r) {
    const Index c0 = locked.cols();
    locked.conservativeResize(n, c0 + r.vectors.cols());
    locked.rightCols(r.vectors.cols()) = r.vectors;
    values.insert(values.end(), r.values.begin(), r.values.end());
    residuals.insert(residuals.end(), r.residuals.begin(), r.residuals.end());
  };

  std::uint64_t seed = opt.seed;
  lock(run(pb, locked, n_states, opt, seed));
  // Look for states the first search could not see (degenerate copies).
  for (int round = 0; round < 64; ++round) {
    std::vector<double> sorted(values);
    std::sort(sorted.begin(), sorted.end());
    const double top = sorted[static_cast<std::size_t>(n_states - 1)];
    RunResult probe;
    try {
      probe = run(pb, locked, 1, opt, ++seed);
    } catch (const DegeneracyError&) {
      break;
    }
    if (probe.values[0] > top + opt.degeneracy_tol) break;
    lock(std::move(probe));
  }

  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  Eigenpairs out;
  out.matvecs = pb.matvecs;
  for (int i = 0; i < n_states; ++i) {
    const std::size_t j = order[static_cast<std::size_t>(i)];
    out.values.push_back(values[j]);
    out.residuals.push_back(residuals[j]);
    Col col = locked.col(static_cast<Index>(j));
    // Fix the global phase: largest component real and positive.
    Index imax = 0;
    col.cwiseAbs().maxCoeff(&imax);
    col *= std::abs(col(imax)) / col(imax);
    out.vectors.emplace_back(H.grid(), std::vector<cplx>(col.data(), col.data() + n));
  }
  return out;
}

SpectrumSlice solve_sector(const AtomModel& atom, const GridSpec& grid, Sector sector,
                           int n_states, const SolverOptions& opt) {
  if (n_states < 1) throw DomainError("n_states must be >= 1");
  const Hamiltonian H = build_hamiltonian(atom, grid);
  check_sector(sector, atom.n_electrons);
  Eigenpairs ep = lanczos_lowest(H, sector, n_states + 1, opt);

  SpectrumSlice s;
  s.atom = atom;
  s.grid = H.grid();
  s.sector = sector;
  s.seed = opt.seed;
  const double e0 = ep.values[0];
  for (std::size_t i = 1; i < ep.values.size(); ++i)
    if (ep.values[i] > e0 + opt.degeneracy_tol) {
      s.gap = ep.values[i] - e0;
      break;
    }
  if (!(s.gap > 0.0))
    throw DegeneracyError("no level above the ground level among the computed states");
  for (int i = 0; i < n_states; ++i) {
    s.eigenvalues.push_back(ep.values[static_cast<std::size_t>(i)]);
    s.residuals.push_back(ep.residuals[static_cast<std::size_t>(i)]);
    s.eigenvectors.push_back(std::move(ep.vectors[static_cast<std::size_t>(i)]));
  }
  return s;
}

// ---------------------------------------------------------------------------

DecayFit fit_decay(const WaveFunction& phi, const DecayFitOptions& opt) {
  const GridSpec& g = phi.grid();
  if (g.particles != 1) throw ShapeError("fit_decay expects a single-particle state");
  const double h = g.spacing();
  const double half = 0.5 * g.box_length;
  const double lo = opt.window_lo * half, hi = opt.window_hi * half;
  auto vals = phi.values();

  double peak = 0.0;
  for (const auto& z : vals) peak = std::max(peak, std::abs(z));
  if (!(peak > 0.0)) throw FitError("state vanishes identically");

  const auto nbins = static_cast<std::size_t>(std::ceil(hi / h)) + 2;
  std::vector<double> amp(nbins, -1.0), rad(nbins, 0.0);
  std::vector<int> idx(static_cast<std::size_t>(g.axes()));
  for (std::size_t i = 0; i < vals.size(); ++i) {
    g.unflatten(i, idx);
    double r2 = 0.0;
    for (int a : idx) {
      const double x = g.coordinate(a);
      r2 += x * x;
    }
    const double r = std::sqrt(r2);
    if (r < lo || r > hi) continue;
    const auto bin = static_cast<std::size_t>(std::floor(r / h + 1e-9));
    const double a = std::abs(vals[i]);
    if (bin < nbins && a > amp[bin]) {
      amp[bin] = a;
      rad[bin] = r;
    }
  }
  DecayFit fit;
  for (std::size_t k = 0; k < nbins; ++k)
    if (amp[k] > opt.noise_floor * peak && amp[k] <= opt.tail_start * peak) {
      fit.radii.push_back(rad[k]);
      fit.log_amplitudes.push_back(std::log(amp[k]));
    }
  const int count = static_cast<int>(fit.radii.size());
  if (count < opt.min_samples)
    throw FitError("decay window holds " + std::to_string(count) +
                   " usable samples, need " + std::to_string(opt.min_samples));
  const double mr = std::accumulate(fit.radii.begin(), fit.radii.end(), 0.0) / count;
  const double my =
      std::accumulate(fit.log_amplitudes.begin(), fit.log_amplitudes.end(), 0.0) / count;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < count; ++i) {
    const double dx = fit.radii[static_cast<std::size_t>(i)] - mr;
    sxx += dx * dx;
    sxy += dx * (fit.log_amplitudes[static_cast<std::size_t>(i)] - my);
  }
  const double slope = sxy / sxx;
  double ss = 0.0;
  for (int i = 0; i < count; ++i) {
    const double e = fit.log_amplitudes[static_cast<std::size_t>(i)] -
                     (my + slope * (fit.radii[static_cast<std::size_t>(i)] - mr));
    ss += e * e;
  }
  fit.rate_b = -slope;
  fit.fit_residual = std::sqrt(ss / count);
  return fit;
}

IonizationLadder ionization_ladder(const AtomModel& atom, const GridSpec& grid,
                                   const SolverOptions& opt) {
  if (atom.dim != 1) throw UnsupportedError("ionization ladder needs dim = 1");
  if (atom.Z > 2) throw UnsupportedError("more than two electrons per atom is not supported");
  IonizationLadder out;
  for (int k = 1; k <= atom.Z; ++k) {
    AtomModel a = atom;
    a.n_electrons = k;
    const Sector s = k == 2 ? Sector::Symmetric : Sector::Full;
    const Eigenpairs ep = lanczos_lowest(build_hamiltonian(a, grid), s, 1, opt);
    out.energies.push_back(ep.values[0]);
    out.residuals.push_back(ep.residuals[0]);
    if (k > 1) out.differences.push_back(ep.values[0] - out.energies[out.energies.size() - 2]);
  }
  return out;
}

WeylProbe weyl_probe(const AtomModel& atom, const GridSpec& grid, double s0, int doublings,
                     const SolverOptions& opt) {
  if (atom.dim != 1 || atom.Z < 2)
    throw UnsupportedError("Weyl probe is implemented for 1D atoms with Z >= 2");
  AtomModel ion = atom;
  ion.n_electrons = 1;
  GridSpec g1 = grid;
  g1.particles = 1;
  const Eigenpairs ep = lanczos_lowest(build_hamiltonian(ion, g1), Sector::Full, 1, opt);
  const auto phi = ep.vectors[0].values();

  AtomModel two = atom;
  two.n_electrons = 2;
  const Hamiltonian H = build_hamiltonian(two, grid);
  const GridSpec& g2 = H.grid();
  const int n = grid.points;

  WeylProbe out;
  out.threshold = ep.values[0];
  for (int j = 0; j <= doublings; ++j) {
    const double s = s0 * std::ldexp(1.0, j);
    const double sigma = std::sqrt(s) / 4.0;
    if (s + 10.0 * sigma > 0.5 * grid.box_length)
      throw DomainError("probe packet at s = " + std::to_string(s) + " does not fit in the box");
    std::vector<double> gpk(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const double t = (g1.coordinate(i) - s) / sigma;
      gpk[static_cast<std::size_t>(i)] = std::exp(-0.5 * t * t);
    }
    std::vector<cplx> v(g2.size());
    for (int i1 = 0; i1 < n; ++i1)
      for (int i2 = 0; i2 < n; ++i2)
        v[static_cast<std::size_t>(i1) * n + i2] =
            phi[static_cast<std::size_t>(i1)] * gpk[static_cast<std::size_t>(i2)] +
            gpk[static_cast<std::size_t>(i1)] * phi[static_cast<std::size_t>(i2)];
    const WaveFunction psi = WaveFunction(g2, std::move(v)).normalized();
    out.separations.push_back(s);
    out.energies.push_back(H.expectation(psi));
  }
  return out;
}

}  // namespace vdwlab
