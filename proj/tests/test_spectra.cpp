#include <catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "vdwlab/errors.hpp"
#include "vdwlab/spectra.hpp"

using namespace vdwlab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Eigen::MatrixXd dense_nr_1d(int n, double L, double Ze2, double a) {
  const double h = L / n;
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
  for (int d = 0; d < n; ++d) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) {
      const int m = k < n / 2 ? k : k - n;
      const double q = 2 * M_PI * m / L;
      s += 0.5 * q * q * std::cos(2 * M_PI * k * d / n);
    }
    for (int i = 0; i < n; ++i) H(i, (i + d) % n) = s / n;
  }
  for (int i = 0; i < n; ++i) {
    const double x = (i < n / 2 ? i : i - n) * h;
    H(i, i) -= Ze2 / std::sqrt(x * x + a * a);
  }
  return H;
}

}  // namespace

TEST_CASE("parity sectors against a dense spectrum", "[spectra]") {
  const GridSpec g{1, 256, 40.0, 1};
  const AtomModel atom{1, 1.0, 1.0, KineticKind::NonRelativistic, 1, 1};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense_nr_1d(256, 40.0, 1.0, 1.0), Eigen::EigenvaluesOnly);
  const SpectrumSlice even = solve_sector(atom, g, Sector::Even, 2);
  const SpectrumSlice odd = solve_sector(atom, g, Sector::Odd, 1);
  // levels alternate parity in 1D
  CHECK_THAT(even.eigenvalues[0], WithinAbs(es.eigenvalues()[0], 1e-9));
  CHECK_THAT(odd.eigenvalues[0], WithinAbs(es.eigenvalues()[1], 1e-9));
  CHECK_THAT(even.eigenvalues[1], WithinAbs(es.eigenvalues()[2], 1e-9));
  CHECK(odd.eigenvalues[0] > even.eigenvalues[0]);
  for (double r : even.residuals) CHECK(r <= 1e-10);
  CHECK(even.gap > 0.0);
}

TEST_CASE("Lanczos and Davidson agree", "[spectra]") {
  const GridSpec g{1, 256, 40.0, 1};
  const AtomModel atom{1, 1.0, 1.0, KineticKind::PseudoRelativistic, 1, 1};
  SolverOptions lo;
  lo.method = EigenMethod::Lanczos;
  const SpectrumSlice a = solve_sector(atom, g, Sector::Full, 4, lo);
  const SpectrumSlice b = solve_sector(atom, g, Sector::Full, 4);
  for (int k = 0; k < 4; ++k) CHECK_THAT(a.eigenvalues[k], WithinAbs(b.eigenvalues[k], 1e-9));
  for (int k = 1; k < 4; ++k) CHECK(b.eigenvalues[k] >= b.eigenvalues[k - 1]);
}

TEST_CASE("solver output is seed deterministic", "[spectra]") {
  const GridSpec g{1, 128, 30.0, 1};
  const AtomModel atom{1, 1.0, 1.0, KineticKind::NonRelativistic, 1, 1};
  const SpectrumSlice a = solve_sector(atom, g, Sector::Full, 2);
  const SpectrumSlice b = solve_sector(atom, g, Sector::Full, 2);
  CHECK(a.eigenvalues == b.eigenvalues);
  CHECK_THROWS_AS(solve_sector(atom, g, Sector::Full, 0), DomainError);
}

TEST_CASE("3D hydrogen deepens as the softening shrinks", "[spectra]") {
  const GridSpec g{3, 32, 16.0, 1};
  double prev = 0.0;
  for (double a : {1.0, 0.5, 0.25}) {
    const AtomModel atom{1, 1.0, a, KineticKind::NonRelativistic, 1, 3};
    const double e = solve_sector(atom, g, Sector::Full, 1).eigenvalues[0];
    CHECK(e < prev);
    prev = e;
  }
  // exact Coulomb value is -1/2; the softened lattice model stays above it
  CHECK(prev > -0.5);
  CHECK(prev < -0.3);
}

TEST_CASE("decay fit recovers a synthetic rate", "[spectra]") {
  const GridSpec g{1, 2048, 204.8, 1};
  const WaveFunction phi = WaveFunction::sample(g, [](std::span<const double> x) {
    return cplx(std::exp(-0.7 * std::abs(x[0])), 0.0);
  });
  const DecayFit f = fit_decay(phi);
  CHECK_THAT(f.rate_b, WithinRel(0.7, 1e-6));
  CHECK(f.fit_residual < 1e-6);
  CHECK(f.radii.size() >= 8);
  CHECK_THROWS_AS(fit_decay(WaveFunction(g, std::vector<cplx>(g.size()))), FitError);
}

TEST_CASE("deeper binding decays faster", "[spectra]") {
  const GridSpec g{1, 2048, 204.8, 1};
  double prev = 0.0;
  for (double e2 : {0.25, 0.5, 1.0}) {
    const AtomModel atom{1, e2, 1.0, KineticKind::NonRelativistic, 1, 1};
    const SpectrumSlice s = solve_sector(atom, g, Sector::Full, 1);
    const DecayFit f = fit_decay(s.eigenvectors[0]);
    // bound state of energy E decays like exp(-sqrt(-2E) r)
    CHECK_THAT(f.rate_b, WithinRel(std::sqrt(-2 * s.eigenvalues[0]), 0.05));
    CHECK(f.rate_b > prev);
    prev = f.rate_b;
  }
}

TEST_CASE("ionization ladder and the continuum threshold", "[spectra]") {
  const GridSpec g{1, 256, 102.4, 1};
  const AtomModel atom{2, 1.0, 1.0, KineticKind::NonRelativistic, 2, 1};
  const IonizationLadder lad = ionization_ladder(atom, g);
  REQUIRE(lad.energies.size() == 2);
  REQUIRE(lad.differences.size() == 1);
  CHECK(lad.energies[1] < lad.energies[0]);
  CHECK(lad.differences[0] < 0.0);

  const WeylProbe w = weyl_probe(atom, g, 4.0, 3);
  REQUIRE(w.energies.size() == 4);
  CHECK_THAT(w.threshold, WithinAbs(lad.energies[0], 1e-8));
  for (std::size_t j = 0; j < w.energies.size(); ++j) {
    CHECK(w.energies[j] > lad.energies[1]);
    CHECK(w.energies[j] >= w.threshold);
    if (j > 0) CHECK(std::abs(w.energies[j] - w.threshold) < std::abs(w.energies[j - 1] - w.threshold));
  }
  CHECK_THROWS_AS(ionization_ladder(AtomModel{3, 1.0, 1.0, KineticKind::NonRelativistic, 1, 1}, g), UnsupportedError);
}
