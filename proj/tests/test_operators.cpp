#include <catch_amalgamated.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "vdwlab/errors.hpp"
#include "vdwlab/operators.hpp"
#include "vdwlab/spectra.hpp"

using namespace vdwlab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using boost::math::quadrature::gauss_kronrod;

namespace {

WaveFunction gaussian3(const GridSpec& g, double sigma) {
  return WaveFunction::sample(g, [sigma](std::span<const double> x) {
    return cplx(std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / (2 * sigma * sigma)), 0.0);
  });
}

// Dense 1D Hamiltonian: kinetic block from the plane-wave sum, softened Coulomb on the diagonal.
Eigen::MatrixXd dense_1d(KineticKind kind, int n, double L, double Ze2, double a) {
  const double h = L / n;
  std::vector<double> sym(n);
  for (int k = 0; k < n; ++k) {
    const int m = k < n / 2 ? k : k - n;
    const double q = 2 * M_PI * m / L;
    sym[k] = kind == KineticKind::NonRelativistic ? 0.5 * q * q : std::sqrt(q * q + 1) - 1;
  }
  std::vector<double> row(n);
  for (int d = 0; d < n; ++d) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += sym[k] * std::cos(2 * M_PI * k * d / n);
    row[d] = s / n;
  }
  Eigen::MatrixXd H(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) H(i, j) = row[(i - j + n) % n];
  for (int i = 0; i < n; ++i) {
    const double x = (i < n / 2 ? i : i - n) * h;
    H(i, i) -= Ze2 / std::sqrt(x * x + a * a);
  }
  return H;
}

}  // namespace

TEST_CASE("kinetic symbols", "[operators]") {
  CHECK(kinetic_symbol(KineticKind::PseudoRelativistic, 0.0) == 0.0);
  CHECK_THAT(kinetic_symbol(KineticKind::PseudoRelativistic, 1.0), WithinRel(std::sqrt(2.0) - 1.0, 1e-15));
  CHECK(kinetic_symbol(KineticKind::NonRelativistic, 4.0) == 2.0);
  for (double k2 : {1e-6, 0.3, 1.0, 7.0, 1e4})
    CHECK(kinetic_symbol(KineticKind::PseudoRelativistic, k2) <= kinetic_symbol(KineticKind::NonRelativistic, k2));
  CHECK(parse_kinetic(to_string(KineticKind::PseudoRelativistic)) == KineticKind::PseudoRelativistic);
  CHECK_THROWS_AS(parse_kinetic("bogus"), DomainError);
}

TEST_CASE("relativistic form is bounded by the nonrelativistic one", "[operators]") {
  const GridSpec g{1, 128, 20.0, 1};
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 5; ++t) {
    std::vector<cplx> v(g.size());
    for (auto& z : v) z = {nd(rng), nd(rng)};
    const WaveFunction psi(g, std::move(v));
    const double pr = kinetic_form(KineticKind::PseudoRelativistic, psi);
    const double nr = kinetic_form(KineticKind::NonRelativistic, psi);
    CHECK(pr >= 0.0);
    CHECK(pr <= nr);
  }
}

TEST_CASE("kernel quadrature matches the momentum form", "[operators]") {
  const GridSpec g{3, 64, 12.0, 1};
  const WaveFunction psi = gaussian3(g, 1.0);
  const double fft = kinetic_form(KineticKind::PseudoRelativistic, psi);
  const double ker = kinetic_form_kernel(psi);
  CHECK_THAT(ker, WithinRel(fft, 1e-3));

  // the truncation radius matters only through the kernel tail
  const double k4 = kinetic_form_kernel(psi, {4.0});
  const double k8 = kinetic_form_kernel(psi, {8.0});
  CHECK(std::abs(k4 - k8) < 10.0 * std::exp(-4.0) * psi.norm() * psi.norm());
  CHECK(kernel_tail_mass(4.0) > kernel_tail_mass(8.0));
  CHECK_THROWS_AS(kinetic_form_kernel(WaveFunction(GridSpec{1, 8, 1.0, 1}, std::vector<cplx>(8))), UnsupportedError);
}

TEST_CASE("Hamiltonian agrees with a dense matrix", "[operators]") {
  const int n = 256;
  const double L = 40.0;
  for (auto kind : {KineticKind::NonRelativistic, KineticKind::PseudoRelativistic}) {
    const AtomModel atom{1, 0.8, 1.0, kind, 1, 1};
    const GridSpec g{1, n, L, 1};
    const Hamiltonian H = build_hamiltonian(atom, g);
    const Eigen::MatrixXd D = dense_1d(kind, n, L, 0.8, 1.0);

    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    std::vector<cplx> v(n), out(n);
    for (auto& z : v) z = {nd(rng), nd(rng)};
    H.apply(v, out);
    Eigen::VectorXcd ev(n);
    for (int i = 0; i < n; ++i) ev[i] = v[i];
    const Eigen::VectorXcd ref = D.cast<cplx>() * ev;
    double err = 0.0;
    for (int i = 0; i < n; ++i) err = std::max(err, std::abs(ref[i] - out[i]));
    CHECK(err < 1e-10 * ref.cwiseAbs().maxCoeff());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D, Eigen::EigenvaluesOnly);
    const SpectrumSlice s = solve_sector(atom, g, Sector::Full, 3);
    for (int k = 0; k < 3; ++k) CHECK_THAT(s.eigenvalues[k], WithinAbs(es.eigenvalues()[k], 1e-8));
  }
}

TEST_CASE("relativistic ground state lies below the nonrelativistic one", "[operators]") {
  const GridSpec g{1, 256, 40.0, 1};
  AtomModel atom{1, 1.0, 1.0, KineticKind::NonRelativistic, 1, 1};
  const double nr = solve_sector(atom, g, Sector::Full, 1).eigenvalues[0];
  atom.kinetic = KineticKind::PseudoRelativistic;
  const double pr = solve_sector(atom, g, Sector::Full, 1).eigenvalues[0];
  CHECK(pr <= nr);
}

TEST_CASE("atom model validation", "[operators]") {
  CHECK_THROWS_AS((AtomModel{0, 1.0, 1.0, KineticKind::NonRelativistic, 1, 1}.validate()), ModelError);
  CHECK_THROWS_AS((AtomModel{1, -1.0, 1.0, KineticKind::NonRelativistic, 1, 1}.validate()), ModelError);
  CHECK_THROWS_AS((AtomModel{1, 1.0, 1.0, KineticKind::NonRelativistic, 2, 1}.validate()), ModelError);
  CHECK_THROWS_AS((AtomModel{1, 1.0, 0.1, KineticKind::PseudoRelativistic, 1, 3}.validate()), ModelError);
  CHECK_NOTHROW((AtomModel{1, 0.5, 0.1, KineticKind::PseudoRelativistic, 1, 3}.validate()));
  CHECK_THROWS_AS(build_hamiltonian(AtomModel{1, 1.0, 0.0, KineticKind::NonRelativistic, 1, 1}, GridSpec{1, 64, 10.0, 1}),
                  ModelError);
}

TEST_CASE("cutoff family", "[operators]") {
  const CutoffFamily cut(16.0);
  CHECK(cut.u(0.0) == 1.0);
  CHECK(cut.u(2.0) == 1.0);
  CHECK(cut.v(2.0) == 0.0);
  CHECK(cut.u(4.0) == 0.0);
  CHECK(cut.v(4.5) == 1.0);
  for (double r = 0.0; r < 6.0; r += 0.037)
    CHECK_THAT(cut.u(r) * cut.u(r) + cut.v(r) * cut.v(r), WithinAbs(1.0, 1e-15));
  CHECK(smooth_step(-1.0) == 0.0);
  CHECK(smooth_step(2.0) == 1.0);
  CHECK_THAT(smooth_step(0.5), WithinAbs(0.5, 1e-15));
  CHECK(in_transition_shell(2.0, 16.0));
  CHECK_FALSE(in_transition_shell(1.0, 16.0));
}

TEST_CASE("localization error vanishes away from the transition shell", "[operators]") {
  const GridSpec g{3, 32, 16.0, 1};
  // support inside rho/8 = 2
  const WaveFunction inside = WaveFunction::sample(g, [](std::span<const double> x) {
    const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    return cplx(r < 1.5 ? std::pow(std::cos(M_PI * r / 3.0), 4) : 0.0, 0.0);
  });
  const CutoffFamily cut(16.0);
  CHECK(std::abs(localization_error_1(inside, cut)) < 1e-12 * kinetic_form(KineticKind::PseudoRelativistic, inside));
}

TEST_CASE("localization error against a radial quadrature", "[operators]") {
  const double rho = 16.0, c0 = 3 * rho / 16, w = rho / 32;
  const CutoffFamily cut(rho);
  auto hr = [&](double r) { const double t = (r - c0) / w; return std::exp(-t * t / 2); };
  auto th = [&](double r) { return std::atan2(cut.v(r), cut.u(r)); };
  const double R = c0 + 12 * w;
  auto inner_int = [&](double r1) {
    auto f = [&](double r2) {
      const double a = std::abs(r1 - r2), b = r1 + r2;
      const double s = std::sin(0.5 * (th(r1) - th(r2)));
      const double kk = (a < 1e-8 ? 0.0 : std::cyl_bessel_k(1.0, a) / a) - std::cyl_bessel_k(1.0, b) / b;
      return r1 * r2 * 4 * s * s * hr(r1) * hr(r2) * kk;
    };
    return gauss_kronrod<double, 61>::integrate(f, 0, r1, 15, 1e-13) +
           gauss_kronrod<double, 61>::integrate(f, r1, R, 15, 1e-13);
  };
  const double oracle = 2 * gauss_kronrod<double, 61>::integrate(inner_int, std::max(0.0, c0 - 12 * w), R, 15, 1e-12);

  const GridSpec g{3, 128, 20.0, 1};
  const WaveFunction psi = WaveFunction::sample(g, [&](std::span<const double> x) {
    return cplx(hr(std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])), 0.0);
  });
  CHECK_THAT(localization_error_1(psi, cut), WithinRel(oracle, 1e-6));
}

TEST_CASE("partition of unity", "[operators]") {
  const PartitionOfUnity p = partition_build({{0, 0, 0}, {10, 0, 0}}, 16.0);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ud(-6.0, 16.0);
  std::vector<std::vector<std::array<double, 3>>> samples;
  for (int s = 0; s < 200; ++s) {
    std::vector<std::array<double, 3>> c(3);
    for (auto& z : c) z = {ud(rng), 0.3 * ud(rng), 0.3 * ud(rng)};
    samples.push_back(c);
  }
  CHECK(partition_check(p, samples) < 1e-14);
  const std::array<double, 3> at1{0.5, 0, 0};
  const auto w = p.weights(at1);
  CHECK(w[1] == 1.0);
  CHECK(w[0] == 0.0);
  CHECK_THROWS_AS(partition_build({{0, 0, 0}, {7, 0, 0}}, 16.0), GeometryError);
  CHECK_THROWS_AS(partition_build({{0, 0, 0}}, 16.0), GeometryError);
}
