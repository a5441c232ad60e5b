#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "vdwlab/kernels.hpp"

using namespace vdwlab::kernels;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::vector<cplx> random_cplx(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<cplx> v(n);
  for (auto& z : v) z = {nd(rng), nd(rng)};
  return v;
}

std::vector<double> random_real(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = ud(rng);
  return v;
}

}  // namespace

TEST_CASE("parallel reductions match the serial reference", "[kernels]") {
  for (std::size_t n : {1ul, 17ul, 4096ul, 100003ul}) {
    const auto a = random_cplx(n, 1), b = random_cplx(n, 2);
    const cplx ds = serial::dot(a, b), dp = parallel::dot(a, b);
    CHECK_THAT(std::abs(ds - dp), WithinAbs(0.0, 1e-12 * std::sqrt(double(n))));
    CHECK_THAT(parallel::norm2(a), WithinRel(serial::norm2(a), 1e-13));
  }
}

TEST_CASE("parallel elementwise kernels match the serial reference", "[kernels]") {
  const std::size_t n = 50001;
  const auto x = random_cplx(n, 3);
  const auto w = random_real(n, 4);
  auto ys = random_cplx(n, 5), yp = ys;
  serial::multiply_add(x, w, ys);
  parallel::multiply_add(x, w, yp);
  CHECK(ys == yp);
  auto ms = x, mp = x;
  serial::multiply(ms, w);
  parallel::multiply(mp, w);
  CHECK(ms == mp);
  auto as = random_cplx(n, 6), ap = as;
  serial::axpy({0.3, -1.2}, x, as);
  parallel::axpy({0.3, -1.2}, x, ap);
  CHECK(as == ap);
}

TEST_CASE("weighted lattice sum", "[kernels]") {
  const std::array<int, 3> dims{8, 6, 10};
  const auto f = random_real(480, 7);
  const double h = 0.25;
  auto weight = [](double x, double y, double z) { return std::exp(-(x * x + 2 * y * y + 3 * z * z)); };
  const double s = serial::weighted_lattice_sum(f, dims, h, weight);
  const double p = parallel::weighted_lattice_sum(f, dims, h, weight);
  CHECK_THAT(p, WithinAbs(s, 1e-13 * std::abs(s) + 1e-15));

  // constant field and unit weight: number of points times h^3
  const std::vector<double> one(480, 1.0);
  CHECK_THAT(parallel::weighted_lattice_sum(one, dims, h, [](double, double, double) { return 1.0; }),
             WithinRel(480 * h * h * h, 1e-14));
}

TEST_CASE("weighted Gram matrix", "[kernels]") {
  const std::size_t n = 3001;
  std::vector<std::vector<cplx>> A, B;
  for (int i = 0; i < 3; ++i) A.push_back(random_cplx(n, 10 + i));
  for (int i = 0; i < 4; ++i) B.push_back(random_cplx(n, 20 + i));
  const auto w = random_real(n, 30);
  std::vector<std::span<const cplx>> a(A.begin(), A.end()), b(B.begin(), B.end());
  const Eigen::MatrixXcd s = serial::weighted_gram(a, w, b, 0.5);
  const Eigen::MatrixXcd p = parallel::weighted_gram(a, w, b, 0.5);
  REQUIRE(s.rows() == 3);
  REQUIRE(s.cols() == 4);
  CHECK((s - p).cwiseAbs().maxCoeff() < 1e-11);
  // direct check of one entry
  cplx e = 0.0;
  for (std::size_t i = 0; i < n; ++i) e += std::conj(A[1][i]) * w[i] * B[2][i];
  CHECK_THAT(std::abs(s(1, 2) - 0.5 * e), WithinAbs(0.0, 1e-11));
}
