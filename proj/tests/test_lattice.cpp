#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <random>

#include "vdwlab/errors.hpp"
#include "vdwlab/lattice.hpp"

using namespace vdwlab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

WaveFunction random_state(const GridSpec& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<cplx> v(g.size());
  for (auto& z : v) z = {nd(rng), nd(rng)};
  return WaveFunction(g, std::move(v));
}

}  // namespace

TEST_CASE("grid index convention", "[lattice]") {
  const GridSpec g{1, 8, 4.0, 1};
  CHECK(g.spacing() == 0.5);
  CHECK(g.coordinate(0) == 0.0);
  CHECK(g.coordinate(3) == 1.5);
  CHECK(g.coordinate(4) == -2.0);
  CHECK(g.coordinate(7) == -0.5);
  CHECK_THAT(g.wavenumber(1), WithinRel(2.0 * M_PI / 4.0, 1e-15));
  const GridSpec g3{3, 4, 2.0, 2};
  CHECK(g3.axes() == 6);
  CHECK(g3.size() == 4096u);
  std::vector<int> idx(6);
  g3.unflatten(1234, idx);
  CHECK(g3.flatten(idx) == 1234u);
  CHECK(g3.single_particle().particles == 1);
}

TEST_CASE("grid validation", "[lattice]") {
  CHECK_THROWS_AS((GridSpec{2, 8, 1.0, 1}.validate()), ShapeError);
  CHECK_THROWS_AS((GridSpec{1, 0, 1.0, 1}.validate()), ShapeError);
  CHECK_THROWS_AS((GridSpec{1, 8, -1.0, 1}.validate()), ShapeError);
  CHECK_THROWS_AS((GridSpec{1, 8, 1.0, 0}.validate()), ShapeError);
  CHECK_NOTHROW((GridSpec{3, 8, 1.0, 1}.validate()));
}

TEST_CASE("inner products", "[lattice]") {
  const GridSpec g{1, 64, 8.0, 1};
  const WaveFunction phi = random_state(g, 1).normalized();
  CHECK_THAT(inner(phi, phi).real(), WithinAbs(1.0, 1e-14));
  CHECK_THAT(phi.norm(), WithinAbs(1.0, 1e-14));

  const WaveFunction a = random_state(g, 2), b = random_state(g, 3);
  const cplx ab = inner(a, b), ba = inner(b, a);
  CHECK_THAT(ab.real(), WithinAbs(ba.real(), 1e-14 * std::abs(ab)));
  CHECK_THAT(ab.imag(), WithinAbs(-ba.imag(), 1e-14 * std::abs(ab)));

  CHECK(inner(point_indicator(g, 3), point_indicator(g, 7)) == cplx(0.0, 0.0));
  CHECK_THAT(inner(point_indicator(g, 3), point_indicator(g, 3)).real(), WithinRel(g.spacing(), 1e-14));
}

TEST_CASE("discrete Fourier transform", "[lattice]") {
  const GridSpec g{3, 8, 5.0, 1};
  const std::vector<int> k{1, 7, 3};
  const WaveFunction pw = plane_wave(g, k);
  const WaveFunction m = to_momentum(pw);
  std::vector<int> idx(3);
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.unflatten(i, idx);
    const bool hit = idx[0] == 1 && idx[1] == 7 && idx[2] == 3;
    CHECK_THAT(std::abs(m.values()[i]), WithinAbs(hit ? std::abs(m.values()[i]) : 0.0, 1e-12));
    if (hit) CHECK(std::abs(m.values()[i]) > 0.1);
  }

  const WaveFunction psi = random_state(g, 4);
  const WaveFunction back = from_momentum(to_momentum(psi));
  double err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) err = std::max(err, std::abs(back.values()[i] - psi.values()[i]));
  CHECK(err < 1e-13);
  CHECK_THAT(to_momentum(psi).norm(), WithinRel(psi.norm(), 1e-13));
}

TEST_CASE("dump round trip", "[lattice]") {
  const GridSpec g{1, 32, 6.0, 2};
  const WaveFunction psi = random_state(g, 5);
  const auto path = std::filesystem::temp_directory_path() / "vdwlab_test_dump.bin";
  write_dump(psi, path);
  const WaveFunction q = read_dump(path);
  CHECK(q.grid() == g);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(q.values()[i] == psi.values()[i]);
  std::filesystem::remove(path);
}

TEST_CASE("arithmetic on states", "[lattice]") {
  const GridSpec g{1, 16, 4.0, 1};
  const WaveFunction a = random_state(g, 6), b = random_state(g, 7);
  const WaveFunction s = (a + b) - b;
  for (std::size_t i = 0; i < g.size(); ++i) CHECK_THAT(std::abs(s.values()[i] - a.values()[i]), WithinAbs(0.0, 1e-14));
  CHECK_THROWS_AS(a + WaveFunction(GridSpec{1, 8, 4.0, 1}, std::vector<cplx>(8)), ShapeError);
}
