#include "vdwlab/symmetry.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "vdwlab/errors.hpp"

namespace vdwlab {

std::string to_string(SymmetryKind kind) {
  switch (kind) {
    case SymmetryKind::ParityC1: return "parity-c1";
    case SymmetryKind::ParityC2: return "parity-c2";
    case SymmetryKind::ParityC1C2: return "parity-c1c2";
    case SymmetryKind::ParityAll: return "parity-all";
    case SymmetryKind::Exchange12: return "exchange12";
    case SymmetryKind::RotationZ: return "rotation-z";
  }
  return "unknown";
}

namespace {

int quarter_turns(double angle) {
  const double q = angle / (0.5 * std::numbers::pi);
  const double r = std::round(q);
  if (std::abs(q - r) > 1e-12)
    throw UnsupportedError("rotation angle is not a multiple of pi/2; "
                           "only exact lattice rotations are supported");
  return static_cast<int>(((static_cast<long>(r) % 4) + 4) % 4);
}

}  // namespace

void check_compatible(const SymmetryOp& op, const GridSpec& grid) {
  grid.validate();
  switch (op.kind) {
    case SymmetryKind::ParityC2:
    case SymmetryKind::ParityC1C2:
    case SymmetryKind::Exchange12:
      if (grid.particles < 2)
        throw ShapeError(to_string(op.kind) + " needs at least two particles");
      break;
    case SymmetryKind::RotationZ:
      if (grid.dim != 3) throw UnsupportedError("rotation requires a 3D grid");
      quarter_turns(op.angle);
      break;
    default:
      break;
  }
}

void apply_symmetry(const SymmetryOp& op, const GridSpec& grid, std::span<const cplx> in,
                    std::span<cplx> out) {
  check_compatible(op, grid);
  if (in.size() != grid.size() || out.size() != grid.size())
    throw ShapeError("apply_symmetry: buffer size does not match grid");
  if (in.data() == out.data()) throw DomainError("apply_symmetry: in and out alias");
  const int n = grid.points;
  const int d = grid.dim;
  const int axes = grid.axes();
  std::vector<char> flip(static_cast<std::size_t>(axes), 0);
  auto flip_particle = [&](int p) {
    for (int a = 0; a < d; ++a) flip[static_cast<std::size_t>(p * d + a)] = 1;
  };
  int turns = 0;
  switch (op.kind) {
    case SymmetryKind::ParityC1: flip_particle(0); break;
    case SymmetryKind::ParityC2: flip_particle(1); break;
    case SymmetryKind::ParityC1C2: flip_particle(0); flip_particle(1); break;
    case SymmetryKind::ParityAll:
      for (int p = 0; p < grid.particles; ++p) flip_particle(p);
      break;
    case SymmetryKind::RotationZ: turns = quarter_turns(op.angle); break;
    case SymmetryKind::Exchange12: break;
  }
  const std::size_t total = grid.size();
#pragma omp parallel
  {
    std::vector<int> idx(static_cast<std::size_t>(axes)), src(static_cast<std::size_t>(axes));
#pragma omp for schedule(static)
    for (std::size_t i = 0; i < total; ++i) {
      grid.unflatten(i, idx);
      src = idx;
      if (op.kind == SymmetryKind::Exchange12) {
        for (int a = 0; a < d; ++a) std::swap(src[static_cast<std::size_t>(a)], src[static_cast<std::size_t>(d + a)]);
      } else if (op.kind == SymmetryKind::RotationZ) {
        // (R psi)(x) = psi(R^-1 x); a quarter turn maps (x, y) -> (-y, x).
        for (int p = 0; p < grid.particles; ++p) {
          auto& x = src[static_cast<std::size_t>(p * 3)];
          auto& y = src[static_cast<std::size_t>(p * 3 + 1)];
          for (int t = 0; t < turns; ++t) {
            const int nx = y;
            const int ny = (n - x) % n;
            x = nx;
            y = ny;
          }
        }
      } else {
        for (int a = 0; a < axes; ++a)
          if (flip[static_cast<std::size_t>(a)])
            src[static_cast<std::size_t>(a)] = (n - src[static_cast<std::size_t>(a)]) % n;
      }
      out[i] = in[grid.flatten(src)];
    }
  }
}

WaveFunction apply_symmetry(const SymmetryOp& op, const WaveFunction& psi) {
  std::vector<cplx> out(psi.grid().size());
  apply_symmetry(op, psi.grid(), psi.values(), out);
  return WaveFunction(psi.grid(), std::move(out), psi.space());
}

void sector_project(const SymmetryOp& op, int sign, const GridSpec& grid,
                    std::span<cplx> data) {
  if (sign != 1 && sign != -1) throw DomainError("sector sign must be +1 or -1");
  std::vector<cplx> copy(data.begin(), data.end());
  std::vector<cplx> image(data.size());
  apply_symmetry(op, grid, copy, image);
  const double s = sign;
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = 0.5 * (copy[i] + s * image[i]);
}

WaveFunction sector_project(const WaveFunction& psi, const SymmetryOp& op, int sign) {
  std::vector<cplx> v(psi.values().begin(), psi.values().end());
  sector_project(op, sign, psi.grid(), v);
  return WaveFunction(psi.grid(), std::move(v), psi.space());
}

std::string to_string(Sector s) {
  switch (s) {
    case Sector::Full: return "full";
    case Sector::Even: return "even";
    case Sector::Odd: return "odd";
    case Sector::Symmetric: return "symmetric";
    case Sector::Antisymmetric: return "antisymmetric";
  }
  return "unknown";
}

Sector parse_sector(const std::string& name) {
  if (name == "full") return Sector::Full;
  if (name == "even") return Sector::Even;
  if (name == "odd") return Sector::Odd;
  if (name == "symmetric") return Sector::Symmetric;
  if (name == "antisymmetric") return Sector::Antisymmetric;
  throw DomainError("unknown sector '" + name + "'");
}

void check_sector(Sector sector, int particles) {
  if ((sector == Sector::Symmetric || sector == Sector::Antisymmetric) && particles != 2)
    throw DomainError("exchange sectors are defined for two electrons only");
}

void project_sector(Sector sector, const GridSpec& grid, std::span<cplx> data) {
  check_sector(sector, grid.particles);
  switch (sector) {
    case Sector::Full: return;
    case Sector::Even: sector_project({SymmetryKind::ParityAll}, 1, grid, data); return;
    case Sector::Odd: sector_project({SymmetryKind::ParityAll}, -1, grid, data); return;
    case Sector::Symmetric: sector_project({SymmetryKind::Exchange12}, 1, grid, data); return;
    case Sector::Antisymmetric:
      sector_project({SymmetryKind::Exchange12}, -1, grid, data);
      return;
  }
}

}  // namespace vdwlab
