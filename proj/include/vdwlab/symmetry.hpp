#pragma once

// Exact lattice symmetries. Parities reflect the indices of one particle,
// j -> (n - j) mod n, which keeps index 0 fixed; exchange swaps the axes of
// particles 1 and 2. Rotations are restricted to quarter turns about z,
// the only rotations that map the lattice onto itself.

#include <span>
#include <string>

#include "vdwlab/lattice.hpp"

namespace vdwlab {

enum class SymmetryKind { ParityC1, ParityC2, ParityC1C2, ParityAll, Exchange12, RotationZ };

struct SymmetryOp {
  SymmetryKind kind = SymmetryKind::ParityC1;
  double angle = 0.0;  // RotationZ only, radians

  /// Expected eigenvalue on the sector it labels, where it applies.
  int signature = 1;
};

std::string to_string(SymmetryKind kind);

/// Throws UnsupportedError / ShapeError when the grid cannot carry `op`.
void check_compatible(const SymmetryOp& op, const GridSpec& grid);

void apply_symmetry(const SymmetryOp& op, const GridSpec& grid,
                    std::span<const cplx> in, std::span<cplx> out);
WaveFunction apply_symmetry(const SymmetryOp& op, const WaveFunction& psi);

/// (psi + sign * op psi) / 2.
WaveFunction sector_project(const WaveFunction& psi, const SymmetryOp& op, int sign);
void sector_project(const SymmetryOp& op, int sign, const GridSpec& grid,
                    std::span<cplx> data);

/// Symmetry sectors used by the eigensolver.
enum class Sector { Full, Even, Odd, Symmetric, Antisymmetric };

std::string to_string(Sector s);
Sector parse_sector(const std::string& name);

/// Validates that `sector` is meaningful for `particles` particles.
void check_sector(Sector sector, int particles);

/// In-place projection onto `sector` (no-op for Full).
void project_sector(Sector sector, const GridSpec& grid, std::span<cplx> data);

}  // namespace vdwlab
