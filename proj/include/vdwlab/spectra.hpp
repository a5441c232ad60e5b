#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "vdwlab/lattice.hpp"
#include "vdwlab/operators.hpp"
#include "vdwlab/symmetry.hpp"

namespace vdwlab {

inline constexpr std::uint64_t kDefaultSeed = 20240917;

enum class EigenMethod { Davidson, Lanczos };

struct SolverOptions {
  EigenMethod method = EigenMethod::Davidson;
  double tolerance = 1e-10;   // on ||(H - lambda) v|| with ||v|| = 1
  int basis_size = 0;         // 0: chosen from the number of wanted states
  int max_restarts = 400;
  double degeneracy_tol = 1e-7;
  std::uint64_t seed = kDefaultSeed;
};

struct Eigenpairs {
  std::vector<double> values;
  std::vector<WaveFunction> vectors;
  std::vector<double> residuals;
  int matvecs = 0;
};

/// Lowest `n_states` eigenpairs of H restricted to `sector`. Both methods
/// build an orthonormal search space from a seeded random start with full
/// reorthogonalization and thick restarts: Lanczos extends it by H v,
/// Davidson by residuals preconditioned with (T - theta)^-1 applied in
/// momentum space. Converged vectors are locked and the search is repeated
/// from fresh seeded start vectors in their orthogonal complement until no
/// eigenvalue below the current n-th one (degenerate copies included) turns
/// up. Residuals are recomputed with an explicit application of H.
/// Throws ConvergenceError.
Eigenpairs lanczos_lowest(const Hamiltonian& H, Sector sector, int n_states,
                          const SolverOptions& opt = {});

struct SpectrumSlice {
  AtomModel atom;
  GridSpec grid;  // configuration grid (one particle per electron)
  Sector sector = Sector::Full;
  std::vector<double> eigenvalues;  // nondecreasing
  std::vector<WaveFunction> eigenvectors;
  std::vector<double> residuals;
  double gap = 0.0;
  std::uint64_t seed = kDefaultSeed;
};

/// grid describes one axis geometry; the configuration grid gets one
/// particle per electron.
SpectrumSlice solve_sector(const AtomModel& atom, const GridSpec& grid, Sector sector,
                           int n_states, const SolverOptions& opt = {});

struct DecayFit {
  std::vector<double> radii;
  std::vector<double> log_amplitudes;
  double rate_b = 0.0;
  double fit_residual = 0.0;  // rms deviation from the line, in log units
};

struct DecayFitOptions {
  double window_lo = 0.2;  // in units of half the box length
  double window_hi = 0.6;
  double noise_floor = 1e-10;  // relative to the peak amplitude
  double tail_start = 1e-5;    // samples above this relative amplitude are skipped
  int min_samples = 8;
};

/// Straight-line fit of log max|phi| against radius over the window,
/// restricted to the tail where the amplitude lies between noise_floor and
/// tail_start times the peak. Radii
/// are binned at the lattice spacing; each bin contributes its largest
/// amplitude at that point's own radius. Single-particle states only.
DecayFit fit_decay(const WaveFunction& phi, const DecayFitOptions& opt = {});

struct IonizationLadder {
  std::vector<double> energies;     // E_k, k = 1..n
  std::vector<double> differences;  // E_k - E_{k-1}, k = 2..n
  std::vector<double> residuals;
};

/// Ground energies with k = 1..Z electrons around the nucleus of `atom`.
/// Two-electron states are taken in the exchange-symmetric sector.
IonizationLadder ionization_ladder(const AtomModel& atom, const GridSpec& grid,
                                   const SolverOptions& opt = {});

struct WeylProbe {
  std::vector<double> separations;
  std::vector<double> energies;
  double threshold = 0.0;  // E_{k-1}
};

/// Energy of the symmetrized state phi_ion(x1) g(x2 - s) + (1 <-> 2), with
/// phi_ion the one-electron ground state and g a Gaussian packet of width
/// sqrt(s)/4, for s = s0 * 2^j, j = 0..doublings. 1D two-electron atoms.
WeylProbe weyl_probe(const AtomModel& atom, const GridSpec& grid, double s0, int doublings,
                     const SolverOptions& opt = {});

}  // namespace vdwlab
