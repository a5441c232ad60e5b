#pragma once

// Two one-electron 1D atoms with nuclei at -D/2 and +D/2. The asymptotic
// energy is twice the isolated-atom energy on the same lattice; the first-order
// interaction of the product ground state is removed before fitting
// C6/D^6 + C8/D^8.

#include <cstdint>
#include <filesystem>
#include <vector>

#include "vdwlab/lattice.hpp"
#include "vdwlab/operators.hpp"
#include "vdwlab/spectra.hpp"
#include "vdwlab/symmetry.hpp"

namespace vdwlab {

struct DimerModel {
  AtomModel atom;  // Z = 1, one electron, dim = 1
  GridSpec grid;   // one-particle axis geometry
  Sector sector = Sector::Symmetric;
  double margin_decay_lengths = 15.0;

  void validate() const;
};

struct AtomReference {
  double energy = 0.0;
  double decay_rate = 0.0;       // kappa of the ground state tail
  std::vector<double> density;   // |phi|^2 per lattice point, sums to 1
};

/// Isolated atom, nucleus at the origin.
AtomReference atom_reference(const DimerModel& model, const SolverOptions& opt = {});

struct DimerPoint {
  double D = 0.0;
  double energy = 0.0;       // E(D)
  double mu = 0.0;           // 2 E_atom
  double first_order = 0.0;  // <phi_A phi_B, I phi_A phi_B>
  double dispersion = 0.0;   // mu + first_order - E(D)
  double residual = 0.0;
};

/// Lowest energy in the model's sector at separation D. D must be an even
/// multiple of the lattice spacing (GeometryError) and both atoms must stay
/// margin_decay_lengths decay lengths inside the box (DomainError).
DimerPoint dimer_solve(const DimerModel& model, const AtomReference& ref, double D,
                       const SolverOptions& opt = {});

/// First-order interaction of atoms at -D/2 (electron 1) and +D/2 (electron 2).
double first_order_energy(const DimerModel& model, const std::vector<double>& density, double D);

/// n separations between lo and hi, geometric, rounded to even multiples of
/// the spacing, duplicates dropped.
std::vector<double> separation_grid(const GridSpec& grid, double lo, double hi, int n);

struct DimerScan {
  std::vector<DimerPoint> points;
  double atom_energy = 0.0;
  double C6 = 0.0;
  double C8 = 0.0;
  double fit_rms = 0.0;         // relative rms misfit of the two-term fit
  double residual_slope = 0.0;  // log-log slope of dispersion - C6/D^6
  double dispersion_slope = 0.0;
  double raw_slope = 0.0;       // log-log slope of |E(D) - mu|
  std::uint64_t seed = kDefaultSeed;
};

DimerScan scan_and_fit(const DimerModel& model, const std::vector<double>& D_grid,
                       const SolverOptions& opt = {});

/// Refits an existing set of points.
void fit_dispersion(DimerScan& scan);

/// CSV columns D,energy,mu_inf,first_order,dispersion,residual.
void write_dimer_csv(const DimerScan& scan, const std::filesystem::path& path);

/// Least-squares slope of log|y| against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace vdwlab
