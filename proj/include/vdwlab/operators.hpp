#pragma once

#include <array>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "vdwlab/lattice.hpp"

namespace vdwlab {

enum class KineticKind { PseudoRelativistic, NonRelativistic };

std::string to_string(KineticKind kind);
KineticKind parse_kinetic(const std::string& name);

/// Momentum-space symbol: sqrt(k^2 + 1) - 1 or k^2 / 2 (units hbar = m = c = 1).
double kinetic_symbol(KineticKind kind, double k2);

/// Largest Z * e^2 for which the 3D pseudo-relativistic Coulomb operator is
/// bounded below.
inline constexpr double kCriticalCoupling = 2.0 / std::numbers::pi;

/// One model atom: nucleus of charge Z at the origin, n_electrons electrons,
/// Coulomb kernel softened to 1 / sqrt(r^2 + softening^2).
struct AtomModel {
  int Z = 1;
  double e2 = 1.0;
  double softening = 1.0;
  KineticKind kinetic = KineticKind::NonRelativistic;
  int n_electrons = 1;
  int dim = 1;

  /// Throws ModelError on: non-positive parameters, n_electrons > Z, or a
  /// supercritical 3D pseudo-relativistic coupling (Z e^2 > 2/pi).
  void validate() const;
};

/// Default softening length per dimension.
double default_softening(int dim);

WaveFunction apply_kinetic(KineticKind kind, const WaveFunction& psi);

/// <psi, T psi> evaluated diagonally in momentum space.
double kinetic_form(KineticKind kind, const WaveFunction& psi);

/// Per-lattice-point kinetic symbol (sum over particles) in FFT order.
std::vector<double> kinetic_diagonal(KineticKind kind, const GridSpec& grid);

struct Nucleus {
  std::array<double, 3> position{0.0, 0.0, 0.0};
  int charge = 1;
};

/// Softened Coulomb kernel 1 / sqrt(r^2 + a^2).
inline double soft_coulomb(double r2, double a) { return 1.0 / std::sqrt(r2 + a * a); }

/// Many-electron Hamiltonian T + V on a lattice; V holds electron-nucleus
/// attraction, electron-electron repulsion and the constant nucleus-nucleus
/// repulsion, all with the same softened kernel. Immutable after
/// construction; apply() is safe to call concurrently.
class Hamiltonian {
 public:
  Hamiltonian(GridSpec grid, KineticKind kinetic, double e2, double softening,
              std::vector<Nucleus> nuclei);

  const GridSpec& grid() const { return grid_; }
  KineticKind kinetic() const { return kinetic_; }
  double e2() const { return e2_; }
  double softening() const { return softening_; }
  const std::vector<Nucleus>& nuclei() const { return nuclei_; }
  std::span<const double> potential() const { return potential_; }
  std::span<const double> kinetic_diagonal() const { return symbol_; }
  double nuclear_repulsion() const { return nuclear_repulsion_; }

  void apply(std::span<const cplx> in, std::span<cplx> out) const;
  WaveFunction apply(const WaveFunction& psi) const;
  double expectation(const WaveFunction& psi) const;

 private:
  GridSpec grid_;
  KineticKind kinetic_;
  double e2_;
  double softening_;
  std::vector<Nucleus> nuclei_;
  std::vector<double> symbol_;
  std::vector<double> potential_;
  double nuclear_repulsion_ = 0.0;
};

inline constexpr std::size_t kMaxGridPoints = std::size_t{1} << 25;

/// Hamiltonian of `atom` with its nucleus at the origin. The grid carries
/// one particle per electron.
Hamiltonian build_hamiltonian(const AtomModel& atom, const GridSpec& grid);

// ---------------------------------------------------------------------------
// Kernel representation of the pseudo-relativistic quadratic form.

struct KernelQuadratureOptions {
  double r_cut = 40.0;
};

/// (1/4pi^2) * int int K2(|x-y|)/|x-y|^2 |psi(x) - psi(y)|^2 dx dy over
/// |x - y| <= r_cut, by lattice quadrature of the non-periodic
/// autocorrelation of psi. 3D single-particle grids only.
double kinetic_form_kernel(const WaveFunction& psi,
                           const KernelQuadratureOptions& opt = {});

/// Integral of the 3D kernel K2(r) / (4 pi^2 r^2) over r > r0 (used for the
/// truncation bound).
double kernel_tail_mass(double r0);

// ---------------------------------------------------------------------------
// Cutoffs, partition of unity, localization error.

/// C-infinity step: 0 for t <= 0, 1 for t >= 1, built from exp(-1/t).
double smooth_step(double t);

/// Radial cutoff pair u, v with u^2 + v^2 = 1, u = 1 on |z| <= rho/8 and
/// u = 0 on |z| >= rho/4. u = cos(theta), v = sin(theta) with theta rising
/// smoothly from 0 to pi/2 across the transition shell.
class CutoffFamily {
 public:
  explicit CutoffFamily(double rho);

  double rho() const { return rho_; }
  double inner_radius() const { return rho_ / 8.0; }
  double outer_radius() const { return rho_ / 4.0; }
  double u(double r) const;
  double v(double r) const;

 private:
  double rho_;
};

/// Indicator of the shell 3 rho/32 < |z| <= 9 rho/32.
bool in_transition_shell(double r, double rho);

/// <u h, T u h> + <v h, T v h> - <h, T h> with the cutoffs centred at the
/// origin of a single-particle grid (1D or 3D).
double localization_error_1(const WaveFunction& h, const CutoffFamily& cut,
                            KineticKind kind = KineticKind::PseudoRelativistic);

/// ||chi_rho h||^2 for the transition-shell indicator.
double shell_norm2(const WaveFunction& h, double rho);

/// Electron-to-cluster assignment: label 0 (far), 1 or 2 (nucleus index).
using ClusterLabels = std::vector<int>;

/// IMS-type partition of unity J_beta = prod_i w_{beta(i)}(x_i) around two
/// nuclei, with w_k = u(|z - X_k|) for k = 1, 2 and w_0 = v(|z-X_1|) v(|z-X_2|).
class PartitionOfUnity {
 public:
  PartitionOfUnity(std::array<double, 3> x1, std::array<double, 3> x2, double rho);

  const std::array<double, 3>& nucleus(int k) const { return k == 1 ? x1_ : x2_; }
  double rho() const { return cut_.rho(); }

  /// Single-electron weights (w0, w1, w2) at point z.
  std::array<double, 3> weights(const std::array<double, 3>& z) const;

  /// J_beta for every decomposition of the given configuration.
  std::map<ClusterLabels, double> members(
      std::span<const std::array<double, 3>> config) const;

  double cutoff(const ClusterLabels& beta,
                std::span<const std::array<double, 3>> config) const;

 private:
  std::array<double, 3> x1_, x2_;
  CutoffFamily cut_;
};

/// Throws GeometryError unless the nuclei are separated by more than
/// 2 * rho / 4 (disjoint supports of w_1 and w_2).
PartitionOfUnity partition_build(const std::vector<std::array<double, 3>>& nuclei,
                                 double rho);

/// max over samples of |sum_beta J_beta^2 - 1|.
double partition_check(const PartitionOfUnity& p,
                       const std::vector<std::vector<std::array<double, 3>>>& samples);

}  // namespace vdwlab
