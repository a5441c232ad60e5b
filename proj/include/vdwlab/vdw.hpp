#pragma once

// Dispersion coefficients by spectral sums over tensor products of atomic
// spectra. Each atom contributes its kept energies and the matrices of
// coordinate monomials x^a y^b z^c between kept states; the multipole terms
// f_n act on the product space through their polynomial form. 1D atoms
// carry their coordinate as z.

#include <array>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "vdwlab/lattice.hpp"
#include "vdwlab/multipole.hpp"

namespace vdwlab {

using Exponents3 = std::array<int, 3>;

class AtomSpectrum {
 public:
  /// Energies ascending; moment matrices keyed by exponent triple. Missing
  /// moments are zero, the (0,0,0) moment is the identity.
  AtomSpectrum(std::vector<double> energies, std::map<Exponents3, Eigen::MatrixXcd> moments);

  int size() const { return static_cast<int>(energies_.size()); }
  const std::vector<double>& energies() const { return energies_; }
  Eigen::MatrixXcd moment(const Exponents3& e) const;
  bool has_moment(const Exponents3& e) const { return moments_.count(e) > 0; }
  const std::map<Exponents3, Eigen::MatrixXcd>& moments() const { return moments_; }

  AtomSpectrum truncated(int n_keep) const;

  /// Largest deviation from Hermiticity over all stored moments.
  double hermiticity_defect() const;

 private:
  std::vector<double> energies_;
  std::map<Exponents3, Eigen::MatrixXcd> moments_;
};

/// Ground state 0 and one excited state at `gap`; <0|z|1> = dipole.
AtomSpectrum two_level_atom(double gap, double dipole);

/// Ground g, dipole partner p at gap_p with <g|z|p> = dipole, and q at
/// gap_q with <g|z^2|q> = quad and <g|z^2|g> = quad_ground.
AtomSpectrum three_level_atom(double gap_p, double dipole, double gap_q, double quad,
                              double quad_ground);

/// Isotropic 3D harmonic oscillator of frequency omega (unit mass): the
/// lowest n_keep product states |nx ny nz>, ordered by shell, with exact
/// moments of every monomial up to max_degree. Complete shells hold
/// 1, 4, 10, 20, 35, ... states.
AtomSpectrum oscillator_atom(double omega, int n_keep, int max_degree = 5);

/// Moments of all monomials of total degree <= max_degree between the given
/// single-particle states (1D grids: powers of the coordinate only, filed
/// under (0,0,c)). Uses the parallel weighted Gram kernel.
AtomSpectrum atom_spectrum_from_states(const std::vector<double>& energies,
                                       const std::vector<WaveFunction>& states, int max_degree);

/// Tensor product of 2 or 3 atomic spectra. Product states are indexed
/// row-major with the last atom fastest; state 0 is the product ground state.
class ProductBasis {
 public:
  explicit ProductBasis(std::vector<AtomSpectrum> atoms);

  int atoms() const { return static_cast<int>(atoms_.size()); }
  const AtomSpectrum& atom(int k) const { return atoms_[static_cast<std::size_t>(k)]; }
  Eigen::Index size() const { return size_; }
  /// Separable energies E_m + E_n (+ E_p).
  const Eigen::VectorXd& energies() const { return energies_; }
  /// Sum of the atomic ground energies.
  double mu() const { return mu_; }

  /// sum_terms c * (x_k^a (x) x_l^b) v for a polynomial in the coordinates
  /// of atoms k (first three variables) and l (last three).
  Eigen::VectorXcd apply_pair(int k, int l, const Poly6& poly, const Eigen::VectorXcd& v) const;

  /// f_n^{(k,l)} applied to v, with the pair direction pointing from k to l.
  Eigen::VectorXcd apply_multipole(int k, int l, int n, const Vec3& direction, double e2,
                                   const Eigen::VectorXcd& v) const;

  Eigen::VectorXcd ground() const;

  /// Throws DegeneracyError unless every atomic ground state is isolated.
  void require_nondegenerate_ground(double tol = 1e-8) const;

 private:
  std::vector<AtomSpectrum> atoms_;
  std::vector<Eigen::Index> dims_, strides_;
  Eigen::Index size_ = 1;
  Eigen::VectorXd energies_;
  double mu_ = 0.0;
};

struct ResolventResult {
  Eigen::VectorXcd x;
  double residual = 0.0;  // ||(H - mu) x - source|| / ||source||
};

/// (H - mu)^-1 on the orthogonal complement of the mu-eigenspace. Throws
/// OrthogonalityError if the source has a kernel component above
/// kernel_tol * ||source||.
ResolventResult resolvent_apply(const ProductBasis& basis, double mu,
                                const Eigen::VectorXcd& source, double kernel_tol = 1e-10);

double compute_a1(const ProductBasis& basis, const Vec3& direction, double e2);
double compute_a2(const ProductBasis& basis, const Vec3& direction, double e2);

/// Three atoms at `positions`. Returns a3 such that the third-order
/// dipole-dipole energy equals a3 / d^9 with d = (|D01| |D12| |D20|)^(1/3),
/// the geometric mean of the side lengths. pair_scale multiplies the
/// couplings of pairs (0,1), (1,2), (2,0).
double compute_a3(const ProductBasis& basis, const std::array<Vec3, 3>& positions, double e2,
                  const std::array<double, 3>& pair_scale = {1.0, 1.0, 1.0});

double triangle_scale(const std::array<Vec3, 3>& positions);

struct VdwReport {
  double a1 = 0.0;
  double a2 = 0.0;
  double a3 = 0.0;
  bool three_body = false;
  double d_scale = 0.0;  // d of the a3 term
  int n_keep = 0;
  std::vector<std::pair<int, double>> truncation_curve;  // (n_keep, a1)
  std::vector<double> residuals;
  Vec3 direction{0.0, 0.0, 1.0};
  double e2 = 1.0;
};

/// a1 for each n_keep (values above the available states are clamped).
std::vector<std::pair<int, double>> truncation_curve(const std::vector<AtomSpectrum>& atoms,
                                                     const std::vector<int>& n_keep,
                                                     const Vec3& direction, double e2);

/// -a1/D^6 - a2/D^8, plus a3/d^9 for three-body reports.
double expansion_eval(const VdwReport& report, double D);

/// Textbook Rayleigh-Schroedinger correction of the given order (2 or 3)
/// for H0 + V with dense matrices, by linear solves on the complement of
/// the unperturbed ground state.
double rspt_oracle(int order, const Eigen::MatrixXcd& H0, const Eigen::MatrixXcd& V);

struct OrthogonalityEntry {
  std::string name;
  std::complex<double> value;
  double scale = 0.0;     // ||a|| ||b||
  double relative = 0.0;  // |value| / scale
};

/// The inner products <phi, f2 phi>, <phi, f3 phi>, <phi2, phi3>,
/// <phi2, f3 phi>, <phi2, f5 phi>, <phi3, f2 phi>, <phi3, f4 phi>,
/// <phi2, f2 phi2>, <phi2, f4 phi>, with phi2 = R f2 phi, phi3 = R f3 phi.
std::vector<OrthogonalityEntry> orthogonality_battery(const ProductBasis& basis,
                                                      const Vec3& direction, double e2);

}  // namespace vdwlab
