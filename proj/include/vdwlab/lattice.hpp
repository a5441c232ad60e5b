#pragma once

// Uniform periodic lattices and complex wavefunctions on them.
//
// Index convention: along every axis, index j carries the coordinate
// h * j for j < n/2 and h * (j - n) otherwise, so the origin sits on index 0
// and reflection j -> (n - j) mod n is an exact involution. A state of
// `particles` particles in `dim` dimensions lives on dim * particles axes,
// ordered particle-major (x1, y1, z1, x2, ...), flattened row-major with the
// last axis fastest.

#include <complex>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

namespace vdwlab {

using cplx = std::complex<double>;

struct GridSpec {
  int dim = 1;
  int points = 64;
  double box_length = 32.0;
  int particles = 1;

  /// Throws ShapeError when the invariants do not hold.
  void validate() const;

  double spacing() const { return box_length / points; }
  int axes() const { return dim * particles; }
  std::size_t size() const;
  /// Volume element h^axes of one lattice cell.
  double cell_volume() const;
  /// Signed coordinate carried by index j along any axis.
  double coordinate(int j) const;
  /// Angular wavenumber carried by index j along any axis.
  double wavenumber(int j) const;
  /// Grid of a single particle with the same axis geometry.
  GridSpec single_particle() const;

  /// Decodes a flat index into per-axis indices (size axes()).
  void unflatten(std::size_t flat, std::span<int> idx) const;
  std::size_t flatten(std::span<const int> idx) const;

  bool operator==(const GridSpec&) const = default;
};

enum class Space { Position, Momentum };

/// Immutable complex state on a lattice. The discrete L2 norm
/// sqrt(sum |psi|^2 h^axes) is computed once at construction.
class WaveFunction {
 public:
  WaveFunction(GridSpec grid, std::vector<cplx> values,
               Space space = Space::Position);

  /// Samples f at every lattice point; f receives the axes() coordinates.
  static WaveFunction sample(const GridSpec& grid,
                             const std::function<cplx(std::span<const double>)>& f);

  const GridSpec& grid() const { return grid_; }
  Space space() const { return space_; }
  std::span<const cplx> values() const { return values_; }
  double norm() const { return norm_; }
  std::vector<cplx> take_values() && { return std::move(values_); }

  WaveFunction scaled(cplx factor) const;
  WaveFunction normalized() const;

 private:
  GridSpec grid_;
  Space space_;
  std::vector<cplx> values_;
  double norm_ = 0.0;
};

/// Discrete L2 inner product, conjugate-linear in the first argument.
cplx inner(const WaveFunction& a, const WaveFunction& b);

WaveFunction operator+(const WaveFunction& a, const WaveFunction& b);
WaveFunction operator-(const WaveFunction& a, const WaveFunction& b);

/// Unitary DFT over all axes (scaled by 1/sqrt(N)), so the discrete norm is
/// preserved when both spaces use the same cell volume.
WaveFunction to_momentum(const WaveFunction& psi);
WaveFunction from_momentum(const WaveFunction& phi);

/// In-place unitary transforms of raw buffers with the shape of `grid`.
void fft_forward(const GridSpec& grid, std::span<cplx> data);
void fft_backward(const GridSpec& grid, std::span<cplx> data);

/// Plane wave exp(i k.x) normalized to unit discrete norm; `k_index` holds
/// one lattice wavenumber index per axis.
WaveFunction plane_wave(const GridSpec& grid, std::span<const int> k_index);

/// Indicator of a single lattice point (unnormalized, value 1).
WaveFunction point_indicator(const GridSpec& grid, std::size_t flat_index);

/// Binary dump: header `vdwlab-wf v1 dim=<d> n=<points> L=<box_length>`
/// followed by little-endian (re, im) IEEE-754 doubles in flat order.
/// Multi-particle states add ` particles=<k>` to the header.
void write_dump(const WaveFunction& psi, const std::filesystem::path& path);
WaveFunction read_dump(const std::filesystem::path& path);

}  // namespace vdwlab
