#pragma once

// Data-parallel inner loops. Every routine exists twice: `serial` is the
// plain reference loop kept for testing, `parallel` is the OpenMP version
// used by the production paths. Parallel reductions are blocked with a
// fixed block size and combined in a fixed order, so results do not depend
// on the thread count.

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace vdwlab::kernels {

using cplx = std::complex<double>;

/// Lattice displacement weight: receives the displacement vector (x, y, z)
/// of one lattice point and returns the weight multiplying the field there.
using DisplacementWeight = std::function<double(double, double, double)>;

inline constexpr std::size_t kReductionBlock = 4096;

namespace serial {

cplx dot(std::span<const cplx> a, std::span<const cplx> b);
double norm2(std::span<const cplx> a);
void multiply(std::span<cplx> v, std::span<const double> w);
void multiply_add(std::span<const cplx> x, std::span<const double> w,
                  std::span<cplx> y);
void axpy(cplx alpha, std::span<const cplx> x, std::span<cplx> y);

/// Sum over a (possibly wrapped) 3D lattice of `field[i] * weight(r_i)`,
/// where r_i is the signed displacement of index i (indices >= n/2 map to
/// negative coordinates). The result is multiplied by h^3.
double weighted_lattice_sum(std::span<const double> field,
                            std::array<int, 3> dims, double spacing,
                            const DisplacementWeight& weight);

/// out(m, n) = sum_i conj(a_m[i]) * w[i] * b_n[i] * measure.
Eigen::MatrixXcd weighted_gram(const std::vector<std::span<const cplx>>& a,
                               std::span<const double> w,
                               const std::vector<std::span<const cplx>>& b,
                               double measure);

}  // namespace serial

namespace parallel {

cplx dot(std::span<const cplx> a, std::span<const cplx> b);
double norm2(std::span<const cplx> a);
void multiply(std::span<cplx> v, std::span<const double> w);
void multiply_add(std::span<const cplx> x, std::span<const double> w,
                  std::span<cplx> y);
void axpy(cplx alpha, std::span<const cplx> x, std::span<cplx> y);
double weighted_lattice_sum(std::span<const double> field,
                            std::array<int, 3> dims, double spacing,
                            const DisplacementWeight& weight);
Eigen::MatrixXcd weighted_gram(const std::vector<std::span<const cplx>>& a,
                               std::span<const double> w,
                               const std::vector<std::span<const cplx>>& b,
                               double measure);

}  // namespace parallel

/// Caps the OpenMP thread count from the VDWLAB_THREADS environment
/// variable, if set. Returns the cap in effect (0 when unset).
int apply_thread_cap_from_env();

}  // namespace vdwlab::kernels
