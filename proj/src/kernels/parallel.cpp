#include <cstdlib>
#include <string>

#include "vdwlab/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace vdwlab::kernels {

namespace {

std::size_t block_count(std::size_t n) {
  return (n + kReductionBlock - 1) / kReductionBlock;
}

// Pairwise combination in a fixed tree order.
template <class T>
T tree_sum(std::vector<T>& partial) {
  if (partial.empty()) return T{};
  std::size_t n = partial.size();
  while (n > 1) {
    const std::size_t half = (n + 1) / 2;
    for (std::size_t i = 0; i + half < n; ++i) partial[i] += partial[i + half];
    n = half;
  }
  return partial[0];
}

inline double signed_coord(int i, int n, double h) {
  return h * (i < n / 2 ? i : i - n);
}

}  // namespace

namespace parallel {

cplx dot(std::span<const cplx> a, std::span<const cplx> b) {
  const std::size_t nb = block_count(a.size());
  std::vector<cplx> partial(nb);
  const auto n = static_cast<std::ptrdiff_t>(nb);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t blk = 0; blk < n; ++blk) {
    const std::size_t lo = static_cast<std::size_t>(blk) * kReductionBlock;
    const std::size_t hi = std::min(a.size(), lo + kReductionBlock);
    cplx s{0.0, 0.0};
    for (std::size_t i = lo; i < hi; ++i) s += std::conj(a[i]) * b[i];
    partial[static_cast<std::size_t>(blk)] = s;
  }
  return tree_sum(partial);
}

double norm2(std::span<const cplx> a) {
  const std::size_t nb = block_count(a.size());
  std::vector<double> partial(nb);
  const auto n = static_cast<std::ptrdiff_t>(nb);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t blk = 0; blk < n; ++blk) {
    const std::size_t lo = static_cast<std::size_t>(blk) * kReductionBlock;
    const std::size_t hi = std::min(a.size(), lo + kReductionBlock);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += std::norm(a[i]);
    partial[static_cast<std::size_t>(blk)] = s;
  }
  return tree_sum(partial);
}

void multiply(std::span<cplx> v, std::span<const double> w) {
  const auto n = static_cast<std::ptrdiff_t>(v.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) v[i] *= w[i];
}

void multiply_add(std::span<const cplx> x, std::span<const double> w,
                  std::span<cplx> y) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) y[i] += w[i] * x[i];
}

void axpy(cplx alpha, std::span<const cplx> x, std::span<cplx> y) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double weighted_lattice_sum(std::span<const double> field,
                            std::array<int, 3> dims, double spacing,
                            const DisplacementWeight& weight) {
  // one partial per x-plane, combined in plane order
  std::vector<double> partial(static_cast<std::size_t>(dims[0]));
  const std::size_t plane =
      static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(dims[2]);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < dims[0]; ++i) {
    const double x = signed_coord(i, dims[0], spacing);
    std::size_t idx = static_cast<std::size_t>(i) * plane;
    double s = 0.0;
    for (int j = 0; j < dims[1]; ++j) {
      const double y = signed_coord(j, dims[1], spacing);
      for (int k = 0; k < dims[2]; ++k, ++idx) {
        const double f = field[idx];
        if (f == 0.0) continue;
        s += f * weight(x, y, signed_coord(k, dims[2], spacing));
      }
    }
    partial[static_cast<std::size_t>(i)] = s;
  }
  return tree_sum(partial) * spacing * spacing * spacing;
}

Eigen::MatrixXcd weighted_gram(const std::vector<std::span<const cplx>>& a,
                               std::span<const double> w,
                               const std::vector<std::span<const cplx>>& b,
                               double measure) {
  const auto na = static_cast<Eigen::Index>(a.size());
  const auto nb = static_cast<Eigen::Index>(b.size());
  Eigen::MatrixXcd out(na, nb);
  const std::size_t blocks = block_count(w.size());
  // w * b_n is formed once per block; each (m, n) entry reduces over blocks
  // in a fixed order.
#pragma omp parallel for schedule(dynamic) collapse(2)
  for (Eigen::Index m = 0; m < na; ++m) {
    for (Eigen::Index n = 0; n < nb; ++n) {
      std::vector<cplx> partial(blocks);
      const auto& am = a[static_cast<std::size_t>(m)];
      const auto& bn = b[static_cast<std::size_t>(n)];
      for (std::size_t blk = 0; blk < blocks; ++blk) {
        const std::size_t lo = blk * kReductionBlock;
        const std::size_t hi = std::min(w.size(), lo + kReductionBlock);
        cplx s{0.0, 0.0};
        for (std::size_t i = lo; i < hi; ++i) s += std::conj(am[i]) * w[i] * bn[i];
        partial[blk] = s;
      }
      out(m, n) = tree_sum(partial) * measure;
    }
  }
  return out;
}

}  // namespace parallel

int apply_thread_cap_from_env() {
  const char* env = std::getenv("VDWLAB_THREADS");
  if (env == nullptr || *env == '\0') return 0;
  int cap = 0;
  try {
    cap = std::stoi(env);
  } catch (...) {
    return 0;
  }
  if (cap < 1) return 0;
#ifdef _OPENMP
  omp_set_num_threads(cap);
#endif
  return cap;
}

}  // namespace vdwlab::kernels
