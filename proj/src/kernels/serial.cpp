#include "vdwlab/kernels.hpp"

namespace vdwlab::kernels::serial {

cplx dot(std::span<const cplx> a, std::span<const cplx> b) {
  cplx s{0.0, 0.0};
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

double norm2(std::span<const cplx> a) {
  double s = 0.0;
  for (const auto& z : a) s += std::norm(z);
  return s;
}

void multiply(std::span<cplx> v, std::span<const double> w) {
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= w[i];
}

void multiply_add(std::span<const cplx> x, std::span<const double> w,
                  std::span<cplx> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += w[i] * x[i];
}

void axpy(cplx alpha, std::span<const cplx> x, std::span<cplx> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

namespace {
inline double signed_coord(int i, int n, double h) {
  return h * (i < n / 2 ? i : i - n);
}
}  // namespace

double weighted_lattice_sum(std::span<const double> field,
                            std::array<int, 3> dims, double spacing,
                            const DisplacementWeight& weight) {
  double s = 0.0;
  std::size_t idx = 0;
  for (int i = 0; i < dims[0]; ++i) {
    const double x = signed_coord(i, dims[0], spacing);
    for (int j = 0; j < dims[1]; ++j) {
      const double y = signed_coord(j, dims[1], spacing);
      for (int k = 0; k < dims[2]; ++k, ++idx) {
        const double z = signed_coord(k, dims[2], spacing);
        s += field[idx] * weight(x, y, z);
      }
    }
  }
  return s * spacing * spacing * spacing;
}

Eigen::MatrixXcd weighted_gram(const std::vector<std::span<const cplx>>& a,
                               std::span<const double> w,
                               const std::vector<std::span<const cplx>>& b,
                               double measure) {
  Eigen::MatrixXcd out(static_cast<Eigen::Index>(a.size()),
                       static_cast<Eigen::Index>(b.size()));
  for (std::size_t m = 0; m < a.size(); ++m) {
    for (std::size_t n = 0; n < b.size(); ++n) {
      cplx s{0.0, 0.0};
      for (std::size_t i = 0; i < w.size(); ++i)
        s += std::conj(a[m][i]) * w[i] * b[n][i];
      out(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) =
          s * measure;
    }
  }
  return out;
}

}  // namespace vdwlab::kernels::serial
