#include "vdwlab/lattice.hpp"

#include <fftw3.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>

#include "vdwlab/errors.hpp"
#include "vdwlab/kernels.hpp"

namespace vdwlab {

void GridSpec::validate() const {
  if (dim != 1 && dim != 3)
    throw ShapeError("grid dimension must be 1 or 3, got " + std::to_string(dim));
  if (points < 8 || !std::has_single_bit(static_cast<unsigned>(points)))
    throw ShapeError("points_per_axis must be a power of two >= 8, got " +
                     std::to_string(points));
  if (!(box_length > 0.0) || !std::isfinite(box_length))
    throw ShapeError("box_length must be positive and finite");
  if (particles < 1) throw ShapeError("particle count must be >= 1");
}

std::size_t GridSpec::size() const {
  std::size_t n = 1;
  for (int a = 0; a < axes(); ++a) n *= static_cast<std::size_t>(points);
  return n;
}

double GridSpec::cell_volume() const { return std::pow(spacing(), axes()); }

double GridSpec::coordinate(int j) const {
  return spacing() * (j < points / 2 ? j : j - points);
}

double GridSpec::wavenumber(int j) const {
  return 2.0 * std::numbers::pi / box_length * (j < points / 2 ? j : j - points);
}

GridSpec GridSpec::single_particle() const {
  GridSpec g = *this;
  g.particles = 1;
  return g;
}

void GridSpec::unflatten(std::size_t flat, std::span<int> idx) const {
  const auto n = static_cast<std::size_t>(points);
  for (int a = axes() - 1; a >= 0; --a) {
    idx[static_cast<std::size_t>(a)] = static_cast<int>(flat % n);
    flat /= n;
  }
}

std::size_t GridSpec::flatten(std::span<const int> idx) const {
  std::size_t flat = 0;
  for (int a = 0; a < axes(); ++a)
    flat = flat * static_cast<std::size_t>(points) +
           static_cast<std::size_t>(idx[static_cast<std::size_t>(a)]);
  return flat;
}

WaveFunction::WaveFunction(GridSpec grid, std::vector<cplx> values, Space space)
    : grid_(grid), space_(space), values_(std::move(values)) {
  grid_.validate();
  if (values_.size() != grid_.size())
    throw ShapeError("value count " + std::to_string(values_.size()) +
                     " does not match grid size " + std::to_string(grid_.size()));
  for (const auto& z : values_)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw DomainError("wavefunction contains non-finite values");
  norm_ = std::sqrt(kernels::parallel::norm2(values_) * grid_.cell_volume());
}

WaveFunction WaveFunction::sample(
    const GridSpec& grid, const std::function<cplx(std::span<const double>)>& f) {
  grid.validate();
  std::vector<cplx> v(grid.size());
  std::vector<int> idx(static_cast<std::size_t>(grid.axes()));
  std::vector<double> x(idx.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    grid.unflatten(i, idx);
    for (std::size_t a = 0; a < idx.size(); ++a) x[a] = grid.coordinate(idx[a]);
    v[i] = f(x);
  }
  return WaveFunction(grid, std::move(v));
}

WaveFunction WaveFunction::scaled(cplx factor) const {
  std::vector<cplx> v(values_);
  for (auto& z : v) z *= factor;
  return WaveFunction(grid_, std::move(v), space_);
}

WaveFunction WaveFunction::normalized() const {
  if (norm_ == 0.0) throw DomainError("cannot normalize the zero state");
  return scaled(1.0 / norm_);
}

namespace {
void require_same_grid(const WaveFunction& a, const WaveFunction& b) {
  if (!(a.grid() == b.grid()) || a.space() != b.space())
    throw ShapeError("wavefunctions live on different grids");
}
}  // namespace

cplx inner(const WaveFunction& a, const WaveFunction& b) {
  require_same_grid(a, b);
  return kernels::parallel::dot(a.values(), b.values()) * a.grid().cell_volume();
}

WaveFunction operator+(const WaveFunction& a, const WaveFunction& b) {
  require_same_grid(a, b);
  std::vector<cplx> v(a.values().begin(), a.values().end());
  kernels::parallel::axpy(1.0, b.values(), v);
  return WaveFunction(a.grid(), std::move(v), a.space());
}

WaveFunction operator-(const WaveFunction& a, const WaveFunction& b) {
  require_same_grid(a, b);
  std::vector<cplx> v(a.values().begin(), a.values().end());
  kernels::parallel::axpy(-1.0, b.values(), v);
  return WaveFunction(a.grid(), std::move(v), a.space());
}

// ---------------------------------------------------------------------------
// FFT plumbing. Plans are created once per shape with FFTW_ESTIMATE (so the
// chosen algorithm, and hence the rounding, is reproducible) and executed
// through the thread-safe new-array interface.

namespace {

class FftPlan {
 public:
  explicit FftPlan(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int s : shape) n *= static_cast<std::size_t>(s);
    size_ = n;
    auto* buf = fftw_alloc_complex(n);
    const int rank = static_cast<int>(shape.size());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fwd_ = fftw_plan_dft(rank, shape.data(), buf, buf, FFTW_FORWARD, flags);
    bwd_ = fftw_plan_dft(rank, shape.data(), buf, buf, FFTW_BACKWARD, flags);
    fftw_free(buf);
  }
  ~FftPlan() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
  }
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  void run(std::span<cplx> data, bool forward) const {
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(forward ? fwd_ : bwd_, p, p);
    const double s = 1.0 / std::sqrt(static_cast<double>(size_));
    for (auto& z : data) z *= s;
  }

 private:
  std::size_t size_ = 0;
  fftw_plan fwd_ = nullptr;
  fftw_plan bwd_ = nullptr;
};

std::shared_ptr<const FftPlan> plan_for(const std::vector<int>& shape) {
  static std::mutex mu;
  static std::map<std::vector<int>, std::shared_ptr<const FftPlan>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(shape);
  if (it != cache.end()) return it->second;
  auto plan = std::make_shared<const FftPlan>(shape);
  cache.emplace(shape, plan);
  return plan;
}

void transform(const GridSpec& grid, std::span<cplx> data, bool forward) {
  if (data.size() != grid.size()) throw ShapeError("buffer does not match grid");
  std::vector<int> shape(static_cast<std::size_t>(grid.axes()), grid.points);
  plan_for(shape)->run(data, forward);
}

}  // namespace

void fft_forward(const GridSpec& grid, std::span<cplx> data) {
  transform(grid, data, true);
}
void fft_backward(const GridSpec& grid, std::span<cplx> data) {
  transform(grid, data, false);
}

WaveFunction to_momentum(const WaveFunction& psi) {
  if (psi.space() != Space::Position)
    throw ShapeError("to_momentum expects a position-space state");
  std::vector<cplx> v(psi.values().begin(), psi.values().end());
  fft_forward(psi.grid(), v);
  return WaveFunction(psi.grid(), std::move(v), Space::Momentum);
}

WaveFunction from_momentum(const WaveFunction& phi) {
  if (phi.space() != Space::Momentum)
    throw ShapeError("from_momentum expects a momentum-space state");
  std::vector<cplx> v(phi.values().begin(), phi.values().end());
  fft_backward(phi.grid(), v);
  return WaveFunction(phi.grid(), std::move(v), Space::Position);
}

WaveFunction plane_wave(const GridSpec& grid, std::span<const int> k_index) {
  if (static_cast<int>(k_index.size()) != grid.axes())
    throw ShapeError("plane_wave needs one index per axis");
  const double two_pi_over_n = 2.0 * std::numbers::pi / grid.points;
  const double amp = 1.0 / std::sqrt(static_cast<double>(grid.size()) * grid.cell_volume());
  std::vector<cplx> v(grid.size());
  std::vector<int> idx(k_index.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    grid.unflatten(i, idx);
    // phase evaluated on integers modulo n keeps the exponent exact
    long long acc = 0;
    for (std::size_t a = 0; a < idx.size(); ++a)
      acc += static_cast<long long>(idx[a]) * k_index[a];
    acc %= grid.points;
    const double phase = two_pi_over_n * static_cast<double>(acc);
    v[i] = amp * cplx(std::cos(phase), std::sin(phase));
  }
  return WaveFunction(grid, std::move(v));
}

WaveFunction point_indicator(const GridSpec& grid, std::size_t flat_index) {
  std::vector<cplx> v(grid.size(), cplx{0.0, 0.0});
  if (flat_index >= v.size()) throw ShapeError("point index out of range");
  v[flat_index] = 1.0;
  return WaveFunction(grid, std::move(v));
}

// ---------------------------------------------------------------------------

namespace {

std::string dump_header(const GridSpec& g) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "vdwlab-wf v1 dim=%d n=%d L=%.17g", g.dim,
                g.points, g.box_length);
  std::string h(buf);
  if (g.particles != 1) h += " particles=" + std::to_string(g.particles);
  return h;
}

void put_le_double(std::ostream& os, double x) {
  auto bits = std::bit_cast<std::uint64_t>(x);
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xFFu);
  os.write(b, 8);
}

double get_le_double(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  if (!is) throw ShapeError("truncated wavefunction dump");
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = (bits << 8) | b[i];
  return std::bit_cast<double>(bits);
}

}  // namespace

void write_dump(const WaveFunction& psi, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("io", "cannot open " + path.string() + " for writing");
  os << dump_header(psi.grid()) << '\n';
  for (const auto& z : psi.values()) {
    put_le_double(os, z.real());
    put_le_double(os, z.imag());
  }
}

WaveFunction read_dump(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("io", "cannot open " + path.string());
  std::string header;
  std::getline(is, header);
  std::istringstream hs(header);
  std::string magic, version;
  hs >> magic >> version;
  if (magic != "vdwlab-wf" || version != "v1")
    throw ShapeError("not a vdwlab-wf v1 dump: " + path.string());
  GridSpec g;
  std::string tok;
  while (hs >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw ShapeError("malformed dump header");
    const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
    if (key == "dim") g.dim = std::stoi(val);
    else if (key == "n") g.points = std::stoi(val);
    else if (key == "L") g.box_length = std::stod(val);
    else if (key == "particles") g.particles = std::stoi(val);
    else throw ShapeError("unknown dump header field " + key);
  }
  g.validate();
  std::vector<cplx> v(g.size());
  for (auto& z : v) {
    const double re = get_le_double(is);
    const double im = get_le_double(is);
    z = cplx(re, im);
  }
  return WaveFunction(g, std::move(v));
}

}  // namespace vdwlab
