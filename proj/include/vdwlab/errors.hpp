#pragma once

#include <stdexcept>
#include <string>

namespace vdwlab {

/// Base class for every error raised by the library. `category()` is a
/// short machine-readable tag the CLI forwards in its error reports.
class Error : public std::runtime_error {
 public:
  Error(std::string category, const std::string& what)
      : std::runtime_error(what), category_(std::move(category)) {}
  const std::string& category() const noexcept { return category_; }

 private:
  std::string category_;
};

struct ShapeError : Error {
  explicit ShapeError(const std::string& w) : Error("shape", w) {}
};
struct DomainError : Error {
  explicit DomainError(const std::string& w) : Error("domain", w) {}
};
struct UnsupportedError : Error {
  explicit UnsupportedError(const std::string& w) : Error("unsupported", w) {}
};
struct ModelError : Error {
  explicit ModelError(const std::string& w) : Error("model", w) {}
};
struct CapacityError : Error {
  explicit CapacityError(const std::string& w) : Error("capacity", w) {}
};
struct GeometryError : Error {
  explicit GeometryError(const std::string& w) : Error("geometry", w) {}
};
struct FitError : Error {
  explicit FitError(const std::string& w) : Error("fit", w) {}
};
struct RangeError : Error {
  explicit RangeError(const std::string& w) : Error("range", w) {}
};
struct OrthogonalityError : Error {
  explicit OrthogonalityError(const std::string& w) : Error("orthogonality", w) {}
};
struct DegeneracyError : Error {
  explicit DegeneracyError(const std::string& w) : Error("degeneracy", w) {}
};

/// Raised when an iterative solver runs out of iterations. Carries the
/// smallest residual norm reached.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& w, double best_residual)
      : Error("convergence", w), best_residual_(best_residual) {}
  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_residual_;
};

}  // namespace vdwlab
