#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace freebnd {

/// A point of R^n for n in {1, 2}. In one dimension the second component is
/// ignored and kept at zero.
using Point = std::array<double, 2>;

enum class ErrorCode {
  InvalidArgument,
  NodeOutsideDomainWithoutExteriorPolicy,
  NonFiniteQuadrature,
  CapExceeded,
  UnresolvedBoundary,
  NoConvergence,
  EmptyFreeBoundary,
  InsufficientRadii,
  DegenerateGradient,
  SampleOutsideDomain,
  InsufficientLevels,
  SingularGram,
  NondegeneracyViolated,
  QuadratureNoiseFloor,
  NonIntegrableTail,
  ExtrapolationUnstable,
  SingularFit,
  ConfigInvalid,
  FormatVersionMismatch,
  ChecksumMismatch,
  IoError,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline Point operator+(const Point& a, const Point& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Point operator-(const Point& a, const Point& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Point operator*(double t, const Point& a) { return {t * a[0], t * a[1]}; }
inline double dot(const Point& a, const Point& b) { return a[0] * b[0] + a[1] * b[1]; }
inline double norm(const Point& a) { return std::hypot(a[0], a[1]); }

/// Result of a least-squares line fit y = slope * x + intercept.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Ordinary least squares on (x, y) pairs. r2 is 1 when the data has no
/// spread in y.
LineFit fit_line(const double* x, const double* y, std::size_t n);

template <class Container>
LineFit fit_line(const Container& x, const Container& y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::InvalidArgument, "fit_line: size mismatch");
  }
  return fit_line(x.data(), y.data(), x.size());
}

}  // namespace freebnd
