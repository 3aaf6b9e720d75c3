#include "freebnd/common.hpp"

#include <cstddef>

namespace freebnd {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NodeOutsideDomainWithoutExteriorPolicy: return "NodeOutsideDomainWithoutExteriorPolicy";
    case ErrorCode::NonFiniteQuadrature: return "NonFiniteQuadrature";
    case ErrorCode::CapExceeded: return "CapExceeded";
    case ErrorCode::UnresolvedBoundary: return "UnresolvedBoundary";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::EmptyFreeBoundary: return "EmptyFreeBoundary";
    case ErrorCode::InsufficientRadii: return "InsufficientRadii";
    case ErrorCode::DegenerateGradient: return "DegenerateGradient";
    case ErrorCode::SampleOutsideDomain: return "SampleOutsideDomain";
    case ErrorCode::InsufficientLevels: return "InsufficientLevels";
    case ErrorCode::SingularGram: return "SingularGram";
    case ErrorCode::NondegeneracyViolated: return "NondegeneracyViolated";
    case ErrorCode::QuadratureNoiseFloor: return "QuadratureNoiseFloor";
    case ErrorCode::NonIntegrableTail: return "NonIntegrableTail";
    case ErrorCode::ExtrapolationUnstable: return "ExtrapolationUnstable";
    case ErrorCode::SingularFit: return "SingularFit";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::FormatVersionMismatch: return "FormatVersionMismatch";
    case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

LineFit fit_line(const double* x, const double* y, std::size_t n) {
  if (n < 2) {
    throw Error(ErrorCode::InvalidArgument, "fit_line needs at least two points");
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx <= 0.0) {
    throw Error(ErrorCode::InvalidArgument, "fit_line: abscissae are all equal");
  }
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

}  // namespace freebnd
