#pragma once

#include <vector>

#include "freebnd/closed_form.hpp"
#include "freebnd/common.hpp"

namespace freebnd {

/// Anything that can be sampled at a point of R^n. The nonlocal operator is
/// evaluated against this interface.
class Field {
 public:
  virtual ~Field() = default;

  virtual int dim() const = 0;
  virtual double value(const Point& x) const = 0;
  /// Distances t > 0 along x + t*dir where the field has a kink or jump.
  virtual void ray_breakpoints(const Point& x, const Point& dir, std::vector<double>& out) const {
    (void)x;
    (void)dir;
    (void)out;
  }
  /// Natural step for finite-difference derivatives.
  virtual double derivative_step() const = 0;
};

/// Symmetric 2x2 Hessian; only xx is meaningful in one dimension.
struct Hessian {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;
};

Point fd_gradient(const Field& f, const Point& x, double step);
Hessian fd_hessian(const Field& f, const Point& x, double step);

class ClosedFormField final : public Field {
 public:
  explicit ClosedFormField(ClosedForm form, double derivative_step = 1e-4)
      : form_(std::move(form)), step_(derivative_step) {}

  int dim() const override { return form_.dim(); }
  double value(const Point& x) const override { return form_(x); }
  void ray_breakpoints(const Point& x, const Point& dir, std::vector<double>& out) const override {
    form_.ray_breakpoints(x, dir, out);
  }
  double derivative_step() const override { return step_; }
  const ClosedForm& form() const { return form_; }

 private:
  ClosedForm form_;
  double step_;
};

}  // namespace freebnd
