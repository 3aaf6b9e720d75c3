#include "freebnd/field.hpp"

namespace freebnd {

Point fd_gradient(const Field& f, const Point& x, double step) {
  Point g{0.0, 0.0};
  for (int a = 0; a < f.dim(); ++a) {
    Point xp = x, xm = x;
    xp[a] += step;
    xm[a] -= step;
    g[a] = (f.value(xp) - f.value(xm)) / (2.0 * step);
  }
  return g;
}

Hessian fd_hessian(const Field& f, const Point& x, double step) {
  const double h2 = step * step;
  const double u0 = f.value(x);
  Hessian H;
  H.xx = (f.value({x[0] + step, x[1]}) + f.value({x[0] - step, x[1]}) - 2.0 * u0) / h2;
  if (f.dim() == 2) {
    H.yy = (f.value({x[0], x[1] + step}) + f.value({x[0], x[1] - step}) - 2.0 * u0) / h2;
    H.xy = (f.value({x[0] + step, x[1] + step}) - f.value({x[0] + step, x[1] - step}) -
            f.value({x[0] - step, x[1] + step}) + f.value({x[0] - step, x[1] - step})) /
           (4.0 * h2);
  }
  return H;
}

}  // namespace freebnd
