#include "sdelab/quadrature.hpp"

#include <cmath>

namespace sdelab::quad {

std::vector<double> cumulative_table(const std::vector<double>& y, double h,
                                     std::size_t center) {
  const std::size_t n = y.size();
  if (n < 3) throw std::invalid_argument("cumulative_table needs >= 3 nodes");
  if (center >= n) throw std::invalid_argument("center index out of range");

  // Per-cell integrals over [x_i, x_{i+1}], using the neighbor on the right
  // when one exists and the neighbor on the left at the last cell.
  std::vector<double> cell(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (i + 2 < n) {
      cell[i] = h / 12.0 * (5.0 * y[i] + 8.0 * y[i + 1] - y[i + 2]);
    } else {
      cell[i] = h / 12.0 * (-y[i - 1] + 8.0 * y[i] + 5.0 * y[i + 1]);
    }
  }

  std::vector<double> out(n);
  out[center] = 0.0;
  for (std::size_t i = center; i + 1 < n; ++i) out[i + 1] = out[i] + cell[i];
  for (std::size_t i = center; i > 0; --i) out[i - 1] = out[i] - cell[i - 1];
  return out;
}

namespace {

double simpson(const std::function<double(double)>& f, double a, double fa,
               double b, double fb, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adapt(const std::function<double(double)>& f, double a, double fa,
             double b, double fb, double fm, double whole, double tol,
             int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(f, a, fa, m, fm, flm);
  const double right = simpson(f, m, fm, b, fb, frm);
  const double err = left + right - whole;
  if (depth <= 0 || std::abs(err) <= 15.0 * tol)
    return left + right + err / 15.0;
  return adapt(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1) +
         adapt(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol) {
  if (a == b) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = simpson(f, a, fa, b, fb, fm);
  return adapt(f, a, fa, b, fb, fm, whole, tol, 48);
}

}  // namespace sdelab::quad
