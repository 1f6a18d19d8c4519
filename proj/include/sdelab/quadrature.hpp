#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace sdelab {

// Uniform grid on [-x_max, x_max] with an exact node at 0.
struct Grid {
  double x_max = 0.0;
  double h = 0.0;
  std::size_t half = 0;  // nodes per side; total nodes = 2*half + 1

  static Grid symmetric(double x_max, double h_request) {
    if (!(x_max > 0.0) || !(h_request > 0.0))
      throw std::invalid_argument("grid requires x_max > 0 and h > 0");
    Grid g;
    g.half = static_cast<std::size_t>(std::ceil(x_max / h_request));
    g.x_max = x_max;
    g.h = x_max / static_cast<double>(g.half);
    return g;
  }

  std::size_t size() const { return 2 * half + 1; }
  std::size_t center() const { return half; }
  double x(std::size_t i) const {
    return (static_cast<double>(i) - static_cast<double>(half)) * h;
  }
  bool contains(double x) const { return std::abs(x) <= x_max; }
  // Index of the cell [x_i, x_{i+1}] containing x, clamped to valid cells.
  std::size_t cell(double x) const {
    double f = x / h + static_cast<double>(half);
    if (f < 0.0) f = 0.0;
    auto i = static_cast<std::size_t>(f);
    if (i >= 2 * half) i = 2 * half - 1;
    return i;
  }
};

namespace quad {

// Cumulative integral of a callable from the grid center (x = 0) to every
// node, one Simpson cell at a time with midpoint evaluation. Exactly zero at
// the center node; antisymmetric convention for x < 0.
template <class F>
std::vector<double> cumulative(const Grid& g, F&& f) {
  std::vector<double> out(g.size());
  const std::size_t c = g.center();
  out[c] = 0.0;
  for (std::size_t i = c; i + 1 < g.size(); ++i) {
    const double a = g.x(i), b = g.x(i + 1);
    out[i + 1] =
        out[i] + g.h / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b));
  }
  for (std::size_t i = c; i > 0; --i) {
    const double a = g.x(i - 1), b = g.x(i);
    out[i - 1] =
        out[i] - g.h / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b));
  }
  return out;
}

// Cumulative integral of tabulated values from the center node outward.
// Each cell uses the quadratic through three consecutive nodes
// (int_{x0}^{x1} = h/12 * (5 y0 + 8 y1 - y2)), which keeps composite-Simpson
// accuracy without needing midpoint samples.
std::vector<double> cumulative_table(const std::vector<double>& y, double h,
                                     std::size_t center);

// Adaptive Simpson on [a, b] to absolute tolerance tol.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol);

}  // namespace quad
}  // namespace sdelab
