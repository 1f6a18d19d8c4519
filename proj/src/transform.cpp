#include "sdelab/transform.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace sdelab {

namespace {

double linear_at(const Grid& g, const std::vector<double>& v, double x) {
  const std::size_t i = g.cell(x);
  const double w = (x - g.x(i)) / g.h;
  return v[i] + w * (v[i + 1] - v[i]);
}

// Fritsch-Butland slopes: harmonic mean of consecutive secants, zero at local
// extrema, one-sided secants at the ends. Monotone data gives a monotone
// interpolant.
std::vector<double> monotone_slopes(const std::vector<double>& y, double h) {
  const std::size_t n = y.size();
  std::vector<double> d(n, 0.0);
  if (n < 2) return d;
  auto secant = [&](std::size_t i) { return (y[i + 1] - y[i]) / h; };
  d[0] = secant(0);
  d[n - 1] = secant(n - 2);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double s0 = secant(i - 1), s1 = secant(i);
    d[i] = (s0 * s1 > 0.0) ? 2.0 * s0 * s1 / (s0 + s1) : 0.0;
  }
  return d;
}

double hermite_at(const Grid& g, const std::vector<double>& y,
                  const std::vector<double>& d, double x) {
  const std::size_t i = g.cell(x);
  const double t = (x - g.x(i)) / g.h;
  const double h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
  const double h10 = t * (1.0 - t) * (1.0 - t);
  const double h01 = t * t * (3.0 - 2.0 * t);
  const double h11 = t * t * (t - 1.0);
  return h00 * y[i] + h10 * g.h * d[i] + h01 * y[i + 1] + h11 * g.h * d[i + 1];
}

}  // namespace

void TransformTable::require_inside(double x) const {
  if (!grid.contains(x))
    throw std::domain_error("x outside the transform grid");
}

double TransformTable::f_at(double x) const {
  require_inside(x);
  return hermite_at(grid, f_vals, f_slopes, x);
}

double TransformTable::f_prime_at(double x) const {
  require_inside(x);
  return linear_at(grid, f_prime_vals, x);
}

double TransformTable::exponent_at(double x) const {
  require_inside(x);
  return linear_at(grid, exponent, x);
}

double TransformTable::G_second_fd(std::size_t i) const {
  if (i == 0 || i + 1 >= grid.size())
    throw std::domain_error("centered difference needs an interior node");
  return (G_prime_vals[i + 1] - G_prime_vals[i - 1]) / (2.0 * grid.h);
}

double TransformTable::G_inverse(double z) const {
  if (z < G_vals.front() || z > G_vals.back())
    throw std::domain_error("value outside the tabulated G range");
  const auto it = std::upper_bound(G_vals.begin(), G_vals.end(), z);
  std::size_t i = (it == G_vals.begin())
                      ? 0
                      : static_cast<std::size_t>(it - G_vals.begin()) - 1;
  if (i + 1 >= G_vals.size()) i = G_vals.size() - 2;
  const double span = G_vals[i + 1] - G_vals[i];
  const double w = span > 0.0 ? (z - G_vals[i]) / span : 0.0;
  return grid.x(i) + w * grid.h;
}

double NestedTransform::phi_at(double x) const {
  if (!grid.contains(x)) throw std::domain_error("x outside the grid");
  return linear_at(grid, phi_vals, x);
}

double NestedTransform::inner_at(double x) const {
  if (!grid.contains(x)) throw std::domain_error("x outside the grid");
  return linear_at(grid, inner_vals, x);
}

double default_grid_step(double b) {
  return std::min(0.005, 1.0 / (20.0 * b));
}

TransformTable build_f(const ModelFamily& model, double b, double x_max,
                       double tol) {
  if (!(x_max > 0.0)) throw std::invalid_argument("x_max must be positive");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");

  auto ahat = [&](double v) { return model.eval_ahat(v, b); };
  auto exponent_of = [&](double x, double probe_tol) {
    return -2.0 * quad::adaptive_simpson(ahat, 0.0, x, probe_tol);
  };

  double h = default_grid_step(b);
  for (int attempt = 0;; ++attempt) {
    const Grid grid = Grid::symmetric(x_max, h);
    std::vector<double> exponent =
        quad::cumulative(grid, [&](double v) { return -2.0 * ahat(v); });

    // Verify the cumulative exponent against an independent adaptive probe
    // at a handful of nodes; refine the grid when it disagrees.
    bool ok = true;
    for (int k = -4; k <= 4 && ok; ++k) {
      const std::ptrdiff_t offset =
          static_cast<std::ptrdiff_t>(grid.half) * k / 4;
      const std::size_t node =
          static_cast<std::size_t>(static_cast<std::ptrdiff_t>(grid.center()) +
                                   offset);
      const double ref = exponent_of(grid.x(node), 0.1 * tol);
      if (std::abs(exponent[node] - ref) > tol * std::max(1.0, std::abs(ref)))
        ok = false;
    }
    if (!ok && attempt < 6) {
      h *= 0.5;
      continue;
    }
    if (!ok)
      throw std::runtime_error(
          "exponent quadrature failed to reach the requested tolerance");

    for (double e : exponent) {
      if (!std::isfinite(e))
        throw std::runtime_error("homogeneous drift integral is not finite");
      if (std::abs(e) > 700.0)
        throw std::overflow_error(
            "scale exponent exceeds 700; f' overflows double range -- "
            "reduce x_max or work on the exponent table directly");
    }

    TransformTable t;
    t.grid = grid;
    t.b = b;
    t.exponent = std::move(exponent);
    t.f_prime_vals.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
      t.f_prime_vals[i] = std::exp(t.exponent[i]);
    t.f_vals =
        quad::cumulative_table(t.f_prime_vals, grid.h, grid.center());
    t.G_vals = t.f_vals;
    t.G_prime_vals = t.f_prime_vals;
    t.f_slopes = monotone_slopes(t.f_vals, grid.h);
    t.log_space_flag = true;

    for (std::size_t i = 0; i + 1 < t.f_vals.size(); ++i)
      if (!(t.f_vals[i + 1] > t.f_vals[i]))
        throw std::runtime_error("scale function table is not increasing");
    return t;
  }
}

NestedTransform build_phi(const TransformTable& table,
                          const ModelFamily& model, double b) {
  const Grid& g = table.grid;
  std::vector<double> ratio(g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    ratio[i] = model.integrand_g(g.x(i), b) * std::exp(-table.exponent[i]);

  NestedTransform n;
  n.grid = g;
  n.inner_vals = quad::cumulative_table(ratio, g.h, g.center());

  std::vector<double> outer(g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    outer[i] = table.f_prime_vals[i] * n.inner_vals[i];
  n.phi_vals = quad::cumulative_table(outer, g.h, g.center());
  for (double& v : n.phi_vals) v *= 2.0;
  return n;
}

std::vector<double> a3_profile_vals(const TransformTable& table,
                                    const std::vector<double>& q_vals) {
  const Grid& g = table.grid;
  if (q_vals.size() != g.size())
    throw std::invalid_argument("q table does not match the grid");
  std::vector<double> ratio(g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    ratio[i] = q_vals[i] * std::exp(-table.exponent[i]);
  std::vector<double> anti = quad::cumulative_table(ratio, g.h, g.center());
  for (std::size_t i = 0; i < g.size(); ++i) anti[i] *= table.f_prime_vals[i];
  return anti;
}

std::vector<double> a3_profile(const TransformTable& table,
                               const std::function<double(double)>& q) {
  const Grid& g = table.grid;
  std::vector<double> q_vals(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) q_vals[i] = q(g.x(i));
  return a3_profile_vals(table, q_vals);
}

double a3_functional(const TransformTable& table,
                     const std::function<double(double)>& q, double x) {
  table.require_inside(x);
  const std::vector<double> profile = a3_profile(table, q);
  return linear_at(table.grid, profile, x);
}

double sup_abs_within(const Grid& grid, const std::vector<double>& values,
                      double window) {
  double sup = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (std::abs(grid.x(i)) <= window)
      sup = std::max(sup, std::abs(values[i]));
  return sup;
}

void dump_table_csv(const TransformTable& table, const NestedTransform* nested,
                    std::ostream& os) {
  os << "x,f_prime,f,G,phi\n";
  char line[192];
  for (std::size_t i = 0; i < table.grid.size(); ++i) {
    if (nested != nullptr) {
      std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%.17g,%.17g\n",
                    table.grid.x(i), table.f_prime_vals[i], table.f_vals[i],
                    table.G_vals[i], nested->phi_vals[i]);
    } else {
      std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%.17g,\n",
                    table.grid.x(i), table.f_prime_vals[i], table.f_vals[i],
                    table.G_vals[i]);
    }
    os << line;
  }
}

}  // namespace sdelab
