#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <vector>

#include "sdelab/model.hpp"
#include "sdelab/quadrature.hpp"

namespace sdelab {

// Tabulated scale transform on a symmetric grid:
//   f'(x) = exp{ -2 int_0^x ahat(v) dv },   f(x) = int_0^x f'(u) du,
// with G = f (the transform used throughout the catalog). Exponents are
// tabulated and exponentiated lazily so ratios against f' stay in log space.
struct TransformTable {
  Grid grid;
  double b = 0.0;  // parameter value the table was built at
  std::vector<double> exponent;      // E with f' = exp(E)
  std::vector<double> f_prime_vals;  // exp(E)
  std::vector<double> f_vals;
  std::vector<double> G_vals;        // == f_vals
  std::vector<double> G_prime_vals;  // == f_prime_vals
  std::vector<double> f_slopes;      // monotone cubic slopes for f
  bool log_space_flag = true;

  double f_at(double x) const;        // monotone cubic
  double f_prime_at(double x) const;  // linear
  double exponent_at(double x) const; // linear
  double G_at(double x) const { return f_at(x); }
  double G_prime_at(double x) const { return f_prime_at(x); }
  // Centered difference of G' at an interior node.
  double G_second_fd(std::size_t i) const;
  // Inverse of the strictly increasing G; z must lie in the tabulated range.
  double G_inverse(double z) const;

  void require_inside(double x) const;
};

// Nested transform Phi(x) = 2 int_0^x f'(u) ( int_0^u g(v)/f'(v) dv ) du and
// its inner antiderivative, both on the table's grid.
struct NestedTransform {
  Grid grid;
  std::vector<double> inner_vals;
  std::vector<double> phi_vals;

  double phi_at(double x) const;    // linear
  double inner_at(double x) const;  // linear
};

// Grid spacing rule: the table must resolve drift oscillations of wavelength
// ~1/b, so h <= min(0.005, 1/(20 b)).
double default_grid_step(double b);

// Builds the scale table for the homogeneous drift at parameter b. The
// exponent is verified against an adaptive quadrature probe at relative
// tolerance tol and the grid is refined until the probe agrees.
// Throws std::overflow_error when |exponent| exceeds 700 anywhere.
TransformTable build_f(const ModelFamily& model, double b, double x_max,
                       double tol);

NestedTransform build_phi(const TransformTable& table,
                          const ModelFamily& model, double b);

// Values of f'(x) int_0^x q(v)/f'(v) dv at every grid node.
std::vector<double> a3_profile(const TransformTable& table,
                               const std::function<double(double)>& q);

// Same functional from q already tabulated on the grid nodes.
std::vector<double> a3_profile_vals(const TransformTable& table,
                                    const std::vector<double>& q_vals);

// Same functional at a single point (x must lie inside the grid).
double a3_functional(const TransformTable& table,
                     const std::function<double(double)>& q, double x);

// Largest |values| over nodes with |x| <= window.
double sup_abs_within(const Grid& grid, const std::vector<double>& values,
                      double window);

// CSV dump (columns: x, f_prime, f, G, phi); phi is blank when absent.
void dump_table_csv(const TransformTable& table, const NestedTransform* nested,
                    std::ostream& os);

}  // namespace sdelab
