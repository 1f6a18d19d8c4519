#pragma once

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sdelab {

// One-parameter coefficient family for
//   d xi(t) = a(t, xi) dt + dW(t),  xi(0) = x0,
// indexed directly by the constant b > 1 (the family's only route of
// parameter dependence). All callables take b as their last argument.
struct ModelFamily {
  std::string name;
  std::function<double(double t, double x, double b)> drift;        // a_T
  std::function<double(double x, double b)> homogeneous_drift;      // a-hat_T
  std::function<double(double b)> drift_bound;                      // L_T
  std::function<double(double x, double b)> integrand_g;            // g_T
  std::function<double(double x, double b)> terminal_F;             // F_T
  double x0 = 0.0;
  // Exact envelope of sup_x |a(t,x,b) - a_hat(x,b)| when known in closed form.
  std::function<double(double t, double b)> sup_gap;

  bool has_sup_gap() const { return static_cast<bool>(sup_gap); }

  // Checked drift evaluation: enforces |a| <= L_T on every call.
  double eval_drift(double t, double x, double b) const;

  // Checked homogeneous drift: must be finite wherever sampled.
  double eval_ahat(double x, double b) const;
};

// Coefficients of the candidate limit equation
//   d zeta = a0(zeta) dt + sigma0(zeta) dW,  zeta(0) = y0,
// plus the auxiliary limit data used by the functional theorems.
struct LimitModel {
  std::function<double(double)> a0;
  std::function<double(double)> sigma0;
  std::function<double(double)> g0;
  std::function<double(double)> F0;
  // g0 of the antiderivative route (the scale-weighted antiderivative of g_T
  // converges to g0_a4 composed with G); empty when that route is unavailable.
  std::function<double(double)> g0_a4;
  double y0 = 0.0;
  std::optional<double> c0;
  std::optional<double> b0;
};

// Strictly increasing family of parameter values b_1 < ... < b_K, all > 1.
struct ParamSchedule {
  std::vector<double> values;
  double gamma = 0.5;

  static ParamSchedule pow2(int k_min, int k_max, double gamma);
  void validate() const;
  std::size_t size() const { return values.size(); }
};

struct ExperimentModel {
  ModelFamily family;
  LimitModel limit;
};

// Drift with nonregular parameter dependence,
//   a(t,x) = b^gamma cos(xb) + t b/(1+t^2 b^2) sin((x-1)b),
// homogeneous part b^gamma cos(xb); the limit of G(xi) is x0 + W.
ExperimentModel example1_model(double gamma, double x0 = 0.0);

// g(x) = b^gamma / (1 + b^2 x^2); pointwise blowup at 0, limit g0 = 0.
std::function<double(double, double)> example2_integrand(double gamma);

// example1 drift with the example2 integrand installed.
ExperimentModel example2_model(double gamma, double x0 = 0.0);

enum class SyntheticKind { zero_drift, constant_drift, linear_drift };

// Oracle families with exactly known behavior (drift 0, constant c, or -x
// clipped to [-10, 10]).
ExperimentModel synthetic_model(SyntheticKind kind, double c = 1.0,
                                double x0 = 0.0);

// Catalog lookup by name with a flat parameter map; throws
// std::invalid_argument for unknown names or bad parameters.
ExperimentModel make_model(const std::string& name,
                           const std::map<std::string, double>& params);

// Names accepted by make_model.
std::vector<std::string> model_names();

}  // namespace sdelab
