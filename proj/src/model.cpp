#include "sdelab/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sdelab {

namespace {

double require_param(const std::map<std::string, double>& params,
                     const std::string& key, double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

void check_gamma(double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw std::invalid_argument("gamma must lie in [0, 1)");
}

LimitModel brownian_limit(double y0) {
  LimitModel lim;
  lim.a0 = [](double) { return 0.0; };
  lim.sigma0 = [](double) { return 1.0; };
  lim.g0 = [](double) { return 0.0; };
  lim.F0 = [](double) { return 0.0; };
  lim.y0 = y0;
  return lim;
}

}  // namespace

double ModelFamily::eval_drift(double t, double x, double b) const {
  const double a = drift(t, x, b);
  const double bound = drift_bound(b);
  if (!std::isfinite(a))
    throw std::runtime_error("drift evaluation is not finite (model " + name +
                             ")");
  if (std::abs(a) > bound + 1e-12)
    throw std::runtime_error("drift bound violated by model " + name);
  return a;
}

double ModelFamily::eval_ahat(double x, double b) const {
  const double a = homogeneous_drift(x, b);
  if (!std::isfinite(a))
    throw std::runtime_error("homogeneous drift is not finite (model " +
                             name + ")");
  return a;
}

ParamSchedule ParamSchedule::pow2(int k_min, int k_max, double gamma) {
  if (k_min > k_max) throw std::invalid_argument("empty schedule");
  ParamSchedule s;
  s.gamma = gamma;
  for (int k = k_min; k <= k_max; ++k) s.values.push_back(std::ldexp(1.0, k));
  s.validate();
  return s;
}

void ParamSchedule::validate() const {
  if (values.empty()) throw std::invalid_argument("empty schedule");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 1.0))
      throw std::invalid_argument("schedule values must exceed 1");
    if (i > 0 && !(values[i] > values[i - 1]))
      throw std::invalid_argument("schedule must be strictly increasing");
  }
}

ExperimentModel example1_model(double gamma, double x0) {
  check_gamma(gamma);
  ExperimentModel m;
  m.family.name = "example1";
  m.family.x0 = x0;
  m.family.drift = [gamma](double t, double x, double b) {
    const double tb = t * b;
    return std::pow(b, gamma) * std::cos(x * b) +
           tb / (1.0 + tb * tb) * std::sin((x - 1.0) * b);
  };
  m.family.homogeneous_drift = [gamma](double x, double b) {
    return std::pow(b, gamma) * std::cos(x * b);
  };
  m.family.drift_bound = [gamma](double b) {
    return std::pow(b, gamma) + 0.5;
  };
  m.family.sup_gap = [](double t, double b) {
    const double tb = t * b;
    return tb / (1.0 + tb * tb);
  };
  m.family.integrand_g = [](double, double) { return 0.0; };
  m.family.terminal_F = [](double, double) { return 0.0; };
  m.limit = brownian_limit(x0);
  return m;
}

std::function<double(double, double)> example2_integrand(double gamma) {
  check_gamma(gamma);
  return [gamma](double x, double b) {
    const double bx = b * x;
    return std::pow(b, gamma) / (1.0 + bx * bx);
  };
}

ExperimentModel example2_model(double gamma, double x0) {
  ExperimentModel m = example1_model(gamma, x0);
  m.family.name = "example2";
  m.family.integrand_g = example2_integrand(gamma);
  m.limit.g0_a4 = [](double) { return 0.0; };
  return m;
}

ExperimentModel synthetic_model(SyntheticKind kind, double c, double x0) {
  ExperimentModel m;
  m.family.x0 = x0;
  m.family.integrand_g = [](double, double) { return 0.0; };
  m.family.terminal_F = [](double, double) { return 0.0; };
  m.limit = brownian_limit(x0);
  switch (kind) {
    case SyntheticKind::zero_drift:
      m.family.name = "zero_drift";
      m.family.drift = [](double, double, double) { return 0.0; };
      m.family.homogeneous_drift = [](double, double) { return 0.0; };
      m.family.drift_bound = [](double) { return 0.0; };
      m.family.sup_gap = [](double, double) { return 0.0; };
      break;
    case SyntheticKind::constant_drift:
      m.family.name = "constant_drift";
      m.family.drift = [c](double, double, double) { return c; };
      m.family.homogeneous_drift = [c](double, double) { return c; };
      m.family.drift_bound = [c](double) { return std::abs(c); };
      m.family.sup_gap = [](double, double) { return 0.0; };
      m.limit.a0 = [c](double) { return c; };
      break;
    case SyntheticKind::linear_drift:
      m.family.name = "linear_drift";
      m.family.drift = [](double, double x, double) {
        return std::clamp(-x, -10.0, 10.0);
      };
      m.family.homogeneous_drift = [](double x, double) {
        return std::clamp(-x, -10.0, 10.0);
      };
      m.family.drift_bound = [](double) { return 10.0; };
      m.family.sup_gap = [](double, double) { return 0.0; };
      m.limit.a0 = [](double x) { return std::clamp(-x, -10.0, 10.0); };
      break;
    default:
      throw std::invalid_argument("unknown synthetic kind");
  }
  return m;
}

namespace {

// Zero-drift family whose integrand oscillates around a nonconstant mean:
//   g(x) = x (1 + cos(2bx)).
// The time-integral functional converges to int_0^t zeta ds; the same limit
// arises through the antiderivative route with g0(x) = x^2/2.
ExperimentModel osc_mean_g_model(double x0) {
  ExperimentModel m = synthetic_model(SyntheticKind::zero_drift, 0.0, x0);
  m.family.name = "osc_mean_g";
  m.family.integrand_g = [](double x, double b) {
    return x * (1.0 + std::cos(2.0 * b * x));
  };
  m.limit.g0 = [](double x) { return x; };
  m.limit.g0_a4 = [](double x) { return 0.5 * x * x; };
  return m;
}

// Zero-drift family with g(x) = sqrt(2) b0 b cos(bx): the time integral has
// vanishing mean drift and quadratic variation 4 b0^2 t, so it converges to
// 2 b0 W(t).
ExperimentModel osc_wiener_g_model(double b0, double x0) {
  ExperimentModel m = synthetic_model(SyntheticKind::zero_drift, 0.0, x0);
  m.family.name = "osc_wiener_g";
  m.family.integrand_g = [b0](double x, double b) {
    return std::numbers::sqrt2 * b0 * b * std::cos(b * x);
  };
  m.limit.c0 = 0.0;
  m.limit.b0 = b0;
  return m;
}

// Zero-drift family with g = g0 + amp * b^{-1/2} cos(bx), g0 = 1/(1+x^2),
// F = F0 = atan: the perturbation vanishes in local L2, so the Ito-integral
// functional and the combined functional converge to their g0 forms.
ExperimentModel l2_perturbed_g_model(double amp, double x0) {
  ExperimentModel m = synthetic_model(SyntheticKind::zero_drift, 0.0, x0);
  m.family.name = "l2_perturbed_g";
  m.family.integrand_g = [amp](double x, double b) {
    return 1.0 / (1.0 + x * x) + amp * std::cos(b * x) / std::sqrt(b);
  };
  m.family.terminal_F = [](double x, double) { return std::atan(x); };
  m.limit.g0 = [](double x) { return 1.0 / (1.0 + x * x); };
  m.limit.F0 = [](double x) { return std::atan(x); };
  return m;
}

// Identity case: the driving family already solves the limit equation, so
// every marginal law matches up to scheme bias.
ExperimentModel identity_case_model(double x0) {
  return l2_perturbed_g_model(0.0, x0);
}

// g identically constant: the scale-weighted antiderivative grows linearly,
// so the vanishing-functional condition fails by construction.
ExperimentModel constant_g_model(double c, double x0) {
  ExperimentModel m = synthetic_model(SyntheticKind::zero_drift, 0.0, x0);
  m.family.name = "constant_g";
  m.family.integrand_g = [c](double, double) { return c; };
  m.limit.g0 = [](double) { return 0.0; };
  return m;
}

}  // namespace

ExperimentModel make_model(const std::string& name,
                           const std::map<std::string, double>& params) {
  const double gamma = require_param(params, "gamma", 0.5);
  const double x0 = require_param(params, "x0", 0.0);
  const double c = require_param(params, "c", 1.0);
  if (name == "example1") return example1_model(gamma, x0);
  if (name == "example2") return example2_model(gamma, x0);
  if (name == "zero_drift")
    return synthetic_model(SyntheticKind::zero_drift, 0.0, x0);
  if (name == "constant_drift")
    return synthetic_model(SyntheticKind::constant_drift, c, x0);
  if (name == "linear_drift")
    return synthetic_model(SyntheticKind::linear_drift, 0.0, x0);
  if (name == "osc_mean_g") return osc_mean_g_model(x0);
  if (name == "osc_wiener_g")
    return osc_wiener_g_model(require_param(params, "b0", 0.5), x0);
  if (name == "l2_perturbed_g")
    return l2_perturbed_g_model(require_param(params, "amp", 1.0), x0);
  if (name == "identity_case") return identity_case_model(x0);
  if (name == "constant_g") return constant_g_model(c, x0);
  throw std::invalid_argument("unknown model: " + name);
}

std::vector<std::string> model_names() {
  return {"example1",    "example2",       "zero_drift",  "constant_drift",
          "linear_drift", "osc_mean_g",    "osc_wiener_g", "l2_perturbed_g",
          "identity_case", "constant_g"};
}

}  // namespace sdelab
