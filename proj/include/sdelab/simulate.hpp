#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "sdelab/model.hpp"
#include "sdelab/rng.hpp"
#include "sdelab/transform.hpp"

namespace sdelab {

// Simulation controls shared by all ensemble runs.
struct SimParams {
  double dt = 1e-3;
  double horizon = 1.0;  // L
  std::size_t paths = 1000;
  std::uint64_t base_seed = 1;
  bool crn = true;                // share Wiener noise across a schedule
  std::size_t schedule_index = 0; // keys per-T noise when crn is off
  double x_max = 8.0;             // transform window for exit accounting
  bool allow_dt_override = false; // accept dt above the resolution rule
  unsigned workers = 0;           // 0 = hardware_concurrency
};

// The step-size rule dt <= min(1e-3, b^-2); runs above it are refused unless
// explicitly overridden.
double dt_rule(double b);
void check_dt(const SimParams& p, double b);

// Fully stored ensemble of Euler-Maruyama paths: per path, xi on the uniform
// time grid and the Wiener increments that produced it.
struct PathEnsemble {
  double dt = 0.0;
  double horizon = 0.0;
  std::size_t steps = 0;
  std::vector<std::vector<double>> xi;  // paths x (steps+1)
  std::vector<std::vector<double>> dW;  // paths x steps
  std::vector<std::uint8_t> exited;     // left [-x_max, x_max] at some step
  std::size_t exit_count = 0;

  std::size_t paths() const { return xi.size(); }
};

// Per-path functional time series on a stored ensemble:
//   beta1(t) = int_0^t g(xi) ds          (left-endpoint sums)
//   beta2(t) = int_0^t g(xi) dW          (Ito sums against stored increments)
//   zeta(t)  = G(xi(t))                  (table lookup)
//   I(t)     = F(xi(t)) + beta2(t)
struct FunctionalSample {
  std::vector<std::vector<double>> beta1;
  std::vector<std::vector<double>> beta2;
  std::vector<std::vector<double>> integral_I;
  std::vector<std::vector<double>> zeta;  // empty when no table was given
};

PathEnsemble simulate_ensemble(const ModelFamily& model, double b,
                               const SimParams& params);

PathEnsemble simulate_limit(const LimitModel& limit, const SimParams& params);

FunctionalSample compute_functionals(const PathEnsemble& ens,
                                     const ModelFamily& model, double b,
                                     const TransformTable* table);

// Theorem-4 limit functional on a stored limit ensemble:
//   2 ( int_{y0}^{zeta(t)} g0 dx - int_0^t g0(zeta) sigma0(zeta) dW ),
// with the antiderivative of g0 tabulated by quadrature.
std::vector<std::vector<double>> theorem4_limit_functional(
    const PathEnsemble& limit_ens, const LimitModel& limit, double y_span);

// ---------------------------------------------------------------------------
// Streaming evaluation: one pass over the paths computing marginal samples
// and path statistics without storing trajectories. Identical recursion and
// noise keys as the stored simulator, so results agree bit for bit.
// ---------------------------------------------------------------------------

struct ProbeRequest {
  std::vector<double> times;  // marginal sample times (multiples of dt)
  bool zeta = false;          // needs a table
  bool beta1 = false;
  bool beta2 = false;
  bool integral_I = false;
  bool sup_abs_beta1 = false;
  bool sup_zeta_sq = false;        // needs a table
  double coarse_dt = 0.0;          // record zeta on this time grid (needs table)
  std::vector<double> occupation_lambdas;  // zeta-occupation of [0, lambda]
  bool gsq_time_integral = false;  // int_0^L g^2(xi) ds
};

struct EnsembleStats {
  std::vector<double> times;
  // Per time, per path; paths that exited the window are dropped.
  std::vector<std::vector<double>> zeta;
  std::vector<std::vector<double>> beta1;
  std::vector<std::vector<double>> beta2;
  std::vector<std::vector<double>> integral_I;
  std::vector<double> sup_abs_beta1;           // per path
  std::vector<double> sup_zeta_sq;             // per path
  std::vector<std::vector<double>> coarse_zeta;  // per path, coarse grid
  std::vector<std::vector<double>> occupation;   // per lambda, per path
  std::vector<double> gsq_time_integral;        // per path
  std::size_t exit_count = 0;
  std::size_t surviving = 0;
};

EnsembleStats run_xi_ensemble(const ModelFamily& model, double b,
                              const TransformTable* table,
                              const SimParams& params,
                              const ProbeRequest& probe);

// Streaming run of the limit equation; zeta probes read the state directly
// and g/F default to the limit coefficients.
EnsembleStats run_limit_ensemble(const LimitModel& limit,
                                 const SimParams& params,
                                 const ProbeRequest& probe);

// CSV path dump (columns: path_id, t, xi, dW).
void dump_paths_csv(const PathEnsemble& ens, std::ostream& os);

}  // namespace sdelab
