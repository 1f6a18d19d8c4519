#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sdelab/conditions.hpp"
#include "sdelab/model.hpp"
#include "sdelab/simulate.hpp"

namespace sdelab {

// Sorted sample of one per-path scalar at a fixed time.
struct MarginalSample {
  double time = 0.0;
  std::vector<double> values;  // ascending

  static MarginalSample from(double time, std::vector<double> values);
  std::size_t n() const { return values.size(); }
};

struct KsResult {
  double distance = 0.0;
  double critical = 0.0;  // c(alpha) sqrt((n+m)/(nm))
};

// Two-sample Kolmogorov-Smirnov distance over the merged support, with the
// asymptotic critical value at level alpha.
KsResult ks_two_sample(const MarginalSample& a, const MarginalSample& b,
                       double alpha = 0.01);

// c(alpha) = sqrt(-ln(alpha/2)/2); c(0.01) = 1.628.
double ks_critical_coefficient(double alpha);

double median(std::vector<double> values);
double quantile(std::vector<double> values, double q);

// Bootstrap standard error of a statistic of one scalar-per-path sample.
double bootstrap_se(const std::vector<double>& values,
                    double (*stat)(const std::vector<double>&),
                    std::size_t resamples, std::uint64_t seed);

double mean_stat(const std::vector<double>& values);
double second_moment_stat(const std::vector<double>& values);

// --- theorem verification ---------------------------------------------------

enum class TheoremQuantity {
  zeta,          // Theorem 2
  beta1,         // Theorem 3
  beta1_tilde,   // Theorem 4
  beta1_wiener,  // Theorem 5
  beta2,         // Theorem 6
  integral_I,    // Theorem 7
};

TheoremQuantity quantity_for_theorem(int theorem);
std::string to_string(TheoremQuantity q);

struct StatsConfig {
  std::vector<double> times = {0.25, 0.5, 1.0};
  double alpha = 0.01;
  double ks_floor = 0.03;        // shared scheme-bias + MC budget
  double sup_quantile = 0.5;     // quantile reported in degenerate mode
  double sup_threshold = 0.05;   // final-value gate in degenerate mode
  int trend_slack = 2;           // non-increasing on >= K-1-slack steps
};

// Per-T outcome of one theorem check.
struct ConvergenceRow {
  double b = 0.0;
  std::vector<double> ks;        // per configured time (KS mode)
  std::vector<double> critical;
  double sup_stat = 0.0;         // quantile of sup functional (either mode)
  std::size_t exit_count = 0;
};

struct ConvergenceReport {
  std::string quantity;
  bool degenerate = false;  // quantile mode (point-mass limit)
  std::vector<double> times;
  std::vector<ConvergenceRow> rows;
  double ks_floor = 0.03;
  double sup_threshold = 0.05;
  bool final_below = false;  // last row under threshold at every time
  bool trend = false;        // non-increasing per the slack rule
  bool pass = false;
  std::string note;  // marginal+sup proxy disclosure and mode switches

  void write_csv(std::ostream& os, const std::string& config_hash) const;
  void write_json(std::ostream& os, const std::string& config_hash) const;
};

// Runs the designated functional over the schedule and compares against the
// theorem's limit law. The caller is responsible for hypothesis gating.
ConvergenceReport theorem_check(TheoremQuantity quantity,
                                const ExperimentModel& exp_model,
                                const ParamSchedule& schedule,
                                const std::vector<TransformTable>& tables,
                                const SimParams& sim, const StatsConfig& cfg);

// --- Theorem 1 / Lemma 1 moment suite ----------------------------------------

struct MomentReport {
  std::vector<double> b_values;
  std::vector<double> sup_sq_mean;     // E sup_{t<=L} zeta^2 per T
  std::vector<double> sup_sq_se;       // bootstrap SE
  std::vector<double> ratio4_by_gap;   // max over T of E[dzeta^4]/dt^2, per gap
  std::vector<double> gaps;
  std::vector<std::vector<double>> occupation_mean;  // per lambda, per T
  std::vector<double> occupation_lambdas;
  double occupation_c = 0.0;        // single fitted linear constant
  double occupation_max_resid = 0.0; // max |occ - C lambda| / (C lambda)
  double sup_sq_spread = 0.0;       // max/min of sup_sq_mean
  bool uniform_pass = false;        // spread <= 2
  bool ratio4_pass = false;         // every ratio <= 6
  bool occupation_pass = false;     // max residual < 0.3
  bool pass = false;

  void write_csv(std::ostream& os, const std::string& config_hash) const;
  void write_json(std::ostream& os, const std::string& config_hash) const;
};

struct MomentConfig {
  std::vector<double> gaps = {0.0625, 0.015625};  // 2^-4, 2^-6
  std::vector<double> occupation_lambdas = {0.4, 0.2, 0.1, 0.05};
  double uniform_factor = 2.0;
  double ratio4_bound = 6.0;
  double occupation_resid = 0.3;
  std::size_t bootstrap_resamples = 200;
};

MomentReport moment_suite(const ExperimentModel& exp_model,
                          const ParamSchedule& schedule,
                          const std::vector<TransformTable>& tables,
                          const SimParams& sim, const MomentConfig& cfg);

}  // namespace sdelab
