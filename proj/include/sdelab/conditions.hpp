#pragma once

#include <map>
#include <string>
#include <vector>

#include "sdelab/model.hpp"
#include "sdelab/transform.hpp"

namespace sdelab {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
};

// Finite union of closed intervals; normalized (sorted, disjoint) on use.
using BorelSet = std::vector<Interval>;

double borel_measure(const BorelSet& b);

struct ConditionConfig {
  double N = 4.0;  // window radius for sup norms
  double L = 1.0;  // time horizon of the A0 integral
  std::size_t t_nodes = 2049;  // fallback A0 time grid (made odd)
  std::size_t x_nodes = 4097;  // fallback A0 sup grid over [-N, N]
  std::size_t a1_t_nodes = 65;
  bool a1_probe_inverse_b = true;  // add t = 1/b to the A1 time grid
  std::vector<BorelSet> b_sets = {{{0.0, 0.1}}, {{-0.2, 0.2}}};
  double psi_c1 = 54.598150033144236;    // e^4; psi(lambda) = c1 lambda
  double m = 1.0;                        // growth exponent in (A2)
  double alpha = 1.0;                    // growth-bound exponent
  double growth_c = 0.1353352832366127;  // e^-2
  double a1_c = 110.19630006628847;      // 2 e^4 + 1
  double a3_threshold = 0.1;
  double trend_ratio = 0.1;
  int trend_slack = 1;        // non-decreasing steps tolerated by the trend
  double zero_floor = 1e-10;  // sequences below this count as converged
};

enum class Verdict { pass, fail, inconclusive };

std::string to_string(Verdict v);

// Decaying-trend rule for limit-type conditions: final below ratio * first
// and decreasing on all but `slack` steps; sequences that end below the
// floor pass outright. Scale-free by construction.
bool trend_decay(const std::vector<double>& values, const ConditionConfig& cfg);

// One audited condition across the schedule.
struct ConditionEntry {
  std::string name;
  std::vector<double> values;  // headline scalar per T
  std::map<std::string, std::vector<double>> extra;
  double threshold = 0.0;
  bool trend = false;     // meaningful for limit-type conditions only
  Verdict verdict = Verdict::inconclusive;
  std::string note;
};

struct ConditionReport {
  std::vector<double> b_values;
  std::vector<ConditionEntry> entries;
  std::string window_note;  // what was actually checked (honesty header)

  bool all_pass() const;
  const ConditionEntry* find(const std::string& name) const;
  void write_csv(std::ostream& os, const std::string& config_hash) const;
  void write_json(std::ostream& os, const std::string& config_hash) const;
};

// --- single-parameter checks -----------------------------------------------

// int_0^L sup_x |a(t,x) - ahat(x)| dt, from the closed-form envelope when the
// model provides one, otherwise a windowed grid sup (documented in the note).
double check_A0(const ModelFamily& model, double b, const ConditionConfig& cfg);

struct A1Result {
  double c_fitted = 0.0;      // smallest admissible C over the sampled grid
  double max_violation = 0.0; // max of expr - C_cfg (1 + |G|^2); <= 0 passes
  double g_at_x0 = 0.0;
};
A1Result check_A1(const ModelFamily& model, const TransformTable& table,
                  double b, const ConditionConfig& cfg);

// min over grid nodes |x| >= h of |G(x)| / |x|^alpha.
double check_growth(const TransformTable& table, const ConditionConfig& cfg);

struct A2Result {
  double max_ratio = 0.0;  // against psi(lambda) = c1 lambda; <= 1 passes
  double c1_fitted = 0.0;  // smallest c1 that would make every ratio <= 1
};
A2Result check_A2(const TransformTable& table, const ConditionConfig& cfg);

// sup_{|x|<=N} |f'(x) int_0^x q/f' dv| for tabulated q values.
double check_A3_sup(const TransformTable& table,
                    const std::vector<double>& q_vals,
                    const ConditionConfig& cfg);

struct A4Result {
  double c_n = 0.0;     // boundedness constant of the weighted antiderivative
  double a4_sup = 0.0;  // sup |f' int g/f' - g0(G) G'|
};
A4Result check_A4(const TransformTable& table, const ModelFamily& model,
                  const std::function<double(double)>& g0, double b,
                  const ConditionConfig& cfg);

struct Theorem5Result {
  double centered_sup = 0.0;  // sup |int_0^x [f' int g/f' - c0] du|
  double q_sup = 0.0;         // A3 sup of [f' int g/f' - c0]^2 - b0^2
};
Theorem5Result check_theorem5(const TransformTable& table,
                              const NestedTransform& nested, double c0,
                              double b0, const ConditionConfig& cfg);

// Least-squares (c0, b0) from the nested transform at one parameter value.
std::pair<double, double> estimate_c0_b0(const TransformTable& table,
                                         const NestedTransform& nested,
                                         const ConditionConfig& cfg);

// sup_{|x|<=N} |F(x) - F0(G(x))| (Theorem 7 hypothesis).
double check_F0_sup(const ModelFamily& model, const TransformTable& table,
                    const std::function<double(double)>& F0, double b,
                    const ConditionConfig& cfg);

// --- tabulated q builders for the A3 family --------------------------------

std::vector<double> q_thm2_drift(const TransformTable& table,
                                 const ModelFamily& model,
                                 const LimitModel& limit, double b);
std::vector<double> q_thm2_diffusion(const TransformTable& table,
                                     const LimitModel& limit);
std::vector<double> q_thm3(const TransformTable& table,
                           const ModelFamily& model, const LimitModel& limit,
                           double b);
std::vector<double> q_ahat(const TransformTable& table,
                           const ModelFamily& model, double b);
std::vector<double> q_thm6(const TransformTable& table,
                           const ModelFamily& model, const LimitModel& limit,
                           double b);

}  // namespace sdelab
