#pragma once

#include <map>
#include <string>
#include <vector>

#include "sdelab/conditions.hpp"
#include "sdelab/model.hpp"
#include "sdelab/simulate.hpp"
#include "sdelab/stats.hpp"

namespace sdelab {

// Step-size rules selectable from the config file.
enum class DtMode {
  rule,       // min(1e-3, b^-2)
  rule_pow2,  // min(2^-10, b^-2); keeps coarse sampling on exact step indices
  fixed,
};

struct ExperimentConfig {
  // [model]
  std::string model_name = "example1";
  std::map<std::string, double> model_params;

  // [schedule]
  ParamSchedule schedule = ParamSchedule::pow2(3, 10, 0.5);

  // [sim]
  DtMode dt_mode = DtMode::rule;
  double dt_fixed = 1e-3;
  double horizon = 1.0;
  std::size_t paths = 10000;
  std::uint64_t base_seed = 20170829;
  bool crn = true;
  double x_max = 8.0;
  bool allow_dt_override = false;
  unsigned workers = 0;

  // [transform]
  double transform_tol = 1e-7;

  // [conditions]
  ConditionConfig conditions;
  std::vector<std::string> checks = {"A0", "A1", "growth", "A2"};
  std::string a3_family = "thm2";  // thm2 | thm3 | thm6 | ahat

  // [stats]
  StatsConfig stats;
  bool skip_hypotheses = false;

  // [output]
  std::string out_dir = "out";

  double dt_for(double b) const;
  ExperimentModel make() const;

  // Fixed-order serialization of every effective field; two configs with the
  // same canonical text behave identically.
  std::string canonical_text() const;
  std::string hash() const;  // FNV-1a 64 over the canonical text, hex
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

std::string fnv1a_hex(const std::string& text);

}  // namespace sdelab
