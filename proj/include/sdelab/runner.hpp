#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sdelab/config.hpp"

namespace sdelab {

// Exit-code contract shared with the CLI: 0 pass, 1 verdict failure,
// 2 usage/config error.
inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitUsage = 2;

std::vector<TransformTable> build_tables(const ExperimentModel& em,
                                         const ParamSchedule& schedule,
                                         double x_max, double tol);

// Assembles the configured condition checks across the schedule.
ConditionReport run_condition_audit(const ExperimentConfig& cfg,
                                    const ExperimentModel& em,
                                    const std::vector<TransformTable>& tables,
                                    const std::vector<std::string>& checks,
                                    const std::string& a3_family);

// The hypothesis set a given theorem relies on (theorem 1 needs only (A1)).
ConditionReport hypothesis_audit(const ExperimentConfig& cfg,
                                 const ExperimentModel& em,
                                 const std::vector<TransformTable>& tables,
                                 int theorem);

int cmd_check(const ExperimentConfig& cfg, std::ostream& log);
int cmd_verify(const ExperimentConfig& cfg, int theorem, std::ostream& log);
int cmd_example(const std::string& name, const std::string& out_dir,
                unsigned workers, std::optional<std::uint64_t> seed,
                std::ostream& log);
int cmd_dump_transform(const ExperimentConfig& cfg, double b,
                       const std::string& out_file, std::ostream& log);
int cmd_simulate_dump(const ExperimentConfig& cfg, double b,
                      std::size_t paths, const std::string& out_file,
                      std::ostream& log);

// Built-in configs reproducing the two worked examples end to end.
ExperimentConfig example_config(const std::string& name);

}  // namespace sdelab
