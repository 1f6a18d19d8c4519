#include "sdelab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace sdelab {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

bool nonincreasing_with_slack(const std::vector<double>& v, int slack) {
  if (v.size() < 2) return true;
  int bad = 0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i)
    if (v[i + 1] > v[i]) ++bad;
  return bad <= slack;
}

}  // namespace

MarginalSample MarginalSample::from(double time, std::vector<double> values) {
  if (values.size() < 2)
    throw std::invalid_argument("marginal sample needs at least two values");
  std::sort(values.begin(), values.end());
  return MarginalSample{time, std::move(values)};
}

double ks_critical_coefficient(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("alpha must lie in (0, 1)");
  return std::sqrt(-std::log(alpha / 2.0) / 2.0);
}

KsResult ks_two_sample(const MarginalSample& a, const MarginalSample& b,
                       double alpha) {
  const std::size_t n = a.n(), m = b.n();
  if (n == 0 || m == 0) throw std::invalid_argument("empty sample");
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < n && j < m) {
    const double x = std::min(a.values[i], b.values[j]);
    while (i < n && a.values[i] <= x) ++i;
    while (j < m && b.values[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n -
                             static_cast<double>(j) / m));
  }
  KsResult r;
  r.distance = d;
  r.critical = ks_critical_coefficient(alpha) *
               std::sqrt(static_cast<double>(n + m) /
                         (static_cast<double>(n) * static_cast<double>(m)));
  return r;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double w = pos - static_cast<double>(lo);
  return values[lo] + w * (values[hi] - values[lo]);
}

double median(std::vector<double> values) {
  return quantile(std::move(values), 0.5);
}

double mean_stat(const std::vector<double>& values) {
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

double second_moment_stat(const std::vector<double>& values) {
  double s = 0.0;
  for (double v : values) s += v * v;
  return s / static_cast<double>(values.size());
}

double bootstrap_se(const std::vector<double>& values,
                    double (*stat)(const std::vector<double>&),
                    std::size_t resamples, std::uint64_t seed) {
  if (values.size() < 2 || resamples < 2)
    throw std::invalid_argument("bootstrap needs >= 2 values and resamples");
  const std::size_t n = values.size();
  std::vector<double> stats(resamples);
  std::vector<double> resample(n);
  for (std::size_t r = 0; r < resamples; ++r) {
    const std::uint64_t origin =
        rng::stream_origin(seed, rng::kStreamBootstrap, r);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = rng::uniform(rng::word(origin, i));
      resample[i] = values[static_cast<std::size_t>(u * n)];
    }
    stats[r] = stat(resample);
  }
  const double mean = mean_stat(stats);
  double var = 0.0;
  for (double s : stats) var += (s - mean) * (s - mean);
  return std::sqrt(var / static_cast<double>(resamples - 1));
}

TheoremQuantity quantity_for_theorem(int theorem) {
  switch (theorem) {
    case 2: return TheoremQuantity::zeta;
    case 3: return TheoremQuantity::beta1;
    case 4: return TheoremQuantity::beta1_tilde;
    case 5: return TheoremQuantity::beta1_wiener;
    case 6: return TheoremQuantity::beta2;
    case 7: return TheoremQuantity::integral_I;
    default:
      throw std::invalid_argument(
          "theorem must be 2..7 (theorem 1 runs the moment suite)");
  }
}

std::string to_string(TheoremQuantity q) {
  switch (q) {
    case TheoremQuantity::zeta: return "zeta";
    case TheoremQuantity::beta1: return "beta1";
    case TheoremQuantity::beta1_tilde: return "beta1_tilde";
    case TheoremQuantity::beta1_wiener: return "beta1_wiener";
    case TheoremQuantity::beta2: return "beta2";
    default: return "I";
  }
}

void ConvergenceReport::write_csv(std::ostream& os,
                                  const std::string& config_hash) const {
  os << "# config_hash=" << config_hash << "\n";
  os << "quantity,T_index,b_T,time,ks,critical,pass\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const ConvergenceRow& r = rows[i];
    if (degenerate) {
      os << quantity << ',' << i << ',' << fmt17(r.b) << ",,"
         << fmt17(r.sup_stat) << ',' << fmt17(sup_threshold) << ','
         << (r.sup_stat < sup_threshold ? 1 : 0) << "\n";
      continue;
    }
    for (std::size_t t = 0; t < times.size(); ++t) {
      const bool row_pass = r.ks[t] < std::max(r.critical[t], ks_floor);
      os << quantity << ',' << i << ',' << fmt17(r.b) << ','
         << fmt17(times[t]) << ',' << fmt17(r.ks[t]) << ','
         << fmt17(r.critical[t]) << ',' << (row_pass ? 1 : 0) << "\n";
    }
  }
}

void ConvergenceReport::write_json(std::ostream& os,
                                   const std::string& config_hash) const {
  nlohmann::ordered_json doc;
  doc["config_hash"] = config_hash;
  doc["quantity"] = quantity;
  doc["note"] = note;
  doc["degenerate"] = degenerate;
  doc["times"] = times;
  auto& jr = doc["rows"];
  for (const auto& r : rows) {
    nlohmann::ordered_json row;
    row["b"] = r.b;
    row["ks"] = r.ks;
    row["critical"] = r.critical;
    row["sup_stat"] = r.sup_stat;
    row["exit_count"] = r.exit_count;
    jr.push_back(std::move(row));
  }
  doc["final_below"] = final_below;
  doc["trend"] = trend;
  doc["pass"] = pass;
  os << doc.dump(2) << "\n";
}

namespace {

// Limit-side marginal samples per configured time.
std::vector<std::vector<double>> limit_samples(TheoremQuantity quantity,
                                               const ExperimentModel& em,
                                               const SimParams& sim,
                                               const StatsConfig& cfg) {
  SimParams lp = sim;
  lp.dt = std::min(sim.dt, 1e-3);
  const std::size_t nt = cfg.times.size();

  if (quantity == TheoremQuantity::beta1_wiener) {
    if (!em.limit.b0.has_value())
      throw std::invalid_argument(
          "theorem 5 check needs b0 in the limit model");
    const double b0 = *em.limit.b0;
    std::vector<std::vector<double>> out(nt);
    for (std::size_t t = 0; t < nt; ++t) {
      out[t].resize(lp.paths);
      const double sd = 2.0 * std::abs(b0) * std::sqrt(cfg.times[t]);
      for (std::size_t j = 0; j < lp.paths; ++j) {
        rng::NormalStream ns(lp.base_seed, rng::kStreamGauss + t, j);
        out[t][j] = sd * ns.next();
      }
    }
    return out;
  }

  if (quantity == TheoremQuantity::beta1_tilde) {
    if (!em.limit.g0_a4)
      throw std::invalid_argument(
          "theorem 4 check needs the antiderivative-route g0");
    PathEnsemble ens = simulate_limit(em.limit, lp);
    const double span = 2.0 * sim.x_max + std::abs(em.limit.y0) + 4.0;
    const auto series = theorem4_limit_functional(
        ens, em.limit.g0_a4, em.limit.sigma0, em.limit.y0, span);
    std::vector<std::vector<double>> out(nt);
    for (std::size_t t = 0; t < nt; ++t) {
      const auto k = static_cast<std::size_t>(
          std::llround(cfg.times[t] / ens.dt));
      out[t].resize(series.size());
      for (std::size_t j = 0; j < series.size(); ++j)
        out[t][j] = series[j][k];
    }
    return out;
  }

  ProbeRequest probe;
  probe.times = cfg.times;
  switch (quantity) {
    case TheoremQuantity::zeta: probe.zeta = true; break;
    case TheoremQuantity::beta1: probe.beta1 = true; break;
    case TheoremQuantity::beta2: probe.beta2 = true; break;
    case TheoremQuantity::integral_I: probe.integral_I = true; break;
    default: break;
  }
  EnsembleStats st = run_limit_ensemble(em.limit, lp, probe);
  switch (quantity) {
    case TheoremQuantity::zeta: return st.zeta;
    case TheoremQuantity::beta1: return st.beta1;
    case TheoremQuantity::beta2: return st.beta2;
    default: return st.integral_I;
  }
}

bool is_point_mass(const std::vector<double>& sample) {
  const auto [mn, mx] = std::minmax_element(sample.begin(), sample.end());
  return *mx - *mn < 1e-12;
}

}  // namespace

ConvergenceReport theorem_check(TheoremQuantity quantity,
                                const ExperimentModel& em,
                                const ParamSchedule& schedule,
                                const std::vector<TransformTable>& tables,
                                const SimParams& sim, const StatsConfig& cfg) {
  if (cfg.times.empty()) throw std::invalid_argument("no sample times");
  ConvergenceReport report;
  report.quantity = to_string(quantity);
  report.times = cfg.times;
  report.ks_floor = cfg.ks_floor;
  report.sup_threshold = cfg.sup_threshold;
  report.note =
      "weak convergence is checked through marginal KS distances and a sup "
      "functional; a proxy of this kind can miss failure modes outside the "
      "sampled marginals";

  const bool needs_table = quantity == TheoremQuantity::zeta;
  if (needs_table && tables.size() != schedule.size())
    throw std::invalid_argument("zeta check needs one table per T");

  const auto limits = limit_samples(quantity, em, sim, cfg);
  report.degenerate = is_point_mass(limits.back());
  if (report.degenerate)
    report.note += "; degenerate limit detected, switched to quantile mode";

  const bool beta1_family = quantity == TheoremQuantity::beta1 ||
                            quantity == TheoremQuantity::beta1_tilde ||
                            quantity == TheoremQuantity::beta1_wiener;

  ProbeRequest probe;
  probe.times = cfg.times;
  if (quantity == TheoremQuantity::zeta) {
    probe.zeta = true;
    probe.sup_zeta_sq = true;
  } else if (beta1_family) {
    probe.beta1 = true;
    probe.sup_abs_beta1 = true;
  } else if (quantity == TheoremQuantity::beta2) {
    probe.beta2 = true;
  } else {
    probe.integral_I = true;
  }

  for (std::size_t ti = 0; ti < schedule.size(); ++ti) {
    const double b = schedule.values[ti];
    SimParams sp = sim;
    sp.schedule_index = ti;
    sp.dt = std::min(sim.dt, dt_rule(b));
    const TransformTable* table = needs_table ? &tables[ti] : nullptr;
    EnsembleStats st = run_xi_ensemble(em.family, b, table, sp, probe);

    const std::vector<std::vector<double>>* marg = nullptr;
    if (quantity == TheoremQuantity::zeta) marg = &st.zeta;
    else if (beta1_family) marg = &st.beta1;
    else if (quantity == TheoremQuantity::beta2) marg = &st.beta2;
    else marg = &st.integral_I;

    ConvergenceRow row;
    row.b = b;
    row.exit_count = st.exit_count;
    if (quantity == TheoremQuantity::zeta)
      row.sup_stat = quantile(
          [&] {
            std::vector<double> sups(st.sup_zeta_sq.size());
            for (std::size_t j = 0; j < sups.size(); ++j)
              sups[j] = std::sqrt(st.sup_zeta_sq[j]);
            return sups;
          }(),
          cfg.sup_quantile);
    else if (beta1_family)
      row.sup_stat = quantile(st.sup_abs_beta1, cfg.sup_quantile);
    else {
      std::vector<double> finals = marg->back();
      for (double& v : finals) v = std::abs(v);
      row.sup_stat = quantile(std::move(finals), cfg.sup_quantile);
    }
    if (!report.degenerate) {
      for (std::size_t t = 0; t < cfg.times.size(); ++t) {
        const auto a = MarginalSample::from(cfg.times[t], (*marg)[t]);
        const auto l = MarginalSample::from(cfg.times[t], limits[t]);
        const KsResult ks = ks_two_sample(a, l, cfg.alpha);
        row.ks.push_back(ks.distance);
        row.critical.push_back(ks.critical);
      }
    }
    report.rows.push_back(std::move(row));
  }

  if (report.degenerate) {
    std::vector<double> sups;
    for (const auto& r : report.rows) sups.push_back(r.sup_stat);
    report.final_below = sups.back() < cfg.sup_threshold;
    report.trend = nonincreasing_with_slack(sups, cfg.trend_slack);
  } else {
    const ConvergenceRow& last = report.rows.back();
    report.final_below = true;
    for (std::size_t t = 0; t < cfg.times.size(); ++t)
      if (!(last.ks[t] < std::max(last.critical[t], cfg.ks_floor)))
        report.final_below = false;
    std::vector<double> ks_final_time;
    for (const auto& r : report.rows) ks_final_time.push_back(r.ks.back());
    report.trend = nonincreasing_with_slack(ks_final_time, cfg.trend_slack);
  }
  report.pass = report.final_below && report.trend;
  return report;
}

void MomentReport::write_csv(std::ostream& os,
                             const std::string& config_hash) const {
  os << "# config_hash=" << config_hash << "\n";
  os << "metric,T_index,b_T,value\n";
  for (std::size_t i = 0; i < b_values.size(); ++i)
    os << "sup_sq_mean," << i << ',' << fmt17(b_values[i]) << ','
       << fmt17(sup_sq_mean[i]) << "\n";
  for (std::size_t gi = 0; gi < gaps.size(); ++gi)
    os << "ratio4_gap_" << fmt17(gaps[gi]) << ",,," << fmt17(ratio4_by_gap[gi])
       << "\n";
  for (std::size_t li = 0; li < occupation_lambdas.size(); ++li)
    for (std::size_t i = 0; i < b_values.size(); ++i)
      os << "occupation_" << fmt17(occupation_lambdas[li]) << ',' << i << ','
         << fmt17(b_values[i]) << ',' << fmt17(occupation_mean[li][i]) << "\n";
}

void MomentReport::write_json(std::ostream& os,
                              const std::string& config_hash) const {
  nlohmann::ordered_json doc;
  doc["config_hash"] = config_hash;
  doc["b_values"] = b_values;
  doc["sup_sq_mean"] = sup_sq_mean;
  doc["sup_sq_se"] = sup_sq_se;
  doc["sup_sq_spread"] = sup_sq_spread;
  doc["gaps"] = gaps;
  doc["ratio4_by_gap"] = ratio4_by_gap;
  doc["occupation_lambdas"] = occupation_lambdas;
  doc["occupation_mean"] = occupation_mean;
  doc["occupation_c"] = occupation_c;
  doc["occupation_max_resid"] = occupation_max_resid;
  doc["uniform_pass"] = uniform_pass;
  doc["ratio4_pass"] = ratio4_pass;
  doc["occupation_pass"] = occupation_pass;
  doc["pass"] = pass;
  os << doc.dump(2) << "\n";
}

MomentReport moment_suite(const ExperimentModel& em,
                          const ParamSchedule& schedule,
                          const std::vector<TransformTable>& tables,
                          const SimParams& sim, const MomentConfig& cfg) {
  if (tables.size() != schedule.size())
    throw std::invalid_argument("moment suite needs one table per T");
  if (cfg.gaps.empty()) throw std::invalid_argument("no gaps configured");
  const double coarse = *std::min_element(cfg.gaps.begin(), cfg.gaps.end());

  MomentReport rep;
  rep.b_values = schedule.values;
  rep.gaps = cfg.gaps;
  rep.occupation_lambdas = cfg.occupation_lambdas;
  rep.occupation_mean.assign(cfg.occupation_lambdas.size(), {});
  rep.ratio4_by_gap.assign(cfg.gaps.size(), 0.0);

  ProbeRequest probe;
  probe.sup_zeta_sq = true;
  probe.coarse_dt = coarse;
  probe.occupation_lambdas = cfg.occupation_lambdas;

  for (std::size_t ti = 0; ti < schedule.size(); ++ti) {
    const double b = schedule.values[ti];
    SimParams sp = sim;
    sp.schedule_index = ti;
    sp.dt = std::min(sim.dt, dt_rule(b));
    EnsembleStats st = run_xi_ensemble(em.family, b, &tables[ti], sp, probe);
    if (st.sup_zeta_sq.empty())
      throw std::runtime_error("every path exited the transform window");

    rep.sup_sq_mean.push_back(mean_stat(st.sup_zeta_sq));
    rep.sup_sq_se.push_back(bootstrap_se(st.sup_zeta_sq, mean_stat,
                                         cfg.bootstrap_resamples,
                                         sim.base_seed + ti));
    for (std::size_t li = 0; li < cfg.occupation_lambdas.size(); ++li)
      rep.occupation_mean[li].push_back(mean_stat(st.occupation[li]));

    for (std::size_t gi = 0; gi < cfg.gaps.size(); ++gi) {
      const auto stride = static_cast<std::size_t>(
          std::llround(cfg.gaps[gi] / coarse));
      if (stride == 0 ||
          std::abs(static_cast<double>(stride) * coarse - cfg.gaps[gi]) >
              1e-12)
        throw std::invalid_argument("gaps must be multiples of the smallest");
      double sum = 0.0;
      std::size_t count = 0;
      for (const auto& path : st.coarse_zeta) {
        for (std::size_t k = 0; k + stride < path.size(); k += stride) {
          const double d = path[k + stride] - path[k];
          sum += d * d * d * d;
          ++count;
        }
      }
      const double ratio =
          sum / static_cast<double>(count) / (cfg.gaps[gi] * cfg.gaps[gi]);
      rep.ratio4_by_gap[gi] = std::max(rep.ratio4_by_gap[gi], ratio);
    }
  }

  // Single linear fit occ ~ C * lambda across every (lambda, T) pair.
  double num = 0.0, den = 0.0;
  for (std::size_t li = 0; li < cfg.occupation_lambdas.size(); ++li)
    for (double occ : rep.occupation_mean[li]) {
      num += occ * cfg.occupation_lambdas[li];
      den += cfg.occupation_lambdas[li] * cfg.occupation_lambdas[li];
    }
  rep.occupation_c = den > 0.0 ? num / den : 0.0;
  for (std::size_t li = 0; li < cfg.occupation_lambdas.size(); ++li)
    for (double occ : rep.occupation_mean[li]) {
      const double fit = rep.occupation_c * cfg.occupation_lambdas[li];
      if (fit > 0.0)
        rep.occupation_max_resid =
            std::max(rep.occupation_max_resid, std::abs(occ - fit) / fit);
    }

  const auto [mn, mx] =
      std::minmax_element(rep.sup_sq_mean.begin(), rep.sup_sq_mean.end());
  rep.sup_sq_spread = *mn > 0.0 ? *mx / *mn : 0.0;
  rep.uniform_pass = rep.sup_sq_spread <= cfg.uniform_factor;
  rep.ratio4_pass =
      std::all_of(rep.ratio4_by_gap.begin(), rep.ratio4_by_gap.end(),
                  [&](double r) { return r <= cfg.ratio4_bound; });
  rep.occupation_pass = rep.occupation_max_resid < cfg.occupation_resid;
  rep.pass = rep.uniform_pass && rep.ratio4_pass && rep.occupation_pass;
  return rep;
}

}  // namespace sdelab
