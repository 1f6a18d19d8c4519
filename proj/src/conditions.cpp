#include "sdelab/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "json.hpp"
#include "sdelab/quadrature.hpp"

namespace sdelab {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

BorelSet normalized(const BorelSet& b) {
  BorelSet s;
  for (const Interval& iv : b) {
    if (!(iv.hi >= iv.lo))
      throw std::invalid_argument("interval with hi < lo in a Borel set");
    s.push_back(iv);
  }
  std::sort(s.begin(), s.end(),
            [](const Interval& a, const Interval& c) { return a.lo < c.lo; });
  BorelSet merged;
  for (const Interval& iv : s) {
    if (!merged.empty() && iv.lo <= merged.back().hi)
      merged.back().hi = std::max(merged.back().hi, iv.hi);
    else
      merged.push_back(iv);
  }
  return merged;
}

}  // namespace

double borel_measure(const BorelSet& b) {
  double total = 0.0;
  for (const Interval& iv : normalized(b)) total += iv.length();
  return total;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    default: return "inconclusive";
  }
}

bool trend_decay(const std::vector<double>& values,
                 const ConditionConfig& cfg) {
  if (values.empty()) return false;
  const double first = std::abs(values.front());
  const double final = std::abs(values.back());
  if (final <= cfg.zero_floor) return true;
  if (values.size() < 2) return false;
  int non_decreasing = 0;
  for (std::size_t i = 0; i + 1 < values.size(); ++i)
    if (!(std::abs(values[i + 1]) < std::abs(values[i]))) ++non_decreasing;
  return final < cfg.trend_ratio * first && non_decreasing <= cfg.trend_slack;
}

bool ConditionReport::all_pass() const {
  return std::all_of(entries.begin(), entries.end(), [](const auto& e) {
    return e.verdict == Verdict::pass;
  });
}

const ConditionEntry* ConditionReport::find(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return &e;
  return nullptr;
}

void ConditionReport::write_csv(std::ostream& os,
                                const std::string& config_hash) const {
  os << "# config_hash=" << config_hash << "\n";
  os << "condition,T_index,b_T,value\n";
  for (const auto& e : entries)
    for (std::size_t i = 0; i < e.values.size(); ++i)
      os << e.name << ',' << i << ',' << fmt17(b_values[i]) << ','
         << fmt17(e.values[i]) << "\n";
}

void ConditionReport::write_json(std::ostream& os,
                                 const std::string& config_hash) const {
  nlohmann::ordered_json doc;
  doc["config_hash"] = config_hash;
  doc["window_note"] = window_note;
  doc["b_values"] = b_values;
  auto& conds = doc["conditions"];
  for (const auto& e : entries) {
    nlohmann::ordered_json je;
    je["values"] = e.values;
    je["threshold"] = e.threshold;
    je["trend"] = e.trend;
    je["verdict"] = to_string(e.verdict);
    if (!e.note.empty()) je["note"] = e.note;
    for (const auto& [k, v] : e.extra) je[k] = v;
    conds[e.name] = std::move(je);
  }
  os << doc.dump(2) << "\n";
}

double check_A0(const ModelFamily& model, double b,
                const ConditionConfig& cfg) {
  if (model.has_sup_gap()) {
    // Closed-form envelope; integrate over dyadic segments so a spike near
    // t = 0 cannot slip through the adaptive refinement.
    auto env = [&](double t) { return model.sup_gap(t, b); };
    double total = 0.0;
    double hi = cfg.L;
    for (int k = 0; k < 48 && hi > 0.0; ++k) {
      const double lo = (k == 47) ? 0.0 : hi * 0.5;
      total += quad::adaptive_simpson(env, lo, hi, 1e-10);
      hi = lo;
    }
    return total;
  }

  // Windowed fallback: sup over an x grid on [-N, N] at each Simpson node.
  std::size_t tn = cfg.t_nodes | 1;  // odd
  if (tn < 3) tn = 3;
  const double ht = cfg.L / static_cast<double>(tn - 1);
  auto sup_at = [&](double t) {
    double sup = 0.0;
    for (std::size_t i = 0; i < cfg.x_nodes; ++i) {
      const double x = -cfg.N + 2.0 * cfg.N * static_cast<double>(i) /
                                    static_cast<double>(cfg.x_nodes - 1);
      sup = std::max(sup, std::abs(model.drift(t, x, b) -
                                   model.homogeneous_drift(x, b)));
    }
    return sup;
  };
  double sum = sup_at(0.0) + sup_at(cfg.L);
  for (std::size_t i = 1; i + 1 < tn; ++i)
    sum += (i % 2 == 1 ? 4.0 : 2.0) * sup_at(static_cast<double>(i) * ht);
  return sum * ht / 3.0;
}

A1Result check_A1(const ModelFamily& model, const TransformTable& table,
                  double b, const ConditionConfig& cfg) {
  std::vector<double> t_grid;
  const std::size_t tn = std::max<std::size_t>(cfg.a1_t_nodes, 2);
  for (std::size_t i = 0; i < tn; ++i)
    t_grid.push_back(cfg.L * static_cast<double>(i) /
                     static_cast<double>(tn - 1));
  if (cfg.a1_probe_inverse_b && 1.0 / b < cfg.L) t_grid.push_back(1.0 / b);

  const Grid& g = table.grid;
  A1Result r;
  double c_min = 0.0;
  double violation = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < g.size(); ++i) {
    const double x = g.x(i);
    const double gp = table.G_prime_vals[i];
    const double half_gpp = 0.5 * table.G_second_fd(i);
    const double denom = 1.0 + table.G_vals[i] * table.G_vals[i];
    for (double t : t_grid) {
      const double a = model.drift(t, x, b);
      const double lhs = gp * a + half_gpp;
      const double expr = lhs * lhs + gp * gp;
      if (!std::isfinite(expr))
        throw std::runtime_error("(A1) expression is not finite");
      c_min = std::max(c_min, expr / denom);
      violation = std::max(violation, expr - cfg.a1_c * denom);
    }
  }
  r.g_at_x0 = std::abs(table.G_at(model.x0));
  r.c_fitted = std::max(c_min, r.g_at_x0);
  r.max_violation = std::max(violation, r.g_at_x0 - cfg.a1_c);
  return r;
}

double check_growth(const TransformTable& table, const ConditionConfig& cfg) {
  const Grid& g = table.grid;
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double ax = std::abs(g.x(i));
    if (ax < g.h * (1.0 - 1e-12)) continue;
    margin = std::min(margin,
                      std::abs(table.G_vals[i]) / std::pow(ax, cfg.alpha));
  }
  return margin;
}

A2Result check_A2(const TransformTable& table, const ConditionConfig& cfg) {
  const Grid& g = table.grid;
  A2Result r;
  for (const BorelSet& raw : cfg.b_sets) {
    const BorelSet b_set = normalized(raw);
    const double lambda = borel_measure(b_set);
    if (lambda == 0.0) continue;  // empty set: ratio is identically zero
    // Map each interval through the monotone inverse of G.
    std::vector<Interval> x_ranges;
    for (const Interval& iv : b_set) {
      if (std::abs(iv.lo) > cfg.N || std::abs(iv.hi) > cfg.N)
        throw std::invalid_argument("(A2) set leaves the window [-N, N]");
      if (iv.lo < table.G_vals.front() || iv.hi > table.G_vals.back())
        throw std::invalid_argument(
            "(A2) set leaves the tabulated range of G");
      x_ranges.push_back({table.G_inverse(iv.lo), table.G_inverse(iv.hi)});
    }
    std::vector<double> ind(g.size(), 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double u = g.x(i);
      for (const Interval& xr : x_ranges)
        if (u >= xr.lo && u <= xr.hi) {
          ind[i] = std::exp(-table.exponent[i]);
          break;
        }
    }
    std::vector<double> anti = quad::cumulative_table(ind, g.h, g.center());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double num = std::abs(table.f_prime_vals[i] * anti[i]);
      const double scale = lambda * (1.0 + std::pow(std::abs(g.x(i)), cfg.m));
      r.max_ratio = std::max(r.max_ratio, num / (cfg.psi_c1 * scale));
      r.c1_fitted = std::max(r.c1_fitted, num / scale);
    }
  }
  return r;
}

double check_A3_sup(const TransformTable& table,
                    const std::vector<double>& q_vals,
                    const ConditionConfig& cfg) {
  const std::vector<double> profile = a3_profile_vals(table, q_vals);
  return sup_abs_within(table.grid, profile, cfg.N);
}

A4Result check_A4(const TransformTable& table, const ModelFamily& model,
                  const std::function<double(double)>& g0, double b,
                  const ConditionConfig& cfg) {
  const Grid& g = table.grid;
  std::vector<double> g_vals(g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    g_vals[i] = model.integrand_g(g.x(i), b);
  const std::vector<double> profile = a3_profile_vals(table, g_vals);

  A4Result r;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (std::abs(g.x(i)) > cfg.N) continue;
    r.c_n = std::max(r.c_n, std::abs(profile[i]));
    const double target = g0(table.G_vals[i]) * table.G_prime_vals[i];
    r.a4_sup = std::max(r.a4_sup, std::abs(profile[i] - target));
  }
  return r;
}

Theorem5Result check_theorem5(const TransformTable& table,
                              const NestedTransform& nested, double c0,
                              double b0, const ConditionConfig& cfg) {
  const Grid& g = table.grid;
  Theorem5Result r;
  std::vector<double> q(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double weighted = table.f_prime_vals[i] * nested.inner_vals[i];
    const double centered = weighted - c0;
    q[i] = centered * centered - b0 * b0;
    if (std::abs(g.x(i)) <= cfg.N) {
      // int_0^x [f' int g/f' - c0] du = Phi(x)/2 - c0 x.
      const double v = 0.5 * nested.phi_vals[i] - c0 * g.x(i);
      r.centered_sup = std::max(r.centered_sup, std::abs(v));
    }
  }
  r.q_sup = check_A3_sup(table, q, cfg);
  return r;
}

std::pair<double, double> estimate_c0_b0(const TransformTable& table,
                                         const NestedTransform& nested,
                                         const ConditionConfig& cfg) {
  const Grid& g = table.grid;
  double sum = 0.0, sum_sq = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (std::abs(g.x(i)) > cfg.N) continue;
    sum += table.f_prime_vals[i] * nested.inner_vals[i];
    ++n;
  }
  const double c0 = n > 0 ? sum / static_cast<double>(n) : 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (std::abs(g.x(i)) > cfg.N) continue;
    const double d = table.f_prime_vals[i] * nested.inner_vals[i] - c0;
    sum_sq += d * d;
  }
  const double b0 =
      n > 0 ? std::sqrt(sum_sq / static_cast<double>(n)) : 0.0;
  return {c0, b0};
}

double check_F0_sup(const ModelFamily& model, const TransformTable& table,
                    const std::function<double(double)>& F0, double b,
                    const ConditionConfig& cfg) {
  const Grid& g = table.grid;
  double sup = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (std::abs(g.x(i)) > cfg.N) continue;
    sup = std::max(sup, std::abs(model.terminal_F(g.x(i), b) -
                                 F0(table.G_vals[i])));
  }
  return sup;
}

std::vector<double> q_thm2_drift(const TransformTable& table,
                                 const ModelFamily& model,
                                 const LimitModel& limit, double b) {
  const Grid& g = table.grid;
  std::vector<double> q(g.size(), 0.0);
  for (std::size_t i = 1; i + 1 < g.size(); ++i)
    q[i] = table.G_prime_vals[i] * model.eval_ahat(g.x(i), b) +
           0.5 * table.G_second_fd(i) - limit.a0(table.G_vals[i]);
  q[0] = q[1];
  q[g.size() - 1] = q[g.size() - 2];
  return q;
}

std::vector<double> q_thm2_diffusion(const TransformTable& table,
                                     const LimitModel& limit) {
  const Grid& g = table.grid;
  std::vector<double> q(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double s = limit.sigma0(table.G_vals[i]);
    q[i] = table.G_prime_vals[i] * table.G_prime_vals[i] - s * s;
  }
  return q;
}

std::vector<double> q_thm3(const TransformTable& table,
                           const ModelFamily& model, const LimitModel& limit,
                           double b) {
  const Grid& g = table.grid;
  std::vector<double> q(g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    q[i] = model.integrand_g(g.x(i), b) - limit.g0(table.G_vals[i]);
  return q;
}

std::vector<double> q_ahat(const TransformTable& table,
                           const ModelFamily& model, double b) {
  const Grid& g = table.grid;
  std::vector<double> q(g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    q[i] = model.eval_ahat(g.x(i), b);
  return q;
}

std::vector<double> q_thm6(const TransformTable& table,
                           const ModelFamily& model, const LimitModel& limit,
                           double b) {
  const Grid& g = table.grid;
  std::vector<double> q(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double d = model.integrand_g(g.x(i), b) -
                     limit.g0(table.G_vals[i]) * table.G_prime_vals[i];
    q[i] = d * d;
  }
  return q;
}

}  // namespace sdelab
