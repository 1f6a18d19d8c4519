#include "sdelab/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace sdelab {

namespace {

std::size_t steps_for(double dt, double horizon) {
  if (!(dt > 0.0) || !(horizon > 0.0))
    throw std::invalid_argument("dt and horizon must be positive");
  const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
  if (steps == 0) throw std::invalid_argument("horizon shorter than dt");
  return steps;
}

std::size_t step_index(double t, double dt, std::size_t steps) {
  const auto k = static_cast<std::size_t>(std::llround(t / dt));
  if (k > steps || std::abs(static_cast<double>(k) * dt - t) > 0.5 * dt)
    throw std::invalid_argument("sample time is not on the step grid");
  return k;
}

std::uint64_t xi_stream(const SimParams& p) {
  return p.crn ? rng::kStreamCrn : rng::kStreamPerT + p.schedule_index;
}

unsigned worker_count(const SimParams& p) {
  if (p.workers != 0) return p.workers;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

// Splits [0, n) into contiguous blocks and runs fn(begin, end) on each; the
// per-path work writes to disjoint slots, so the partition never changes
// results. The first worker exception is rethrown on the calling thread.
template <class Fn>
void parallel_paths(std::size_t n, unsigned workers, Fn&& fn) {
  if (workers <= 1 || n < 2) {
    fn(std::size_t{0}, n);
    return;
  }
  const auto w = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  std::vector<std::thread> pool;
  pool.reserve(w);
  std::vector<std::exception_ptr> errors(w);
  const std::size_t chunk = (n + w - 1) / w;
  for (unsigned i = 0; i < w; ++i) {
    const std::size_t lo = std::min<std::size_t>(i * chunk, n);
    const std::size_t hi = std::min<std::size_t>(lo + chunk, n);
    if (lo >= hi) break;
    pool.emplace_back([&fn, &errors, i, lo, hi] {
      try {
        fn(lo, hi);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

double dt_rule(double b) { return std::min(1e-3, 1.0 / (b * b)); }

void check_dt(const SimParams& p, double b) {
  if (p.paths < 1) throw std::invalid_argument("need at least one path");
  if (!(p.dt > 0.0)) throw std::invalid_argument("dt must be positive");
  const double rule = dt_rule(b);
  if (p.dt > rule * (1.0 + 1e-12) && !p.allow_dt_override)
    throw std::invalid_argument(
        "dt exceeds the resolution rule min(1e-3, b^-2) = " +
        std::to_string(rule) +
        " for b = " + std::to_string(b) +
        "; the drift oscillates at wavelength ~1/b and the path moves "
        "sqrt(dt) per step. Set allow_dt_override to run anyway.");
}

PathEnsemble simulate_ensemble(const ModelFamily& model, double b,
                               const SimParams& params) {
  check_dt(params, b);
  const std::size_t steps = steps_for(params.dt, params.horizon);
  if (params.paths * steps > (std::size_t{1} << 28))
    throw std::invalid_argument(
        "stored ensemble would exceed the memory budget; use the streaming "
        "statistics instead");

  PathEnsemble ens;
  ens.dt = params.dt;
  ens.horizon = params.horizon;
  ens.steps = steps;
  ens.xi.assign(params.paths, std::vector<double>(steps + 1));
  ens.dW.assign(params.paths, std::vector<double>(steps));
  ens.exited.assign(params.paths, 0);

  const double bound = model.drift_bound(b);
  const double sqrt_dt = std::sqrt(params.dt);
  const std::uint64_t stream = xi_stream(params);

  parallel_paths(params.paths, worker_count(params), [&](std::size_t lo,
                                                         std::size_t hi) {
    for (std::size_t j = lo; j < hi; ++j) {
      rng::NormalStream noise(params.base_seed, stream, j);
      double x = model.x0;
      ens.xi[j][0] = x;
      bool exited = std::abs(x) > params.x_max;
      for (std::size_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * params.dt;
        const double a = model.drift(t, x, b);
        if (std::abs(a) > bound + 1e-12)
          throw std::runtime_error("drift bound violated by model " +
                                   model.name);
        const double dw = sqrt_dt * noise.next();
        ens.dW[j][k] = dw;
        x += a * params.dt + dw;
        ens.xi[j][k + 1] = x;
        if (std::abs(x) > params.x_max) exited = true;
      }
      ens.exited[j] = exited ? 1 : 0;
    }
  });
  for (auto e : ens.exited) ens.exit_count += e;
  return ens;
}

PathEnsemble simulate_limit(const LimitModel& limit, const SimParams& params) {
  if (params.paths < 1) throw std::invalid_argument("need at least one path");
  if (!(params.dt > 0.0) || (params.dt > 1e-3 * (1.0 + 1e-12) &&
                             !params.allow_dt_override))
    throw std::invalid_argument("limit simulation requires 0 < dt <= 1e-3");
  const std::size_t steps = steps_for(params.dt, params.horizon);
  if (params.paths * steps > (std::size_t{1} << 28))
    throw std::invalid_argument(
        "stored ensemble would exceed the memory budget");

  PathEnsemble ens;
  ens.dt = params.dt;
  ens.horizon = params.horizon;
  ens.steps = steps;
  ens.xi.assign(params.paths, std::vector<double>(steps + 1));
  ens.dW.assign(params.paths, std::vector<double>(steps));
  ens.exited.assign(params.paths, 0);

  const double sqrt_dt = std::sqrt(params.dt);

  parallel_paths(params.paths, worker_count(params), [&](std::size_t lo,
                                                         std::size_t hi) {
    for (std::size_t j = lo; j < hi; ++j) {
      rng::NormalStream noise(params.base_seed, rng::kStreamLimit, j);
      double z = limit.y0;
      ens.xi[j][0] = z;
      for (std::size_t k = 0; k < steps; ++k) {
        const double dw = sqrt_dt * noise.next();
        ens.dW[j][k] = dw;
        z += limit.a0(z) * params.dt + limit.sigma0(z) * dw;
        if (!std::isfinite(z))
          throw std::runtime_error("limit path diverged");
        ens.xi[j][k + 1] = z;
      }
    }
  });
  return ens;
}

FunctionalSample compute_functionals(const PathEnsemble& ens,
                                     const ModelFamily& model, double b,
                                     const TransformTable* table) {
  const std::size_t m = ens.paths();
  FunctionalSample fs;
  fs.beta1.assign(m, std::vector<double>(ens.steps + 1));
  fs.beta2.assign(m, std::vector<double>(ens.steps + 1));
  fs.integral_I.assign(m, std::vector<double>(ens.steps + 1));
  if (table != nullptr)
    fs.zeta.assign(m, std::vector<double>(ens.steps + 1));

  for (std::size_t j = 0; j < m; ++j) {
    double b1 = 0.0, b2 = 0.0;
    for (std::size_t k = 0; k <= ens.steps; ++k) {
      const double x = ens.xi[j][k];
      fs.beta1[j][k] = b1;
      fs.beta2[j][k] = b2;
      fs.integral_I[j][k] = model.terminal_F(x, b) + b2;
      if (table != nullptr) {
        if (ens.exited[j])
          fs.zeta[j][k] = std::numeric_limits<double>::quiet_NaN();
        else
          fs.zeta[j][k] = table->G_at(x);
      }
      if (k < ens.steps) {
        const double g = model.integrand_g(x, b);
        b1 += g * ens.dt;
        b2 += g * ens.dW[j][k];
      }
    }
  }
  return fs;
}

std::vector<std::vector<double>> theorem4_limit_functional(
    const PathEnsemble& limit_ens, const std::function<double(double)>& g0,
    const std::function<double(double)>& sigma0, double y0, double y_span) {
  // Antiderivative of g0 around y0 by cumulative Simpson.
  const Grid grid = Grid::symmetric(std::max(y_span, 1.0), 1e-3);
  const std::vector<double> anti =
      quad::cumulative(grid, [&](double u) { return g0(y0 + u); });
  auto anti_at = [&](double z) {
    const double u = z - y0;
    if (!grid.contains(u))
      throw std::domain_error("limit path left the antiderivative table");
    const std::size_t i = grid.cell(u);
    const double w = (u - grid.x(i)) / grid.h;
    return anti[i] + w * (anti[i + 1] - anti[i]);
  };

  std::vector<std::vector<double>> out(limit_ens.paths());
  for (std::size_t j = 0; j < limit_ens.paths(); ++j) {
    out[j].resize(limit_ens.steps + 1);
    double ito = 0.0;
    for (std::size_t k = 0; k <= limit_ens.steps; ++k) {
      const double z = limit_ens.xi[j][k];
      out[j][k] = 2.0 * (anti_at(z) - ito);
      if (k < limit_ens.steps)
        ito += g0(z) * sigma0(z) * limit_ens.dW[j][k];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Streaming driver
// ---------------------------------------------------------------------------

namespace {

struct ProbePlan {
  std::vector<std::size_t> sample_steps;
  std::size_t coarse_stride = 0;
  std::size_t coarse_count = 0;
  std::size_t steps = 0;
};

ProbePlan plan_probe(const ProbeRequest& probe, double dt, double horizon) {
  ProbePlan plan;
  plan.steps = steps_for(dt, horizon);
  plan.sample_steps.reserve(probe.times.size());
  for (double t : probe.times)
    plan.sample_steps.push_back(step_index(t, dt, plan.steps));
  if (probe.coarse_dt > 0.0) {
    const auto stride =
        static_cast<std::size_t>(std::llround(probe.coarse_dt / dt));
    if (stride == 0 ||
        std::abs(static_cast<double>(stride) * dt - probe.coarse_dt) >
            1e-9 * probe.coarse_dt)
      throw std::invalid_argument("coarse_dt must be a multiple of dt");
    plan.coarse_stride = stride;
    plan.coarse_count = plan.steps / stride + 1;
  }
  return plan;
}

// Fixed-size per-path result block; the reduction walks paths in index order
// so the output is independent of the worker partition.
struct PathSlot {
  std::vector<double> at_times;  // zeta/beta1/beta2/I interleaved per time
  std::vector<double> coarse;
  std::vector<double> occupation;
  double sup_abs_beta1 = 0.0;
  double sup_zeta_sq = 0.0;
  double gsq = 0.0;
  bool exited = false;
};

EnsembleStats reduce_slots(const ProbeRequest& probe,
                           const std::vector<PathSlot>& slots,
                           const std::vector<double>& times) {
  EnsembleStats out;
  out.times = times;
  const std::size_t nt = times.size();
  const bool table_probes = probe.zeta || probe.sup_zeta_sq ||
                            probe.coarse_dt > 0.0 ||
                            !probe.occupation_lambdas.empty();
  auto survives = [&](const PathSlot& s) { return !s.exited; };

  if (probe.zeta) out.zeta.assign(nt, {});
  if (probe.beta1) out.beta1.assign(nt, {});
  if (probe.beta2) out.beta2.assign(nt, {});
  if (probe.integral_I) out.integral_I.assign(nt, {});
  if (probe.coarse_dt > 0.0) out.coarse_zeta.reserve(slots.size());
  out.occupation.assign(probe.occupation_lambdas.size(), {});

  for (const PathSlot& s : slots) {
    if (s.exited) ++out.exit_count;
    std::size_t col = 0;
    for (std::size_t ti = 0; ti < nt; ++ti) {
      if (probe.zeta) {
        if (survives(s)) out.zeta[ti].push_back(s.at_times[col]);
        ++col;
      }
      if (probe.beta1) out.beta1[ti].push_back(s.at_times[col++]);
      if (probe.beta2) out.beta2[ti].push_back(s.at_times[col++]);
      if (probe.integral_I) out.integral_I[ti].push_back(s.at_times[col++]);
    }
    if (probe.sup_abs_beta1) out.sup_abs_beta1.push_back(s.sup_abs_beta1);
    if (probe.sup_zeta_sq && survives(s))
      out.sup_zeta_sq.push_back(s.sup_zeta_sq);
    if (probe.coarse_dt > 0.0 && survives(s))
      out.coarse_zeta.push_back(s.coarse);
    for (std::size_t li = 0; li < probe.occupation_lambdas.size(); ++li)
      if (survives(s)) out.occupation[li].push_back(s.occupation[li]);
    if (probe.gsq_time_integral) out.gsq_time_integral.push_back(s.gsq);
  }
  out.surviving = slots.size() - (table_probes ? out.exit_count : 0);
  return out;
}

}  // namespace

EnsembleStats run_xi_ensemble(const ModelFamily& model, double b,
                              const TransformTable* table,
                              const SimParams& params,
                              const ProbeRequest& probe) {
  check_dt(params, b);
  const bool needs_table = probe.zeta || probe.sup_zeta_sq ||
                           probe.coarse_dt > 0.0 ||
                           !probe.occupation_lambdas.empty();
  if (needs_table && table == nullptr)
    throw std::invalid_argument("probe requires a transform table");

  const ProbePlan plan = plan_probe(probe, params.dt, params.horizon);
  const double bound = model.drift_bound(b);
  const double sqrt_dt = std::sqrt(params.dt);
  const std::uint64_t stream = xi_stream(params);
  const bool needs_g = probe.beta1 || probe.beta2 || probe.integral_I ||
                       probe.sup_abs_beta1 || probe.gsq_time_integral;
  const std::size_t per_time = (probe.zeta ? 1 : 0) + (probe.beta1 ? 1 : 0) +
                               (probe.beta2 ? 1 : 0) +
                               (probe.integral_I ? 1 : 0);
  const std::size_t nl = probe.occupation_lambdas.size();

  std::vector<PathSlot> slots(params.paths);

  parallel_paths(params.paths, worker_count(params), [&](std::size_t lo,
                                                         std::size_t hi) {
    for (std::size_t j = lo; j < hi; ++j) {
      PathSlot& slot = slots[j];
      slot.at_times.assign(per_time * plan.sample_steps.size(), 0.0);
      slot.coarse.assign(plan.coarse_count, 0.0);
      slot.occupation.assign(nl, 0.0);

      rng::NormalStream noise(params.base_seed, stream, j);
      double x = model.x0;
      double beta1 = 0.0, beta2 = 0.0, gsq = 0.0;
      double sup_b1 = 0.0, sup_z2 = 0.0;
      bool exited = std::abs(x) > params.x_max;
      std::size_t next_sample = 0;

      for (std::size_t k = 0; k <= plan.steps; ++k) {
        double zeta = 0.0;
        const bool have_zeta = needs_table && !exited;
        if (have_zeta) {
          zeta = table->G_at(x);
          if (probe.sup_zeta_sq) sup_z2 = std::max(sup_z2, zeta * zeta);
          if (plan.coarse_stride != 0 && k % plan.coarse_stride == 0)
            slot.coarse[k / plan.coarse_stride] = zeta;
        }
        while (next_sample < plan.sample_steps.size() &&
               plan.sample_steps[next_sample] == k) {
          std::size_t col = per_time * next_sample;
          if (probe.zeta) slot.at_times[col++] = have_zeta ? zeta : 0.0;
          if (probe.beta1) slot.at_times[col++] = beta1;
          if (probe.beta2) slot.at_times[col++] = beta2;
          if (probe.integral_I)
            slot.at_times[col++] = model.terminal_F(x, b) + beta2;
          ++next_sample;
        }
        if (k == plan.steps) break;

        if (have_zeta)
          for (std::size_t li = 0; li < nl; ++li)
            if (zeta >= 0.0 && zeta <= probe.occupation_lambdas[li])
              slot.occupation[li] += params.dt;

        const double t = static_cast<double>(k) * params.dt;
        const double a = model.drift(t, x, b);
        if (std::abs(a) > bound + 1e-12)
          throw std::runtime_error("drift bound violated by model " +
                                   model.name);
        const double dw = sqrt_dt * noise.next();
        if (needs_g) {
          const double g = model.integrand_g(x, b);
          beta1 += g * params.dt;
          beta2 += g * dw;
          gsq += g * g * params.dt;
          if (probe.sup_abs_beta1)
            sup_b1 = std::max(sup_b1, std::abs(beta1));
        }
        x += a * params.dt + dw;
        if (std::abs(x) > params.x_max) exited = true;
      }
      slot.sup_abs_beta1 = sup_b1;
      slot.sup_zeta_sq = sup_z2;
      slot.gsq = gsq;
      slot.exited = exited;
    }
  });

  std::vector<double> times;
  times.reserve(plan.sample_steps.size());
  for (std::size_t k : plan.sample_steps)
    times.push_back(static_cast<double>(k) * params.dt);
  return reduce_slots(probe, slots, times);
}

EnsembleStats run_limit_ensemble(const LimitModel& limit,
                                 const SimParams& params,
                                 const ProbeRequest& probe) {
  if (!(params.dt > 0.0) || (params.dt > 1e-3 * (1.0 + 1e-12) &&
                             !params.allow_dt_override))
    throw std::invalid_argument("limit simulation requires 0 < dt <= 1e-3");
  const ProbePlan plan = plan_probe(probe, params.dt, params.horizon);
  const double sqrt_dt = std::sqrt(params.dt);
  const std::size_t per_time = (probe.zeta ? 1 : 0) + (probe.beta1 ? 1 : 0) +
                               (probe.beta2 ? 1 : 0) +
                               (probe.integral_I ? 1 : 0);
  const std::size_t nl = probe.occupation_lambdas.size();

  std::vector<PathSlot> slots(params.paths);

  parallel_paths(params.paths, worker_count(params), [&](std::size_t lo,
                                                         std::size_t hi) {
    for (std::size_t j = lo; j < hi; ++j) {
      PathSlot& slot = slots[j];
      slot.at_times.assign(per_time * plan.sample_steps.size(), 0.0);
      slot.coarse.assign(plan.coarse_count, 0.0);
      slot.occupation.assign(nl, 0.0);

      rng::NormalStream noise(params.base_seed, rng::kStreamLimit, j);
      double z = limit.y0;
      double beta1 = 0.0, beta2 = 0.0;
      double sup_b1 = 0.0, sup_z2 = 0.0;
      std::size_t next_sample = 0;

      for (std::size_t k = 0; k <= plan.steps; ++k) {
        if (probe.sup_zeta_sq) sup_z2 = std::max(sup_z2, z * z);
        if (plan.coarse_stride != 0 && k % plan.coarse_stride == 0)
          slot.coarse[k / plan.coarse_stride] = z;
        while (next_sample < plan.sample_steps.size() &&
               plan.sample_steps[next_sample] == k) {
          std::size_t col = per_time * next_sample;
          if (probe.zeta) slot.at_times[col++] = z;
          if (probe.beta1) slot.at_times[col++] = beta1;
          if (probe.beta2) slot.at_times[col++] = beta2;
          if (probe.integral_I) slot.at_times[col++] = limit.F0(z) + beta2;
          ++next_sample;
        }
        if (k == plan.steps) break;

        for (std::size_t li = 0; li < nl; ++li)
          if (z >= 0.0 && z <= probe.occupation_lambdas[li])
            slot.occupation[li] += params.dt;

        const double dw = sqrt_dt * noise.next();
        const double g = limit.g0(z);
        const double gs = g * limit.sigma0(z);
        beta1 += g * params.dt;
        beta2 += gs * dw;
        if (probe.sup_abs_beta1) sup_b1 = std::max(sup_b1, std::abs(beta1));
        z += limit.a0(z) * params.dt + limit.sigma0(z) * dw;
        if (!std::isfinite(z))
          throw std::runtime_error("limit path diverged");
      }
      slot.sup_abs_beta1 = sup_b1;
      slot.sup_zeta_sq = sup_z2;
      slot.exited = false;
    }
  });

  std::vector<double> times;
  times.reserve(plan.sample_steps.size());
  for (std::size_t k : plan.sample_steps)
    times.push_back(static_cast<double>(k) * params.dt);
  return reduce_slots(probe, slots, times);
}

void dump_paths_csv(const PathEnsemble& ens, std::ostream& os) {
  os << "path_id,t,xi,dW\n";
  char line[128];
  for (std::size_t j = 0; j < ens.paths(); ++j) {
    for (std::size_t k = 0; k <= ens.steps; ++k) {
      const double dw = k < ens.steps ? ens.dW[j][k] : 0.0;
      std::snprintf(line, sizeof(line), "%zu,%.17g,%.17g,%.17g\n", j,
                    static_cast<double>(k) * ens.dt, ens.xi[j][k], dw);
      os << line;
    }
  }
}

}  // namespace sdelab
