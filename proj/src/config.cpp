#include "sdelab/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sdelab {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad number for " + key + ": " + v);
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("config: bad boolean for " + key + ": " + v);
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const std::string& item : split(v, ','))
    if (!item.empty()) out.push_back(parse_double(key, item));
  return out;
}

// "[lo,hi]|[lo,hi]" is one Borel set; sets are separated by ';'.
std::vector<BorelSet> parse_b_sets(const std::string& v) {
  std::vector<BorelSet> sets;
  for (const std::string& set_text : split(v, ';')) {
    if (set_text.empty()) continue;
    BorelSet set;
    for (const std::string& iv_text : split(set_text, '|')) {
      const std::string t = trim(iv_text);
      if (t.size() < 2 || t.front() != '[' || t.back() != ']')
        throw std::invalid_argument("config: bad interval: " + t);
      const auto parts = split(t.substr(1, t.size() - 2), ',');
      if (parts.size() != 2)
        throw std::invalid_argument("config: bad interval: " + t);
      set.push_back({parse_double("b_sets", parts[0]),
                     parse_double("b_sets", parts[1])});
    }
    sets.push_back(std::move(set));
  }
  return sets;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

double ExperimentConfig::dt_for(double b) const {
  switch (dt_mode) {
    case DtMode::rule: return dt_rule(b);
    case DtMode::rule_pow2:
      return std::min(std::ldexp(1.0, -10), 1.0 / (b * b));
    default: return dt_fixed;
  }
}

ExperimentModel ExperimentConfig::make() const {
  std::map<std::string, double> params = model_params;
  params.emplace("gamma", schedule.gamma);
  return make_model(model_name, params);
}

std::string ExperimentConfig::canonical_text() const {
  std::ostringstream os;
  os << "model=" << model_name << "\n";
  for (const auto& [k, v] : model_params) os << "param." << k << "=" << fmt17(v) << "\n";
  os << "gamma=" << fmt17(schedule.gamma) << "\nschedule=";
  for (double b : schedule.values) os << fmt17(b) << ",";
  os << "\ndt_mode=" << static_cast<int>(dt_mode)
     << "\ndt_fixed=" << fmt17(dt_fixed) << "\nL=" << fmt17(horizon)
     << "\nM=" << paths << "\nseed=" << base_seed << "\ncrn=" << crn
     << "\nx_max=" << fmt17(x_max) << "\noverride=" << allow_dt_override
     << "\ntol=" << fmt17(transform_tol) << "\nN=" << fmt17(conditions.N)
     << "\ncond_L=" << fmt17(conditions.L)
     << "\nt_nodes=" << conditions.t_nodes
     << "\nx_nodes=" << conditions.x_nodes
     << "\na1_t_nodes=" << conditions.a1_t_nodes
     << "\na1_probe_inverse_b=" << conditions.a1_probe_inverse_b
     << "\nb_sets=";
  for (const auto& set : conditions.b_sets) {
    for (const auto& iv : set)
      os << "[" << fmt17(iv.lo) << "," << fmt17(iv.hi) << "]";
    os << ";";
  }
  os << "\npsi_c1=" << fmt17(conditions.psi_c1)
     << "\nm=" << fmt17(conditions.m) << "\nalpha=" << fmt17(conditions.alpha)
     << "\ngrowth_c=" << fmt17(conditions.growth_c)
     << "\na1_c=" << fmt17(conditions.a1_c)
     << "\na3_threshold=" << fmt17(conditions.a3_threshold)
     << "\ntrend_ratio=" << fmt17(conditions.trend_ratio)
     << "\ntrend_slack=" << conditions.trend_slack
     << "\nzero_floor=" << fmt17(conditions.zero_floor) << "\nchecks=";
  for (const auto& c : checks) os << c << ",";
  os << "\na3_family=" << a3_family << "\ntimes=";
  for (double t : stats.times) os << fmt17(t) << ",";
  os << "\nalpha_level=" << fmt17(stats.alpha)
     << "\nks_floor=" << fmt17(stats.ks_floor)
     << "\nsup_quantile=" << fmt17(stats.sup_quantile)
     << "\nsup_threshold=" << fmt17(stats.sup_threshold)
     << "\nstats_trend_slack=" << stats.trend_slack
     << "\nskip_hypotheses=" << skip_hypotheses << "\n";
  return os.str();
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

std::string ExperimentConfig::hash() const { return fnv1a_hex(canonical_text()); }

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  int k_min = 0, k_max = -1;
  bool have_k_range = false, have_bt = false, seed_seen = false;

  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t comment = line.find_first_of("#;");
    std::string t = trim(comment == std::string::npos
                             ? line
                             : line.substr(0, comment));
    if (t.empty()) continue;
    if (t.front() == '[' && t.back() == ']') {
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));

    if (section == "model") {
      if (key == "name") cfg.model_name = value;
      else cfg.model_params[key] = parse_double(key, value);
    } else if (section == "schedule") {
      if (key == "bt") {
        cfg.schedule.values = parse_list(key, value);
        have_bt = true;
      } else if (key == "k_min") {
        k_min = static_cast<int>(parse_double(key, value));
        have_k_range = true;
      } else if (key == "k_max") {
        k_max = static_cast<int>(parse_double(key, value));
        have_k_range = true;
      } else if (key == "gamma") {
        cfg.schedule.gamma = parse_double(key, value);
      } else {
        throw std::invalid_argument("config: unknown schedule key " + key);
      }
    } else if (section == "sim") {
      if (key == "dt") {
        if (value == "auto") cfg.dt_mode = DtMode::rule;
        else if (value == "auto_pow2") cfg.dt_mode = DtMode::rule_pow2;
        else {
          cfg.dt_mode = DtMode::fixed;
          cfg.dt_fixed = parse_double(key, value);
        }
      } else if (key == "L") cfg.horizon = parse_double(key, value);
      else if (key == "M")
        cfg.paths = static_cast<std::size_t>(parse_double(key, value));
      else if (key == "base_seed") {
        cfg.base_seed = static_cast<std::uint64_t>(parse_double(key, value));
        seed_seen = true;
      } else if (key == "crn") cfg.crn = parse_bool(key, value);
      else if (key == "x_max") cfg.x_max = parse_double(key, value);
      else if (key == "allow_dt_override")
        cfg.allow_dt_override = parse_bool(key, value);
      else if (key == "workers")
        cfg.workers = static_cast<unsigned>(parse_double(key, value));
      else throw std::invalid_argument("config: unknown sim key " + key);
    } else if (section == "transform") {
      if (key == "tol") cfg.transform_tol = parse_double(key, value);
      else throw std::invalid_argument("config: unknown transform key " + key);
    } else if (section == "conditions") {
      ConditionConfig& c = cfg.conditions;
      if (key == "N") c.N = parse_double(key, value);
      else if (key == "L") c.L = parse_double(key, value);
      else if (key == "t_nodes")
        c.t_nodes = static_cast<std::size_t>(parse_double(key, value));
      else if (key == "x_nodes")
        c.x_nodes = static_cast<std::size_t>(parse_double(key, value));
      else if (key == "a1_t_nodes")
        c.a1_t_nodes = static_cast<std::size_t>(parse_double(key, value));
      else if (key == "a1_probe_inverse_b")
        c.a1_probe_inverse_b = parse_bool(key, value);
      else if (key == "b_sets") c.b_sets = parse_b_sets(value);
      else if (key == "psi_c1") c.psi_c1 = parse_double(key, value);
      else if (key == "m") c.m = parse_double(key, value);
      else if (key == "alpha") c.alpha = parse_double(key, value);
      else if (key == "growth_c") c.growth_c = parse_double(key, value);
      else if (key == "a1_c") c.a1_c = parse_double(key, value);
      else if (key == "a3_threshold") c.a3_threshold = parse_double(key, value);
      else if (key == "trend_ratio") c.trend_ratio = parse_double(key, value);
      else if (key == "trend_slack")
        c.trend_slack = static_cast<int>(parse_double(key, value));
      else if (key == "zero_floor") c.zero_floor = parse_double(key, value);
      else if (key == "checks") {
        cfg.checks.clear();
        for (const auto& item : split(value, ','))
          if (!item.empty()) cfg.checks.push_back(item);
      } else if (key == "a3_family") cfg.a3_family = value;
      else throw std::invalid_argument("config: unknown conditions key " + key);
    } else if (section == "stats") {
      StatsConfig& s = cfg.stats;
      if (key == "times") s.times = parse_list(key, value);
      else if (key == "alpha") s.alpha = parse_double(key, value);
      else if (key == "ks_floor") s.ks_floor = parse_double(key, value);
      else if (key == "sup_quantile") s.sup_quantile = parse_double(key, value);
      else if (key == "sup_threshold")
        s.sup_threshold = parse_double(key, value);
      else if (key == "trend_slack")
        s.trend_slack = static_cast<int>(parse_double(key, value));
      else if (key == "skip_hypotheses")
        cfg.skip_hypotheses = parse_bool(key, value);
      else throw std::invalid_argument("config: unknown stats key " + key);
    } else if (section == "output") {
      if (key == "dir") cfg.out_dir = value;
      else throw std::invalid_argument("config: unknown output key " + key);
    } else {
      throw std::invalid_argument("config: unknown section [" + section + "]");
    }
  }

  if (have_bt && have_k_range)
    throw std::invalid_argument("config: give either bt or a k range");
  if (have_k_range) {
    if (k_max < k_min) throw std::invalid_argument("config: empty k range");
    cfg.schedule = ParamSchedule::pow2(k_min, k_max, cfg.schedule.gamma);
  }
  if (!seed_seen && cfg.base_seed == 0)
    throw std::invalid_argument("config: base_seed must be set");
  cfg.schedule.validate();
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str());
}

}  // namespace sdelab
