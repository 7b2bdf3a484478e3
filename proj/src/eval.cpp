#include "ccdos/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "ccdos/error.hpp"
#include "ccdos/parallel.hpp"
#include "ccdos/robust.hpp"

namespace ccdos {

Confusion confusion(const std::vector<bool>& flagged, const std::vector<Label>& truth) {
  if (flagged.size() != truth.size()) throw DataError("flag and label vectors differ in length");
  Confusion c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool outlier = truth[i] == Label::outlier;
    if (flagged[i])
      ++(outlier ? c.tp : c.fp);
    else
      ++(outlier ? c.fn : c.tn);
  }
  return c;
}

Metrics metrics(const Confusion& c, double beta) {
  if (c.tp + c.fn == 0) throw DegenerateLabels("no true outliers; TPR undefined");
  if (c.tn + c.fp == 0) throw DegenerateLabels("no true inliers; TNR undefined");
  Metrics m;
  m.tpr = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  m.tnr = static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp);
  m.ba = (m.tpr + m.tnr) / 2.0;
  m.precision = c.tp + c.fp == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  const double b2 = beta * beta;
  const double num = (1.0 + b2) * m.precision * m.tpr;
  m.f_beta = num == 0.0 ? 0.0 : num / (b2 * m.precision + m.tpr);
  return m;
}

// ---------------------------------------------------------------------------
// Methods

nlohmann::json MethodSpec::to_json() const {
  nlohmann::json j{{"id", id}};
  switch (kind) {
    case Kind::ccd_oos:
    case Kind::ccd_ios:
      j["score"] = kind == Kind::ccd_oos ? "oos" : "ios";
      j["radius"] = radius.to_json();
      j["attach_factor"] = clustering.attach_factor;
      j["min_cluster_fraction"] = clustering.min_cluster_fraction;
      j["density"] = to_string(density);
      j["threshold"] = threshold ? nlohmann::json(*threshold) : nlohmann::json("table");
      if (kind == Kind::ccd_ios) j["s_min"] = s_min;
      break;
    case Kind::lof:
      j["score"] = "lof";
      j["k_min"] = baseline.lof.k_min;
      j["k_max"] = baseline.lof.k_max;
      j["threshold"] = baseline.lof.threshold;
      break;
    case Kind::odin:
      j["score"] = "odin";
      j["k"] = baseline.odin.k ? nlohmann::json(*baseline.odin.k) : nlohmann::json("n^0.5");
      j["t"] = baseline.odin.t ? nlohmann::json(*baseline.odin.t) : nlohmann::json("n^0.33");
      break;
  }
  return j;
}

MethodSpec method_from_name(const std::string& name, double default_s_min) {
  MethodSpec m;
  m.id = name;
  if (name == "LOF") {
    m.kind = MethodSpec::Kind::lof;
    return m;
  }
  if (name == "ODIN") {
    m.kind = MethodSpec::Kind::odin;
    return m;
  }
  const auto dash = name.find('-');
  if (dash == std::string::npos) throw ConfigError(fmt::format("unknown method '{}'", name));
  const std::string family = name.substr(0, dash);
  const std::string score = name.substr(dash + 1);
  if (family == "RKCCD") m.radius.kind = RadiusStrategy::Kind::rk_approx;
  else if (family == "UNCCD") m.radius.kind = RadiusStrategy::Kind::un_approx;
  else if (family == "FKCCD") m.radius.kind = RadiusStrategy::Kind::fixed_k;
  else throw ConfigError(fmt::format("unknown method '{}'", name));
  if (score == "OOS") m.kind = MethodSpec::Kind::ccd_oos;
  else if (score == "IOS") m.kind = MethodSpec::Kind::ccd_ios;
  else throw ConfigError(fmt::format("unknown method '{}'", name));
  if (m.kind == MethodSpec::Kind::ccd_ios) m.s_min = default_s_min;
  return m;
}

MethodSpec method_from_json(const nlohmann::json& j, double default_s_min) {
  if (j.is_string()) return method_from_name(j.get<std::string>(), default_s_min);
  if (!j.is_object()) throw ConfigError("method entries must be names or objects");
  MethodSpec m;
  const std::string score = j.value("score", std::string("ios"));
  if (score == "oos") m.kind = MethodSpec::Kind::ccd_oos;
  else if (score == "ios") m.kind = MethodSpec::Kind::ccd_ios;
  else if (score == "lof") m.kind = MethodSpec::Kind::lof;
  else if (score == "odin") m.kind = MethodSpec::Kind::odin;
  else throw ConfigError(fmt::format("method key 'score': unknown score '{}'", score));
  if (m.kind == MethodSpec::Kind::ccd_ios) m.s_min = default_s_min;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "id") m.id = value.get<std::string>();
      else if (key == "score") continue;
      else if (key == "digraph") m.radius.kind = parse_radius_kind(value.get<std::string>());
      else if (key == "k") {
        m.radius.k = value.get<std::size_t>();
        m.baseline.odin.k = value.get<std::size_t>();
      } else if (key == "t") m.baseline.odin.t = value.get<std::size_t>();
      else if (key == "k_min") m.baseline.lof.k_min = value.get<std::size_t>();
      else if (key == "k_max") m.baseline.lof.k_max = value.get<std::size_t>();
      else if (key == "significance") m.radius.significance = value.get<double>();
      else if (key == "nnd_quantile") m.radius.nnd_quantile = value.get<double>();
      else if (key == "multiplier") m.radius.multiplier = value.get<double>();
      else if (key == "attach_factor") m.clustering.attach_factor = value.get<double>();
      else if (key == "min_cluster_fraction") m.clustering.min_cluster_fraction = value.get<double>();
      else if (key == "density") m.density = parse_density_form(value.get<std::string>());
      else if (key == "s_min") m.s_min = value.get<double>();
      else if (key == "threshold") {
        m.threshold = value.get<double>();
        m.baseline.lof.threshold = value.get<double>();
      } else throw ConfigError(fmt::format("unknown method key '{}'", key));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(fmt::format("bad value for method key '{}': {}", key, e.what()));
    }
  }
  if (m.id.empty()) {
    switch (m.kind) {
      case MethodSpec::Kind::lof: m.id = "LOF"; break;
      case MethodSpec::Kind::odin: m.id = "ODIN"; break;
      default:
        m.id = fmt::format("{}-{}", to_string(m.radius.kind), score);
    }
  }
  return m;
}

std::vector<bool> run_method(const MethodSpec& method, const PointSet& ps, ClusterShape shape,
                             unsigned workers) {
  switch (method.kind) {
    case MethodSpec::Kind::lof: {
      const NeighborIndex idx(ps);
      return lof(idx, method.baseline.lof, workers).flag;
    }
    case MethodSpec::Kind::odin: {
      const NeighborIndex idx(ps);
      return odin(idx, method.baseline.odin, workers).flag;
    }
    case MethodSpec::Kind::ccd_oos:
    case MethodSpec::Kind::ccd_ios: break;
  }
  const ScoreKind score =
      method.kind == MethodSpec::Kind::ccd_oos ? ScoreKind::oos : ScoreKind::ios;
  const double threshold = default_threshold(score, threshold_family(method.radius.kind), shape,
                                             ps.dim(), method.threshold);
  CcdConfig cfg;
  cfg.radius = method.radius;
  cfg.clustering = method.clustering;
  cfg.density = method.density;
  cfg.workers = workers;
  FlagSettings flags{threshold, threshold, method.s_min};
  const auto res = run_ccd(ps, cfg, flags);
  return score == ScoreKind::oos ? res.report.oos_outlier : res.report.ios_outlier;
}

// ---------------------------------------------------------------------------
// Plan

namespace {

void expand_grid(const nlohmann::json& grid, const nlohmann::json& base,
                 std::vector<SimConfig>& out) {
  std::vector<std::pair<std::string, nlohmann::json>> axes;
  for (const auto& [key, values] : grid.items()) {
    if (!values.is_array() || values.empty())
      throw ConfigError(fmt::format("grid key '{}' needs a non-empty array", key));
    axes.emplace_back(key, values);
  }
  std::vector<std::size_t> pos(axes.size(), 0);
  for (;;) {
    nlohmann::json cell = base;
    for (std::size_t a = 0; a < axes.size(); ++a) cell[axes[a].first] = axes[a].second[pos[a]];
    out.push_back(SimConfig::from_json(cell));
    // Last axis varies fastest.
    std::size_t a = axes.size();
    while (a > 0) {
      --a;
      if (++pos[a] < axes[a].second.size()) break;
      pos[a] = 0;
      if (a == 0) return;
    }
    if (axes.empty()) return;
  }
}

}  // namespace

BenchPlan BenchPlan::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("bench plan must be a JSON object");
  BenchPlan plan;
  double default_s_min = 0.04;
  nlohmann::json base = nlohmann::json::object();
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "seed") plan.seed = value.get<std::uint64_t>();
      else if (key == "replicates") plan.replicates = value.get<std::size_t>();
      else if (key == "beta") plan.beta = value.get<double>();
      else if (key == "s_min") default_s_min = value.get<double>();
      else if (key == "base") base = value;
      else if (key != "methods" && key != "grid" && key != "configs")
        throw ConfigError(fmt::format("unknown bench key '{}'", key));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(fmt::format("bad value for bench key '{}': {}", key, e.what()));
    }
  }
  if (!base.is_object()) throw ConfigError("bench key 'base' must be an object");
  SimConfig::from_json(base);  // reject bad base keys even when unused

  if (!j.contains("methods") || !j["methods"].is_array() || j["methods"].empty())
    throw ConfigError("bench key 'methods' must be a non-empty array");
  for (const auto& m : j["methods"]) plan.methods.push_back(method_from_json(m, default_s_min));

  if (j.contains("configs")) {
    if (!j["configs"].is_array()) throw ConfigError("bench key 'configs' must be an array");
    for (const auto& c : j["configs"]) {
      nlohmann::json cell = base;
      if (!c.is_object()) throw ConfigError("bench key 'configs' must hold objects");
      for (const auto& [k, v] : c.items()) cell[k] = v;
      plan.configs.push_back(SimConfig::from_json(cell));
    }
  }
  if (j.contains("grid")) {
    if (!j["grid"].is_object()) throw ConfigError("bench key 'grid' must be an object");
    expand_grid(j["grid"], base, plan.configs);
  }
  if (plan.configs.empty()) throw ConfigError("bench plan defines no configs");
  if (plan.replicates < 1) throw ConfigError("bench key 'replicates' must be >= 1");
  for (const auto& c : plan.configs) c.validate();
  return plan;
}

nlohmann::json BenchPlan::to_json() const {
  nlohmann::json j{{"seed", seed}, {"replicates", replicates}, {"beta", beta}};
  j["methods"] = nlohmann::json::array();
  for (const auto& m : methods) j["methods"].push_back(m.to_json());
  j["configs"] = nlohmann::json::array();
  for (const auto& c : configs) j["configs"].push_back(c.to_json());
  return j;
}

std::size_t BenchTable::succeeded() const {
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [](const BenchRow& r) { return r.ok; }));
}

// ---------------------------------------------------------------------------
// Harness

BenchTable run_monte_carlo(const BenchPlan& plan, unsigned workers) {
  if (plan.methods.empty() || plan.configs.empty() || plan.replicates < 1)
    throw ConfigError("Monte Carlo run needs methods, configs and replicates >= 1");
  const std::size_t nm = plan.methods.size();
  const std::size_t cells = plan.configs.size() * plan.replicates;

  BenchTable table;
  table.plan = plan;
  table.rows.resize(cells * nm);
  parallel_for(cells, workers, [&](std::size_t cell) {
    const std::size_t config = cell / plan.replicates;
    const std::size_t rep = cell % plan.replicates;
    SimConfig sim = plan.configs[config];
    sim.seed = derive_seed(plan.seed, config, rep);
    for (std::size_t m = 0; m < nm; ++m) {
      auto& row = table.rows[cell * nm + m];
      row.config = config;
      row.replicate = rep;
      row.method = m;
      row.seed = sim.seed;
    }

    std::optional<Simulated> data;
    try {
      data = generate(sim);
    } catch (const std::exception& e) {
      for (std::size_t m = 0; m < nm; ++m)
        table.rows[cell * nm + m].error = fmt::format("simgen: {}", e.what());
      return;
    }
    for (std::size_t m = 0; m < nm; ++m) {
      auto& row = table.rows[cell * nm + m];
      const auto start = std::chrono::steady_clock::now();
      try {
        const auto flags =
            run_method(plan.methods[m], data->points, shape_of(sim.regime), 1);
        row.counts = confusion(flags, data->points.labels());
        row.m = metrics(row.counts, plan.beta);
        row.ok = true;
      } catch (const std::exception& e) {
        row.error = fmt::format("{}: {}", plan.methods[m].id, e.what());
      }
      row.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
  });
  table.aggregates = aggregate(table.rows, plan.configs.size(), nm);
  return table;
}

std::vector<BenchAggregate> aggregate(const std::vector<BenchRow>& rows, std::size_t configs,
                                      std::size_t methods) {
  std::vector<BenchAggregate> out(configs * methods);
  std::vector<std::vector<double>> tpr(out.size()), tnr(out.size()), ba(out.size()),
      f2(out.size());
  for (const auto& r : rows) {
    if (!r.ok) continue;
    const std::size_t slot = r.config * methods + r.method;
    tpr[slot].push_back(r.m.tpr);
    tnr[slot].push_back(r.m.tnr);
    ba[slot].push_back(r.m.ba);
    f2[slot].push_back(r.m.f_beta);
  }
  for (std::size_t c = 0; c < configs; ++c)
    for (std::size_t m = 0; m < methods; ++m) {
      const std::size_t slot = c * methods + m;
      auto& a = out[slot];
      a.config = c;
      a.method = m;
      a.replicates_ok = f2[slot].size();
      a.tpr_mean = mean(tpr[slot]);
      a.tpr_sd = stddev(tpr[slot]);
      a.tnr_mean = mean(tnr[slot]);
      a.tnr_sd = stddev(tnr[slot]);
      a.ba_mean = mean(ba[slot]);
      a.ba_sd = stddev(ba[slot]);
      a.f2_mean = mean(f2[slot]);
      a.f2_sd = stddev(f2[slot]);
    }
  return out;
}

std::vector<RankRow> rank_methods(const std::vector<BenchAggregate>& aggregates) {
  std::map<std::size_t, std::vector<const BenchAggregate*>> by_config;
  for (const auto& a : aggregates)
    if (a.replicates_ok > 0) by_config[a.config].push_back(&a);
  std::vector<RankRow> out;
  for (const auto& [config, group] : by_config) {
    std::vector<double> distinct;
    for (const auto* a : group) distinct.push_back(a->f2_mean);
    std::sort(distinct.begin(), distinct.end(), std::greater<>());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    for (const auto* a : group) {
      const auto pos = std::find(distinct.begin(), distinct.end(), a->f2_mean) - distinct.begin();
      const auto rank = static_cast<std::size_t>(pos) + 1;
      out.push_back({config, a->method, a->f2_mean, rank, rank <= 3});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Output

namespace {

std::string clean(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace

std::string config_label(const SimConfig& cfg) {
  return fmt::format("{}/d{}/n{}", to_string(cfg.regime), cfg.d, cfg.n);
}

std::string raw_csv(const BenchTable& t) {
  std::string out =
      "row_type,config,label,replicate,seed,method,status,tp,fp,tn,fn,tpr,tnr,ba,f2\n";
  for (const auto& r : t.rows) {
    const auto& cfg = t.plan.configs[r.config];
    out += fmt::format("raw,{},{},{},{},{},", r.config, config_label(cfg), r.replicate, r.seed,
                       t.plan.methods[r.method].id);
    if (r.ok)
      out += fmt::format("ok,{},{},{},{},{},{},{},{}\n", r.counts.tp, r.counts.fp, r.counts.tn,
                         r.counts.fn, r.m.tpr, r.m.tnr, r.m.ba, r.m.f_beta);
    else
      out += fmt::format("{},,,,,,,,\n", clean("error: " + r.error));
  }
  return out;
}

std::string aggregate_csv(const BenchTable& t) {
  std::string out =
      "row_type,config,label,method,replicates_ok,tpr_mean,tpr_sd,tnr_mean,tnr_sd,ba_mean,ba_sd,"
      "f2_mean,f2_sd\n";
  for (const auto& a : t.aggregates) {
    out += fmt::format("aggregate,{},{},{},{},{},{},{},{},{},{},{},{}\n", a.config,
                       config_label(t.plan.configs[a.config]), t.plan.methods[a.method].id,
                       a.replicates_ok, a.tpr_mean, a.tpr_sd, a.tnr_mean, a.tnr_sd, a.ba_mean,
                       a.ba_sd, a.f2_mean, a.f2_sd);
  }
  return out;
}

std::string ranking_csv(const BenchTable& t, const std::vector<RankRow>& ranks) {
  std::string out = "config,label,method,f2_mean,rank,top3\n";
  for (const auto& r : ranks)
    out += fmt::format("{},{},{},{},{},{}\n", r.config, config_label(t.plan.configs[r.config]),
                       t.plan.methods[r.method].id, r.f2_mean, r.rank, r.top3 ? 1 : 0);
  return out;
}

nlohmann::json bench_to_json(const BenchTable& t, const std::vector<RankRow>& ranks) {
  nlohmann::json j;
  j["plan"] = t.plan.to_json();
  j["aggregates"] = nlohmann::json::array();
  for (const auto& a : t.aggregates)
    j["aggregates"].push_back({{"config", a.config},
                               {"method", t.plan.methods[a.method].id},
                               {"replicates_ok", a.replicates_ok},
                               {"tpr", a.tpr_mean},
                               {"tnr", a.tnr_mean},
                               {"ba", a.ba_mean},
                               {"f2", a.f2_mean}});
  j["ranking"] = nlohmann::json::array();
  for (const auto& r : ranks)
    j["ranking"].push_back({{"config", r.config},
                            {"method", t.plan.methods[r.method].id},
                            {"rank", r.rank},
                            {"top3", r.top3}});
  return j;
}

}  // namespace ccdos
