#include "ccdos/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <boost/version.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "ccdos/baselines.hpp"
#include "ccdos/error.hpp"
#include "ccdos/eval.hpp"
#include "ccdos/robust.hpp"
#include "ccdos/scores.hpp"
#include "ccdos/simgen.hpp"

namespace ccdos::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError(fmt::format("cannot create directory '{}'", path.parent_path().string()));
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  f << text;
  if (!f) throw IoError(fmt::format("write to '{}' failed", path.string()));
}

std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError(fmt::format("cannot read '{}'", path.string()));
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

json read_json(const fs::path& path) {
  const std::string text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("'{}' is not valid JSON: {}", path.string(), e.what()));
  }
}

json versions() {
  return {{"ccdos", kVersion},
          {"fmt", FMT_VERSION},
          {"nlohmann_json", fmt::format("{}.{}.{}", NLOHMANN_JSON_VERSION_MAJOR,
                                        NLOHMANN_JSON_VERSION_MINOR,
                                        NLOHMANN_JSON_VERSION_PATCH)},
          {"boost", BOOST_LIB_VERSION}};
}

json manifest(const std::vector<std::string>& args, const std::string& command) {
  return {{"command", command}, {"argv", args}, {"versions", versions()}};
}

// Tracks the step in progress so failures can name it.
struct Stage {
  std::string name = "cli.parse";
  void operator()(std::string next) { name = std::move(next); }
};

// ---------------------------------------------------------------------------
// Options shared by subcommands

struct GenOptions {
  std::string out;
  std::string config;
  std::string regime;
  std::optional<std::size_t> d, n, clusters, collective;
  std::optional<double> outlier_fraction, separation;
  std::optional<std::uint64_t> seed;
};

struct FixtureOptions {
  std::string out;
  std::uint64_t seed = 1;
};

struct ScoreOptions {
  std::string input;
  std::string out_dir;
  std::string label_column;
  bool no_header = false;
  std::string method = "ios";
  std::string digraph = "rk-approx";
  std::optional<std::size_t> k;
  std::optional<double> threshold;
  double s_min = 0.0;
  std::string cluster_shape;
  std::string density = "root";
  std::string backend = "kd-tree";
  bool no_normalize = false;
  bool digraph_json = false;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::size_t bins = 20;
};

struct BenchOptions {
  std::string grid;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicates;
  std::optional<double> beta;
  unsigned workers = 1;
};

struct EvalOptions {
  std::string truth;
  std::string label_column = "label";
  std::string scores;
  std::string flag_column = "ios_outlier";
  double beta = 2.0;
  std::string out;
};

// ---------------------------------------------------------------------------
// gen / fixture

int cmd_gen(const GenOptions& o, const std::vector<std::string>& args, std::ostream& out,
            Stage& stage) {
  stage("simgen.config");
  json cfg_json = o.config.empty() ? json::object() : read_json(o.config);
  if (!o.regime.empty()) cfg_json["regime"] = o.regime;
  if (o.d) cfg_json["d"] = *o.d;
  if (o.n) cfg_json["n"] = *o.n;
  if (o.clusters) cfg_json["n_clusters"] = *o.clusters;
  if (o.collective) cfg_json["collective_size"] = *o.collective;
  if (o.outlier_fraction) cfg_json["outlier_fraction"] = *o.outlier_fraction;
  if (o.separation) cfg_json["outlier_min_separation"] = *o.separation;
  if (o.seed) cfg_json["seed"] = *o.seed;
  const SimConfig cfg = SimConfig::from_json(cfg_json);
  cfg.validate();

  stage("simgen.generate");
  const Simulated sim = generate(cfg);

  stage("cli.write");
  json m = manifest(args, "gen");
  m["config"] = cfg.to_json();
  m["cluster_shape"] = to_string(shape_of(cfg.regime));
  m["n_points"] = sim.points.size();
  m["n_outliers"] = sim.points.outlier_count();
  m["group"] = sim.group;
  write_text(o.out, to_csv(sim.points));
  write_text(fs::path(o.out).replace_extension(".json"), m.dump(2) + "\n");
  out << fmt::format("wrote {} points ({} outliers) to {}\n", sim.points.size(),
                     sim.points.outlier_count(), o.out);
  return kExitOk;
}

int cmd_fixture(const FixtureOptions& o, const std::vector<std::string>& args,
                std::ostream& out, Stage& stage) {
  stage("simgen.figure1_fixture");
  const Fixture fx = figure1_fixture(o.seed);

  stage("cli.write");
  json m = manifest(args, "fixture");
  m["seed"] = o.seed;
  m["cluster_shape"] = "mixed";
  m["role"] = fx.role;
  m["gaussian_center"] = fx.gaussian_center;
  m["gaussian_sigma"] = fx.gaussian_sigma;
  m["gaussian_correlation"] = fx.gaussian_correlation;
  write_text(o.out, to_csv(fx.points));
  write_text(fs::path(o.out).replace_extension(".json"), m.dump(2) + "\n");
  out << fmt::format("wrote fixture ({} points, {} outliers) to {}\n", fx.points.size(),
                     fx.points.outlier_count(), o.out);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// score

std::string histogram_csv(const std::string& name, const std::vector<double>& values,
                          std::size_t bins) {
  std::vector<double> finite;
  std::size_t infinite = 0;
  for (double v : values) {
    if (std::isfinite(v)) finite.push_back(v);
    else ++infinite;
  }
  std::string out = "score,bin,lo,hi,count\n";
  if (!finite.empty()) {
    const auto [lo_it, hi_it] = std::minmax_element(finite.begin(), finite.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    const double width = hi > lo ? (hi - lo) / static_cast<double>(bins) : 1.0;
    std::vector<std::size_t> count(bins, 0);
    for (double v : finite) {
      auto b = static_cast<std::size_t>((v - lo) / width);
      ++count[std::min(b, bins - 1)];
    }
    for (std::size_t b = 0; b < bins; ++b)
      out += fmt::format("{},{},{},{},{}\n", name, b, lo + width * static_cast<double>(b),
                         lo + width * static_cast<double>(b + 1), count[b]);
  }
  if (infinite > 0) out += fmt::format("{},inf,inf,inf,{}\n", name, infinite);
  return out;
}

std::string cluster_table_csv(const Clustering& cl, const ScoreReport& r) {
  std::string out =
      "cluster,size,ios_raw_median,ios_raw_madn,oos_max,ios_std_max,oos_flagged,ios_flagged\n";
  for (std::size_t c = 0; c < cl.cluster_count(); ++c) {
    std::vector<double> raw;
    double oos_max = -INFINITY;
    double ios_max = -INFINITY;
    std::size_t fo = 0, fi = 0;
    for (auto i : cl.members[c]) {
      raw.push_back(r.ios_raw[i]);
      oos_max = std::max(oos_max, r.oos[i]);
      ios_max = std::max(ios_max, r.ios_std[i]);
      fo += r.oos_outlier[i] ? 1 : 0;
      fi += r.ios_outlier[i] ? 1 : 0;
    }
    const double med = median(raw);
    out += fmt::format("{},{},{},{},{},{},{},{}\n", c, cl.cluster_size(c), med, madn(raw),
                       std::isfinite(oos_max) ? fmt::format("{}", oos_max) : "inf", ios_max,
                       fo, fi);
  }
  return out;
}

int cmd_score(const ScoreOptions& o, const std::vector<std::string>& args, std::ostream& out,
              Stage& stage) {
  // Everything that can fail on configuration is resolved before any file I/O.
  stage("cli.validate");
  const bool baseline = o.method == "lof" || o.method == "odin";
  if (!baseline && o.method != "oos" && o.method != "ios")
    throw ConfigError(fmt::format("unknown method '{}' (oos, ios, lof, odin)", o.method));
  RadiusStrategy radius;
  radius.kind = parse_radius_kind(o.digraph);
  radius.k = o.k;
  const DensityForm density = parse_density_form(o.density);
  const IndexBackend backend = parse_index_backend(o.backend);
  std::optional<ClusterShape> shape;
  if (!o.cluster_shape.empty()) shape = parse_cluster_shape(o.cluster_shape);
  if (o.s_min < 0.0 || o.s_min > 1.0) throw ConfigError("--s-min must lie in [0, 1]");
  if (o.bins < 1) throw ConfigError("--bins must be >= 1");

  stage("dataset.load_csv");
  CsvOptions csv;
  csv.has_header = !o.no_header;
  if (!o.label_column.empty()) csv.label_column = o.label_column;
  const PointSet raw = load_csv(o.input, csv);

  std::optional<NormalizationReport> norm;
  PointSet ps = raw;
  if (!o.no_normalize) {
    stage("dataset.robust_normalize");
    auto np = robust_normalize(raw);
    ps = std::move(np.points);
    norm = std::move(np.report);
  }

  json m = manifest(args, "score");
  m["input"] = o.input;
  m["n"] = ps.size();
  m["d"] = ps.dim();
  m["seed"] = o.seed;
  m["workers"] = o.workers;
  m["normalized"] = !o.no_normalize;
  m["method"] = o.method;
  m["backend"] = o.backend;

  std::map<std::string, std::string> files;
  std::optional<json> ccd_json;

  if (baseline) {
    stage(fmt::format("baselines.{}", o.method));
    const NeighborIndex idx(ps, backend);
    Detection det;
    if (o.method == "lof") {
      LofConfig cfg;
      if (o.threshold) cfg.threshold = *o.threshold;
      det = lof(idx, cfg, o.workers);
      m["lof"] = {{"k_min", cfg.k_min}, {"k_max", cfg.k_max}, {"threshold", cfg.threshold}};
    } else {
      OdinConfig cfg;
      cfg.k = o.k;
      det = odin(idx, cfg, o.workers);
      m["odin"] = {{"k", cfg.resolved_k(ps.size())}, {"t", cfg.resolved_t(ps.size())}};
    }
    std::string csv_out = "id,score,flag\n";
    json pts = json::array();
    for (std::size_t i = 0; i < det.score.size(); ++i) {
      csv_out += fmt::format("{},{},{}\n", i, det.score[i], det.flag[i] ? 1 : 0);
      pts.push_back({{"id", i}, {"score", det.score[i]}, {"flag", static_cast<bool>(det.flag[i])}});
    }
    files["scores.csv"] = csv_out;
    files["scores.json"] = json{{"method", o.method}, {"points", pts}}.dump(2) + "\n";
    files["histogram.csv"] = histogram_csv(o.method, det.score, o.bins);
    m["flagged"] = std::count(det.flag.begin(), det.flag.end(), true);
  } else {
    const ScoreKind kind = parse_score_kind(o.method);
    const DigraphKind family = threshold_family(radius.kind);
    // Without a cluster shape the real-data default of 2 applies.
    const auto resolve = [&](ScoreKind k) {
      if (o.threshold) return *o.threshold;
      if (shape) return default_threshold(k, family, *shape, ps.dim());
      return 2.0;
    };
    FlagSettings flags{resolve(ScoreKind::oos), resolve(ScoreKind::ios), o.s_min};
    CcdConfig cfg;
    cfg.radius = radius;
    cfg.density = density;
    cfg.backend = backend;
    cfg.workers = o.workers;

    stage("scores.run_ccd");
    const CcdResult res = run_ccd(ps, cfg, flags);
    const auto& rep = res.report;

    m["radius"] = radius.to_json();
    m["radius"]["k_resolved"] = radius.resolved_k(ps.size());
    m["clustering"] = {{"attach_factor", cfg.clustering.attach_factor},
                       {"min_cluster_fraction", cfg.clustering.min_cluster_fraction},
                       {"clusters", res.clustering.cluster_count()}};
    m["density"] = to_string(density);
    m["cluster_shape"] = shape ? to_string(*shape) : "none";
    m["oos_threshold"] = flags.oos_threshold;
    m["ios_threshold"] = flags.ios_threshold;
    m["s_min"] = flags.s_min;
    const auto& chosen = kind == ScoreKind::oos ? rep.oos_outlier : rep.ios_outlier;
    m["flagged"] = std::count(chosen.begin(), chosen.end(), true);

    files["scores.csv"] = report_to_csv(rep);
    json rj = report_to_json(rep);
    rj["method"] = o.method;
    files["scores.json"] = rj.dump(2) + "\n";
    files["histogram.csv"] = histogram_csv("oos", rep.oos, o.bins) +
                             histogram_csv("ios_std", rep.ios_std, o.bins).substr(
                                 std::string("score,bin,lo,hi,count\n").size());
    files["clusters.csv"] = cluster_table_csv(res.clustering, rep);
    if (o.digraph_json) ccd_json = to_json(res.digraph, res.clustering);
  }
  if (norm) files["normalization.json"] = norm->to_json().dump(2) + "\n";
  if (ccd_json) files["digraph.json"] = ccd_json->dump() + "\n";

  stage("cli.write");
  for (const auto& [name, text] : files) write_text(fs::path(o.out_dir) / name, text);
  m["outputs"] = json::array();
  for (const auto& [name, text] : files) m["outputs"].push_back(name);
  write_text(fs::path(o.out_dir) / "manifest.json", m.dump(2) + "\n");
  out << fmt::format("{} of {} points flagged; results in {}\n", m["flagged"].get<long>(),
                     ps.size(), o.out_dir);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// bench

int cmd_bench(const BenchOptions& o, const std::vector<std::string>& args, std::ostream& out,
              std::ostream& err, Stage& stage) {
  stage("eval.plan");
  json grid = read_json(o.grid);
  if (o.seed) grid["seed"] = *o.seed;
  if (o.replicates) grid["replicates"] = *o.replicates;
  if (o.beta) grid["beta"] = *o.beta;
  const BenchPlan plan = BenchPlan::from_json(grid);

  stage("eval.run_monte_carlo");
  const auto start = std::chrono::steady_clock::now();
  const BenchTable table = run_monte_carlo(plan, o.workers);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto ranks = rank_methods(table.aggregates);

  for (const auto& r : table.rows)
    if (!r.ok)
      err << fmt::format("cell config={} replicate={} method={} failed: {}\n", r.config,
                         r.replicate, plan.methods[r.method].id, r.error);

  stage("cli.write");
  const fs::path dir(o.out_dir);
  write_text(dir / "raw.csv", raw_csv(table));
  write_text(dir / "aggregate.csv", aggregate_csv(table));
  write_text(dir / "ranking.csv", ranking_csv(table, ranks));
  write_text(dir / "bench.json", bench_to_json(table, ranks).dump(2) + "\n");
  json m = manifest(args, "bench");
  m["grid"] = o.grid;
  m["plan"] = plan.to_json();
  m["workers"] = o.workers;
  m["cells"] = table.rows.size();
  m["cells_ok"] = table.succeeded();
  m["wall_seconds"] = wall;
  json timing = json::array();
  for (const auto& r : table.rows)
    timing.push_back({{"config", r.config},
                      {"replicate", r.replicate},
                      {"method", plan.methods[r.method].id},
                      {"wall_seconds", r.wall_seconds}});
  m["cell_wall_seconds"] = timing;
  write_text(dir / "manifest.json", m.dump(2) + "\n");

  out << fmt::format("{} of {} cells succeeded; results in {}\n", table.succeeded(),
                     table.rows.size(), o.out_dir);
  return table.succeeded() == 0 ? kExitNoCell : kExitOk;
}

// ---------------------------------------------------------------------------
// eval

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::vector<bool> read_flag_column(const std::string& path, const std::string& column) {
  std::istringstream in(read_text(path));
  std::string line;
  if (!std::getline(in, line)) throw DataError(fmt::format("'{}' is empty", path));
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);
  const auto it = std::find(header.begin(), header.end(), column);
  if (it == header.end())
    throw DataError(fmt::format("column '{}' not found in '{}'", column, path));
  const auto col = static_cast<std::size_t>(it - header.begin());
  std::vector<bool> flags;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (col >= cells.size()) throw ParseError(row, col + 1, "missing flag cell");
    if (cells[col] == "1" || cells[col] == "true") flags.push_back(true);
    else if (cells[col] == "0" || cells[col] == "false") flags.push_back(false);
    else throw ParseError(row, col + 1, fmt::format("flag '{}' is not 0/1", cells[col]));
  }
  return flags;
}

int cmd_eval(const EvalOptions& o, std::ostream& out, Stage& stage) {
  stage("dataset.load_csv");
  CsvOptions csv;
  csv.label_column = o.label_column;
  const PointSet truth = load_csv(o.truth, csv);
  stage("eval.read_flags");
  const auto flags = read_flag_column(o.scores, o.flag_column);
  stage("eval.metrics");
  const Confusion c = confusion(flags, truth.labels());
  const Metrics mt = metrics(c, o.beta);
  const json j{{"tp", c.tp},        {"fp", c.fp},   {"tn", c.tn},
               {"fn", c.fn},        {"tpr", mt.tpr}, {"tnr", mt.tnr},
               {"ba", mt.ba},       {"precision", mt.precision},
               {"beta", o.beta},    {"f_beta", mt.f_beta}};
  if (!o.out.empty()) {
    stage("cli.write");
    write_text(o.out, j.dump(2) + "\n");
  }
  out << j.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cluster catch digraph outlier scores"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  GenOptions gen;
  auto* g = app.add_subcommand("gen", "Generate a synthetic data set");
  g->add_option("--out,-o", gen.out, "Output CSV path")->required();
  g->add_option("--config", gen.config, "SimConfig JSON; flags override its keys");
  g->add_option("--regime", gen.regime, "uniform, gaussian, matern, thomas or mixed");
  g->add_option("--d", gen.d, "Dimension");
  g->add_option("--n", gen.n, "Total points, outliers included");
  g->add_option("--clusters", gen.clusters, "Cluster count (uniform/gaussian)");
  g->add_option("--outlier-fraction", gen.outlier_fraction);
  g->add_option("--separation", gen.separation, "Outlier clearance in cluster scales");
  g->add_option("--collective", gen.collective, "Size of a collective outlier group");
  g->add_option("--seed", gen.seed);

  FixtureOptions fix;
  auto* f = app.add_subcommand("fixture", "Write the three-cluster masking fixture");
  f->add_option("--out,-o", fix.out, "Output CSV path")->required();
  f->add_option("--seed", fix.seed);

  ScoreOptions sc;
  auto* s = app.add_subcommand("score", "Score a CSV data set");
  s->add_option("--input,-i", sc.input, "Input CSV")->required();
  s->add_option("--out-dir,-o", sc.out_dir, "Output directory")->required();
  s->add_option("--label-column", sc.label_column, "Header name of a 0/1 label column");
  s->add_flag("--no-header", sc.no_header);
  s->add_option("--method", sc.method, "oos, ios, lof or odin");
  s->add_option("--digraph", sc.digraph, "rk-approx, un-approx or fixed-k");
  s->add_option("--k", sc.k, "Neighbor count (default round(sqrt(n)))");
  s->add_option("--threshold", sc.threshold, "Override the flagging threshold");
  s->add_option("--s-min", sc.s_min, "IOS: flag clusters below this fraction of n");
  s->add_option("--cluster-shape", sc.cluster_shape,
                "uniform, gaussian or mixed: use the tabulated threshold");
  s->add_option("--density", sc.density, "root (|B|/r)^(1/d) or volume |B|/r^d");
  s->add_option("--backend", sc.backend, "kd-tree or brute-force");
  s->add_flag("--no-normalize", sc.no_normalize, "Skip Med/MADN column scaling");
  s->add_flag("--digraph-json", sc.digraph_json, "Also write digraph.json");
  s->add_option("--bins", sc.bins, "Histogram bins");
  s->add_option("--seed", sc.seed, "Recorded in the manifest");
  s->add_option("--workers,-j", sc.workers);

  BenchOptions be;
  auto* b = app.add_subcommand("bench", "Run a Monte Carlo grid");
  b->add_option("--grid,-g", be.grid, "Grid JSON")->required();
  b->add_option("--out-dir,-o", be.out_dir, "Output directory")->required();
  b->add_option("--seed", be.seed, "Override the grid's master seed");
  b->add_option("--replicates", be.replicates);
  b->add_option("--beta", be.beta);
  b->add_option("--workers,-j", be.workers);

  EvalOptions ev;
  auto* e = app.add_subcommand("eval", "Compare flags against labels");
  e->add_option("--truth", ev.truth, "Labeled CSV")->required();
  e->add_option("--label-column", ev.label_column);
  e->add_option("--scores", ev.scores, "CSV with a 0/1 flag column")->required();
  e->add_option("--flag-column", ev.flag_column);
  e->add_option("--beta", ev.beta);
  e->add_option("--out,-o", ev.out, "Metrics JSON");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& pe) {
    if (pe.get_exit_code() == 0) {
      out << (dynamic_cast<const CLI::CallForVersion*>(&pe) ? std::string(kVersion) + "\n"
                                                             : app.help());
      return kExitOk;
    }
    err << "ccdos: " << pe.what() << "\n";
    return kExitConfig;
  }

  Stage stage;
  try {
    if (*g) return cmd_gen(gen, args, out, stage);
    if (*f) return cmd_fixture(fix, args, out, stage);
    if (*s) return cmd_score(sc, args, out, stage);
    if (*b) return cmd_bench(be, args, out, err, stage);
    if (*e) return cmd_eval(ev, out, stage);
  } catch (const ConfigError& ex) {
    err << fmt::format("ccdos: {}: configuration error: {}\n", stage.name, ex.what());
    return kExitConfig;
  } catch (const DataError& ex) {
    err << fmt::format("ccdos: {}: data error: {}\n", stage.name, ex.what());
    return kExitData;
  } catch (const std::exception& ex) {
    err << fmt::format("ccdos: {}: {}\n", stage.name, ex.what());
    return kExitData;
  }
  return kExitConfig;
}

}  // namespace ccdos::cli
