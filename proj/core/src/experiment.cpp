#include "rlc/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "rlc/ensemble.hpp"
#include "rlc/error.hpp"
#include "rlc/io.hpp"

namespace rlc {
namespace fs = std::filesystem;
using nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

constexpr const char* kToolVersion = "0.1.0";

std::string method_label(const MethodEntry& m) {
  if (!m.name.empty()) return m.name;
  if (m.kind == MethodEntry::Kind::kSt) return "ST";
  return "RLC(k=" + std::to_string(m.k) + ";r=" + std::to_string(m.r) + ")";
}

std::string file_safe(const std::string& s) {
  std::string out = s;
  for (auto& c : out)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) c = '_';
  return out;
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

ojson config_echo(const ExperimentConfig& c) {
  ojson j;
  ojson datasets = ojson::array();
  for (const auto& d : c.datasets) {
    ojson e;
    e["name"] = d.name;
    e["path"] = d.path.string();
    if (d.test_path) e["test_path"] = d.test_path->string();
    if (!d.targets.names.empty()) e["target_names"] = d.targets.names;
    if (d.targets.count) e["targets"] = *d.targets.count;
    datasets.push_back(e);
  }
  j["datasets"] = datasets;
  ojson methods = ojson::array();
  for (const auto& m : c.methods) {
    ojson e;
    e["type"] = m.kind == MethodEntry::Kind::kSt ? "st" : "rlc";
    e["name"] = method_label(m);
    if (m.kind == MethodEntry::Kind::kRlc) {
      e["r"] = m.r;
      e["k"] = m.k;
      e["seed"] = m.seed.value_or(c.seed);
    }
    methods.push_back(e);
  }
  j["methods"] = methods;
  j["gbm"] = {{"iterations", c.gbm.iterations},
              {"learning_rate", c.gbm.learning_rate},
              {"max_leaves", c.gbm.max_leaves},
              {"min_leaf", c.gbm.min_leaf}};
  j["folds"] = c.folds;
  j["seed"] = c.seed;
  if (c.sweep) j["sweep"] = {{"r", c.sweep->r_values}, {"k", c.sweep->k_values}};
  j["jobs"] = c.jobs;
  j["impute_missing"] = c.impute_missing;
  j["degenerate_policy"] = c.policy == DegeneratePolicy::kError ? "error" : "skip";
  return j;
}

struct LoadedData {
  Dataset train;  // whole dataset for CV
  std::optional<Dataset> test;
};

LoadedData load_entry(const DatasetEntry& d, bool impute) {
  LoadedData out{load_dataset(d.path, d.targets, impute), std::nullopt};
  if (d.test_path) {
    out.test = load_dataset(*d.test_path, d.targets, impute);
    if (out.test->num_inputs() != out.train.num_inputs() || out.test->num_targets() != out.train.num_targets())
      throw ConfigError("dataset '" + d.name + "': train and test files disagree on p or q");
  }
  return out;
}

std::vector<EvalReport> evaluate_family(const FamilyTrainer& trainer, const LoadedData& data,
                                        const ExperimentConfig& config) {
  if (data.test) return evaluate_holdout_family(trainer, data.train, *data.test, config.policy);
  return evaluate_cv_family(trainer, data.train, config.folds, config.seed, config.policy);
}

FamilyTrainer method_trainer(const MethodEntry& m, const ExperimentConfig& config) {
  if (m.kind == MethodEntry::Kind::kSt) {
    GbmConfig gbm = config.gbm;
    gbm.seed = config.seed;
    const std::size_t jobs = config.jobs;
    return [gbm, jobs](const Dataset& train) {
      std::vector<std::unique_ptr<MultiTargetModel>> v;
      v.push_back(std::make_unique<StModel>(train_st(train, gbm, jobs)));
      return v;
    };
  }
  RlcParams params;
  params.r = m.r;
  params.k = m.k;
  params.seed = m.seed.value_or(config.seed);
  params.gbm = config.gbm;
  params.gbm.seed = params.seed;
  const std::size_t jobs = config.jobs;
  return [params, jobs](const Dataset& train) {
    std::vector<std::unique_ptr<MultiTargetModel>> v;
    v.push_back(std::make_unique<RlcModel>(train_rlc(train, params, jobs)));
    return v;
  };
}

void write_file(const fs::path& root, const fs::path& rel, const std::string& content,
                std::vector<fs::path>& files) {
  write_text_file(root / rel, content);
  files.push_back(rel);
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(const std::string& json_text, const fs::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base_dir / p; };

  ExperimentConfig c;
  try {
    for (const auto& d : j.at("datasets")) {
      DatasetEntry e;
      e.path = resolve(d.at("path").get<std::string>());
      e.name = get_or<std::string>(d, "name", e.path.stem().string());
      if (d.contains("test_path")) e.test_path = resolve(d.at("test_path").get<std::string>());
      if (d.contains("target_names")) e.targets.names = d.at("target_names").get<std::vector<std::string>>();
      if (d.contains("targets")) e.targets.count = d.at("targets").get<std::size_t>();
      c.datasets.push_back(std::move(e));
    }
    for (const auto& m : j.at("methods")) {
      MethodEntry e;
      const auto type = m.at("type").get<std::string>();
      if (type == "st") e.kind = MethodEntry::Kind::kSt;
      else if (type == "rlc") e.kind = MethodEntry::Kind::kRlc;
      else throw ConfigError("unknown method type '" + type + "'");
      e.name = get_or<std::string>(m, "name", "");
      e.r = get_or<std::size_t>(m, "r", e.r);
      e.k = get_or<std::size_t>(m, "k", e.k);
      if (m.contains("seed")) e.seed = m.at("seed").get<std::uint64_t>();
      c.methods.push_back(std::move(e));
    }
    if (j.contains("gbm")) {
      const auto& g = j.at("gbm");
      c.gbm.iterations = get_or<std::size_t>(g, "iterations", c.gbm.iterations);
      c.gbm.learning_rate = get_or<double>(g, "learning_rate", c.gbm.learning_rate);
      c.gbm.max_leaves = get_or<std::size_t>(g, "max_leaves", c.gbm.max_leaves);
      c.gbm.min_leaf = get_or<std::size_t>(g, "min_leaf", c.gbm.min_leaf);
    }
    c.folds = get_or<std::size_t>(j, "folds", c.folds);
    c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
    c.jobs = get_or<std::size_t>(j, "jobs", c.jobs);
    c.impute_missing = get_or<bool>(j, "impute_missing", c.impute_missing);
    c.output_dir = resolve(get_or<std::string>(j, "output_dir", c.output_dir.string()));
    const auto policy = get_or<std::string>(j, "degenerate_policy", "error");
    if (policy == "error") c.policy = DegeneratePolicy::kError;
    else if (policy == "skip") c.policy = DegeneratePolicy::kSkip;
    else throw ConfigError("degenerate_policy must be 'error' or 'skip'");
    if (j.contains("sweep")) {
      SweepEntry s;
      s.r_values = j.at("sweep").at("r").get<std::vector<std::size_t>>();
      s.k_values = j.at("sweep").at("k").get<std::vector<std::size_t>>();
      c.sweep = std::move(s);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
  return parse(read_text_file(path), path.parent_path());
}

void ExperimentConfig::validate() const {
  if (datasets.empty()) throw ConfigError("config lists no datasets");
  if (methods.empty() && !sweep) throw ConfigError("config lists no methods and no sweep");
  std::set<std::string> names;
  for (const auto& d : datasets) {
    if (!names.insert(d.name).second) throw ConfigError("dataset name '" + d.name + "' used twice");
    if (!fs::exists(d.path)) throw ConfigError("dataset file not found: " + d.path.string());
    if (d.test_path && !fs::exists(*d.test_path)) throw ConfigError("test file not found: " + d.test_path->string());
    if (!d.targets.count && d.targets.names.empty())
      throw ConfigError("dataset '" + d.name + "' needs 'targets' or 'target_names'");
  }
  std::set<std::string> labels;
  for (const auto& m : methods) {
    if (!labels.insert(method_label(m)).second) throw ConfigError("method name '" + method_label(m) + "' used twice");
    if (m.kind == MethodEntry::Kind::kRlc && m.k < 2) throw ParameterError("RLC k must be at least 2");
  }
  if (sweep && (sweep->r_values.empty() || sweep->k_values.empty()))
    throw ConfigError("sweep lists must be non-empty");
  if (folds < 2) throw ParameterError("folds must be at least 2");
  if (jobs < 1) throw ParameterError("jobs must be at least 1");
  gbm.validate();
}

std::size_t ExperimentSummary::failed() const {
  return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](const auto& c) { return !c.ok; }));
}

std::string emit_curve_data(std::vector<CurvePoint> points) {
  std::sort(points.begin(), points.end(), [](const CurvePoint& a, const CurvePoint& b) {
    return std::tie(a.dataset, a.k, a.r) < std::tie(b.dataset, b.k, b.r);
  });
  std::ostringstream out;
  out << "dataset,k,r,arrmse\n";
  for (const auto& p : points) out << p.dataset << ',' << p.k << ',' << p.r << ',' << format_real(p.arrmse) << '\n';

  std::set<std::string> datasets;
  for (const auto& p : points) datasets.insert(p.dataset);
  if (datasets.size() < 2) return out.str();

  // (dataset, k) -> r -> arrmse
  std::map<std::pair<std::string, std::size_t>, std::map<std::size_t, double>> series;
  for (const auto& p : points) series[{p.dataset, p.k}][p.r] = p.arrmse;

  std::set<std::size_t> ks;
  for (const auto& p : points) ks.insert(p.k);
  for (auto k : ks) {
    std::vector<const std::map<std::size_t, double>*> members;
    for (const auto& [key, curve] : series)
      if (key.second == k) members.push_back(&curve);
    if (members.size() < 2) continue;
    for (const auto& [r, unused] : *members.front()) {
      double sum = 0.0;
      bool everywhere = true;
      for (const auto* c : members) {
        auto it = c->find(r);
        if (it == c->end()) {
          everywhere = false;
          break;
        }
        sum += it->second;
      }
      if (everywhere) out << "average," << k << ',' << r << ',' << format_real(sum / static_cast<double>(members.size())) << '\n';
    }
  }

  // Every series, restricted to r values that all datasets reach.
  std::map<std::string, std::set<std::size_t>> r_by_dataset;
  for (const auto& p : points) r_by_dataset[p.dataset].insert(p.r);
  std::set<std::size_t> common = r_by_dataset.begin()->second;
  for (const auto& [name, rs] : r_by_dataset) {
    std::set<std::size_t> keep;
    std::set_intersection(common.begin(), common.end(), rs.begin(), rs.end(), std::inserter(keep, keep.end()));
    common = std::move(keep);
  }
  for (auto r : common) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& [key, curve] : series) {
      auto it = curve.find(r);
      if (it == curve.end()) continue;
      sum += it->second;
      ++n;
    }
    out << "average,all," << r << ',' << format_real(sum / static_cast<double>(n)) << '\n';
  }
  return out.str();
}

ExperimentSummary run_experiment(const ExperimentConfig& config, std::ostream* log) {
  config.validate();
  const fs::path& root = config.output_dir;
  fs::create_directories(root);

  ExperimentSummary summary;
  summary.table.datasets.reserve(config.datasets.size());
  for (const auto& d : config.datasets) summary.table.datasets.push_back(d.name);
  for (const auto& m : config.methods) summary.table.methods.push_back(method_label(m));
  summary.table.scores = Matrix(config.methods.size(), config.datasets.size(), std::nan(""));

  for (std::size_t di = 0; di < config.datasets.size(); ++di) {
    const auto& entry = config.datasets[di];
    std::optional<LoadedData> data;
    std::string load_error;
    try {
      data = load_entry(entry, config.impute_missing);
    } catch (const std::exception& e) {
      load_error = e.what();
      if (log) *log << "[" << entry.name << "] failed to load: " << load_error << '\n';
    }

    for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
      const auto& method = config.methods[mi];
      CellOutcome cell;
      cell.dataset = entry.name;
      cell.method = method_label(method);
      if (!data) {
        cell.error = load_error;
        summary.cells.push_back(cell);
        continue;
      }
      try {
        auto reports = evaluate_family(method_trainer(method, config), *data, config);
        auto& report = reports.front();
        report.method = cell.method;
        cell.ok = true;
        cell.arrmse = report.arrmse;
        cell.train_seconds = report.train_seconds;
        cell.predict_seconds = report.predict_seconds;
        summary.table.scores(mi, di) = report.arrmse;
        std::ostringstream js;
        write_report_json(js, report, data->train.target_names);
        write_file(root, fs::path("reports") / (file_safe(entry.name) + "__" + file_safe(cell.method) + ".json"),
                   js.str(), summary.files);
        if (log) *log << "[" << entry.name << "] " << cell.method << ": aRRMSE " << format_real(report.arrmse) << '\n';
      } catch (const std::exception& e) {
        cell.error = e.what();
        if (log) *log << "[" << entry.name << "] " << cell.method << " failed: " << cell.error << '\n';
      }
      summary.cells.push_back(cell);
    }

    if (!config.sweep) continue;
    for (auto k : config.sweep->k_values) {
      CellOutcome cell;
      cell.dataset = entry.name;
      cell.method = "sweep(k=" + std::to_string(k) + ")";
      if (!data) {
        cell.error = load_error;
        summary.cells.push_back(cell);
        continue;
      }
      const std::size_t q = data->train.num_targets();
      if (k > q) continue;  // k ranges over 2..q per dataset
      std::vector<std::size_t> rs;
      for (auto r : config.sweep->r_values)
        if (r >= q) rs.push_back(r);
      std::sort(rs.begin(), rs.end());
      rs.erase(std::unique(rs.begin(), rs.end()), rs.end());
      if (rs.empty()) continue;
      try {
        RlcParams params;
        params.r = rs.back();
        params.k = k;
        params.seed = config.seed;
        params.gbm = config.gbm;
        params.gbm.seed = config.seed;
        const std::size_t jobs = config.jobs;
        FamilyTrainer trainer = [&, params, jobs](const Dataset& train) {
          const RlcModel full = train_rlc(train, params, jobs);
          std::vector<std::unique_ptr<MultiTargetModel>> v;
          for (auto r : rs) v.push_back(std::make_unique<RlcModel>(full.prefix(r)));
          return v;
        };
        auto reports = evaluate_family(trainer, *data, config);
        std::ostringstream curve;
        curve << "r,arrmse\n";
        for (std::size_t i = 0; i < rs.size(); ++i) {
          summary.curve.push_back({entry.name, k, rs[i], reports[i].arrmse});
          curve << rs[i] << ',' << format_real(reports[i].arrmse) << '\n';
        }
        write_file(root, fs::path("curves") / (file_safe(entry.name) + "_k" + std::to_string(k) + ".csv"),
                   curve.str(), summary.files);
        cell.ok = true;
        cell.arrmse = reports.back().arrmse;
        cell.train_seconds = reports.front().train_seconds;
        cell.predict_seconds = reports.front().predict_seconds;
        if (log) *log << "[" << entry.name << "] " << cell.method << ": " << rs.size() << " points\n";
      } catch (const std::exception& e) {
        cell.error = e.what();
        if (log) *log << "[" << entry.name << "] " << cell.method << " failed: " << cell.error << '\n';
      }
      summary.cells.push_back(cell);
    }
  }

  if (!config.methods.empty()) {
    std::ostringstream table;
    write_result_table(table, summary.table);
    write_file(root, "results.csv", table.str(), summary.files);
  }
  if (!summary.curve.empty()) write_file(root, "curves.csv", emit_curve_data(summary.curve), summary.files);

  std::ostringstream timings;
  timings << "dataset,method,status,train_seconds,predict_seconds\n";
  for (const auto& c : summary.cells)
    timings << c.dataset << ',' << c.method << ',' << (c.ok ? "ok" : "failed") << ',' << format_real(c.train_seconds)
            << ',' << format_real(c.predict_seconds) << '\n';
  write_file(root, "timings.csv", timings.str(), summary.files);

  std::sort(summary.files.begin(), summary.files.end());
  ojson manifest;
  manifest["tool"] = "rlc";
  manifest["version"] = kToolVersion;
  manifest["config"] = config_echo(config);
  ojson cells = ojson::array();
  for (const auto& c : summary.cells) {
    ojson e;
    e["dataset"] = c.dataset;
    e["method"] = c.method;
    e["status"] = c.ok ? "ok" : "failed";
    if (c.ok) e["arrmse"] = c.arrmse;
    else e["error"] = c.error;
    e["train_seconds"] = c.train_seconds;
    e["predict_seconds"] = c.predict_seconds;
    cells.push_back(e);
  }
  manifest["cells"] = cells;
  ojson files = ojson::array();
  for (const auto& f : summary.files) files.push_back({{"path", f.generic_string()}, {"sha256", sha256_file(root / f)}});
  manifest["files"] = files;
  write_text_file(root / "manifest.json", manifest.dump(2) + "\n");
  return summary;
}

ComparisonReport compare_methods(const ResultTable& table, double alpha) {
  if (table.methods.size() < 2) throw ParameterError("comparison needs at least two methods");
  if (!(std::abs(alpha - 0.05) < 1e-12 || std::abs(alpha - 0.1) < 1e-12))
    throw ParameterError("alpha must be 0.05 or 0.1");
  table.require_complete();
  ComparisonReport r;
  r.table = table;
  r.alpha = alpha;
  r.wins_losses = wins_losses(table);
  r.friedman = friedman(table);
  if (table.methods.size() <= 10) r.critical_difference = nemenyi_cd(table.methods.size(), table.datasets.size(), alpha);
  for (std::size_t a = 0; a < table.methods.size(); ++a)
    for (std::size_t b = a + 1; b < table.methods.size(); ++b) {
      PairwiseWilcoxon w{table.methods[a], table.methods[b], std::nullopt};
      try {
        w.result = wilcoxon_signed_rank(table.scores.row(a), table.scores.row(b));
      } catch (const ParameterError&) {
      }
      r.wilcoxon.push_back(std::move(w));
    }
  return r;
}

ComparisonReport compare_methods(const fs::path& table_csv, double alpha) {
  std::ifstream in(table_csv);
  if (!in) throw ConfigError("cannot open result table " + table_csv.string());
  return compare_methods(read_result_table(in), alpha);
}

std::string ComparisonReport::to_json() const {
  ojson j;
  j["methods"] = table.methods;
  j["datasets"] = table.datasets;
  j["alpha"] = alpha;
  ojson wl = ojson::object();
  for (std::size_t a = 0; a < table.methods.size(); ++a) {
    ojson row = ojson::object();
    for (std::size_t b = 0; b < table.methods.size(); ++b)
      if (a != b) row[table.methods[b]] = {{"wins", wins_losses[a][b].wins}, {"losses", wins_losses[a][b].losses}};
    wl[table.methods[a]] = row;
  }
  j["wins_losses"] = wl;
  ojson fr;
  ojson ranks = ojson::object();
  for (std::size_t m = 0; m < table.methods.size(); ++m) ranks[table.methods[m]] = friedman.mean_ranks[m];
  fr["mean_ranks"] = ranks;
  fr["chi_square"] = friedman.chi_square;
  fr["chi_square_p"] = friedman.chi_square_p;
  fr["iman_davenport_f"] = friedman.degenerate ? ojson(nullptr) : ojson(friedman.iman_davenport_f);
  fr["p_value"] = friedman.p_value;
  fr["degenerate"] = friedman.degenerate;
  j["friedman"] = fr;
  j["nemenyi_cd"] = critical_difference ? ojson(*critical_difference) : ojson(nullptr);
  ojson wx = ojson::array();
  for (const auto& w : wilcoxon) {
    ojson e;
    e["a"] = w.a;
    e["b"] = w.b;
    if (w.result) {
      e["t_minus"] = w.result->t_minus;
      e["t_plus"] = w.result->t_plus;
      e["n"] = w.result->n_used;
      e["exact"] = w.result->exact;
      e["p_two_sided"] = w.result->p_two_sided;
    } else {
      e["p_two_sided"] = nullptr;
      e["note"] = "all differences are zero";
    }
    wx.push_back(e);
  }
  j["wilcoxon"] = wx;
  return j.dump(2) + "\n";
}

std::string ComparisonReport::to_text() const {
  std::ostringstream out;
  out << "Methods: " << table.methods.size() << ", datasets: " << table.datasets.size() << ", alpha = " << alpha << "\n\n";
  out << "Wins:losses (row vs column)\n";
  for (std::size_t a = 0; a < table.methods.size(); ++a) {
    out << "  " << table.methods[a] << ":";
    for (std::size_t b = 0; b < table.methods.size(); ++b)
      if (a != b)
        out << "  vs " << table.methods[b] << " " << wins_losses[a][b].wins << ':' << wins_losses[a][b].losses;
    out << '\n';
  }
  out << "\nFriedman test\n  mean ranks:";
  for (std::size_t m = 0; m < table.methods.size(); ++m)
    out << ' ' << table.methods[m] << '=' << format_real(friedman.mean_ranks[m]);
  out << "\n  chi-square = " << format_real(friedman.chi_square) << " (p = " << format_real(friedman.chi_square_p)
      << ")\n";
  if (friedman.degenerate)
    out << "  Iman-Davenport F undefined (perfect agreement); p reported as 0\n";
  else
    out << "  Iman-Davenport F = " << format_real(friedman.iman_davenport_f) << " (p = " << format_real(friedman.p_value)
        << ")\n";
  if (critical_difference) out << "\nNemenyi critical difference = " << format_real(*critical_difference) << '\n';
  out << "\nWilcoxon signed-rank (two-sided)\n";
  for (const auto& w : wilcoxon) {
    out << "  " << w.a << " vs " << w.b << ": ";
    if (w.result)
      out << "T- = " << format_real(w.result->t_minus) << ", T+ = " << format_real(w.result->t_plus)
          << ", p = " << format_real(w.result->p_two_sided) << (w.result->exact ? " (exact)" : " (normal approx.)")
          << '\n';
    else
      out << "all differences zero\n";
  }
  return out.str();
}

CorrelationFiles run_correlations(const Dataset& data, const std::string& name, const fs::path& output_dir) {
  CorrelationFiles out;
  const Matrix corr = pairwise_target_correlations(data.Y, &out.warnings);
  out.summary = correlation_summary(corr);
  const auto base = file_safe(name);

  std::ostringstream matrix, summary, box;
  write_correlation_csv(matrix, corr, data.target_names);
  write_correlation_summary_json(summary, out.summary, name);
  write_correlation_boxplot_row(box, name, corr);
  write_file(output_dir, base + "_correlations.csv", matrix.str(), out.files);
  write_file(output_dir, base + "_correlation_summary.json", summary.str(), out.files);
  write_file(output_dir, base + "_boxplot.csv", box.str(), out.files);
  return out;
}

}  // namespace rlc
