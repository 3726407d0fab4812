#include "rlc/bundle.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "rlc/error.hpp"
#include "rlc/io.hpp"

namespace rlc {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json gbm_json(const GbmConfig& c) {
  return {{"iterations", c.iterations},
          {"learning_rate", c.learning_rate},
          {"max_leaves", c.max_leaves},
          {"min_leaf", c.min_leaf},
          {"seed", c.seed}};
}

GbmConfig gbm_from_json(const json& j) {
  GbmConfig c;
  c.iterations = j.at("iterations").get<std::size_t>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.max_leaves = j.at("max_leaves").get<std::size_t>();
  c.min_leaf = j.at("min_leaf").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

std::string model_file(std::size_t i) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "models/model_%04zu.gbm", i);
  return buf;
}

void save_models(const fs::path& dir, const std::vector<std::shared_ptr<const Regressor>>& models) {
  for (std::size_t i = 0; i < models.size(); ++i) {
    const auto* gbm = dynamic_cast<const GbmRegressor*>(models[i].get());
    if (!gbm) throw ConfigError("bundle: model " + std::to_string(i) + " is not a gradient boosting model");
    std::ostringstream out;
    write_gbm(out, gbm->model());
    write_text_file(dir / model_file(i), out.str());
  }
}

std::vector<std::shared_ptr<const Regressor>> load_models(const fs::path& dir, std::size_t count) {
  std::vector<std::shared_ptr<const Regressor>> models;
  models.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::ifstream in(dir / model_file(i));
    if (!in) throw ConfigError("bundle: missing " + model_file(i));
    models.push_back(std::make_shared<GbmRegressor>(read_gbm(in)));
  }
  return models;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

json read_manifest(const fs::path& dir) {
  json j;
  try {
    j = json::parse(read_text_file(dir / "manifest.json"));
  } catch (const json::exception& e) {
    throw ParseError(std::string("bundle manifest: ") + e.what(), 0);
  }
  if (j.value("format", "") != "rlc-bundle") throw ParseError("not an rlc bundle manifest", 0);
  if (j.value("version", 0) != kBundleVersion)
    throw ParseError("unsupported bundle version " + std::to_string(j.value("version", 0)), 0);
  return j;
}

}  // namespace

void save_bundle(const fs::path& dir, const RlcModel& model) {
  fs::create_directories(dir);
  const auto& C = model.coefficients();
  json seeds = json::array();
  for (std::size_t i = 0; i < C.combinations(); ++i) seeds.push_back(model_seed(model.params().seed, i));
  json manifest = {{"format", "rlc-bundle"},
                   {"version", kBundleVersion},
                   {"kind", "rlc"},
                   {"inputs", model.input_names().size()},
                   {"targets", C.targets()},
                   {"r", C.combinations()},
                   {"k", C.k()},
                   {"seed", model.params().seed},
                   {"gbm", gbm_json(model.params().gbm)},
                   {"model_seeds", seeds},
                   {"input_names", model.input_names()},
                   {"target_names", model.target_names()}};
  write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");

  std::ostringstream coef;
  write_coefficients_csv(coef, C.matrix());
  write_text_file(dir / "coefficients.csv", coef.str());

  std::ostringstream norm;
  norm << "target,min,max\n";
  const auto& n = model.normalizer();
  for (std::size_t j = 0; j < n.size(); ++j) {
    const std::string name = j < model.target_names().size() ? model.target_names()[j] : "y" + std::to_string(j);
    norm << csv_field(name) << ',' << format_exact(n.mins()[j]) << ',' << format_exact(n.maxs()[j]) << '\n';
  }
  write_text_file(dir / "normalizer.csv", norm.str());
  save_models(dir, model.models());
}

void save_bundle(const fs::path& dir, const StModel& model) {
  fs::create_directories(dir);
  json seeds = json::array();
  for (std::size_t j = 0; j < model.num_targets(); ++j) seeds.push_back(model_seed(model.gbm().seed, j));
  json manifest = {{"format", "rlc-bundle"},
                   {"version", kBundleVersion},
                   {"kind", "st"},
                   {"inputs", model.input_names().size()},
                   {"targets", model.num_targets()},
                   {"seed", model.gbm().seed},
                   {"gbm", gbm_json(model.gbm())},
                   {"model_seeds", seeds},
                   {"input_names", model.input_names()},
                   {"target_names", model.target_names()}};
  write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
  save_models(dir, model.models());
}

BundleInfo inspect_bundle(const fs::path& dir) {
  const json j = read_manifest(dir);
  BundleInfo info;
  try {
    info.kind = j.at("kind").get<std::string>();
    info.version = j.at("version").get<int>();
    info.inputs = j.at("inputs").get<std::size_t>();
    info.targets = j.at("targets").get<std::size_t>();
    info.seed = j.at("seed").get<std::uint64_t>();
    info.gbm = gbm_from_json(j.at("gbm"));
    info.model_seeds = j.at("model_seeds").get<std::vector<std::uint64_t>>();
    info.input_names = j.at("input_names").get<std::vector<std::string>>();
    info.target_names = j.at("target_names").get<std::vector<std::string>>();
    if (info.kind == "rlc") {
      info.combinations = j.at("r").get<std::size_t>();
      info.k = j.at("k").get<std::size_t>();
    } else if (info.kind != "st") {
      throw ParseError("unknown bundle kind '" + info.kind + "'", 0);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("bundle manifest: ") + e.what(), 0);
  }
  return info;
}

std::variant<RlcModel, StModel> load_bundle(const fs::path& dir) {
  const BundleInfo info = inspect_bundle(dir);
  if (info.kind == "st") {
    return StModel(info.gbm, load_models(dir, info.targets), info.input_names, info.target_names);
  }

  std::ifstream coef_in(dir / "coefficients.csv");
  if (!coef_in) throw ConfigError("bundle: missing coefficients.csv");
  Matrix C = read_coefficients_csv(coef_in);
  if (C.rows() != info.targets || C.cols() != info.combinations)
    throw ParseError("bundle: coefficient matrix shape disagrees with manifest", 0);

  std::istringstream norm_in(read_text_file(dir / "normalizer.csv"));
  std::string line;
  std::getline(norm_in, line);  // header
  std::vector<double> mins, maxs;
  std::size_t line_no = 1;
  while (std::getline(norm_in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto last = line.rfind(',');
    const auto mid = last == std::string::npos ? std::string::npos : line.rfind(',', last - 1);
    if (mid == std::string::npos) throw ParseError("bundle normalizer: malformed row", line_no);
    mins.push_back(std::strtod(line.substr(mid + 1, last - mid - 1).c_str(), nullptr));
    maxs.push_back(std::strtod(line.substr(last + 1).c_str(), nullptr));
  }
  if (mins.size() != info.targets) throw ParseError("bundle: normalizer size disagrees with manifest", 0);

  RlcParams params;
  params.r = info.combinations;
  params.k = info.k;
  params.seed = info.seed;
  params.gbm = info.gbm;
  return RlcModel(params, Normalizer(std::move(mins), std::move(maxs)),
                  CoefficientMatrix(std::move(C), info.k, info.seed), load_models(dir, info.combinations),
                  info.input_names, info.target_names);
}

std::string BundleInfo::describe() const {
  std::ostringstream out;
  out << "kind:          " << kind << "\n"
      << "version:       " << version << "\n"
      << "inputs (p):    " << inputs << "\n"
      << "targets (q):   " << targets << "\n";
  if (kind == "rlc") out << "combinations:  " << combinations << "\n" << "k:             " << k << "\n";
  out << "seed:          " << seed << "\n"
      << "gbm:           iterations=" << gbm.iterations << " learning_rate=" << gbm.learning_rate
      << " max_leaves=" << gbm.max_leaves << " min_leaf=" << gbm.min_leaf << "\n"
      << "models:        " << model_seeds.size() << "\n"
      << "target names: ";
  for (const auto& n : target_names) out << ' ' << n;
  out << "\n";
  return out.str();
}

}  // namespace rlc
