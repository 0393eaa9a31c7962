// mbss: command-line front end for model-based semi-supervised
// classification of API-call feature vectors.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include "mbss/cem.hpp"
#include "mbss/dataset.hpp"
#include "mbss/error.hpp"
#include "mbss/eval.hpp"
#include "mbss/gmm.hpp"
#include "mbss/model_select.hpp"
#include "mbss/synth.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace mbss;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPartial = 2;
constexpr int kExitUsage = 64;
constexpr int kExitData = 65;
constexpr int kExitInternal = 70;

std::string sha256_hex(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::string hex;
  char byte[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(byte, sizeof byte, "%02x", digest[i]);
    hex += byte;
  }
  return hex;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Inputs, parameters and output hashes of one run. No timestamps or host
/// details, so reruns produce identical manifests.
class Manifest {
 public:
  explicit Manifest(std::string command) {
    doc_["tool"] = "mbss";
    doc_["version"] = MBSS_VERSION;
    doc_["command"] = std::move(command);
    doc_["parameters"] = json::object();
    doc_["inputs"] = json::array();
    doc_["outputs"] = json::array();
    doc_["errors"] = json::array();
  }

  json& parameters() { return doc_["parameters"]; }
  void seed(std::uint64_t s) { doc_["seed"] = s; }
  void input(const fs::path& p) {
    doc_["inputs"].push_back({{"path", p.generic_string()}, {"sha256", sha256_hex(p)}});
  }
  void output(const fs::path& p) {
    doc_["outputs"].push_back({{"path", p.generic_string()}, {"sha256", sha256_hex(p)}});
  }
  void error(const std::string& where, const std::string& what) {
    doc_["errors"].push_back({{"file", where}, {"error", what}});
  }

  void write(const fs::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << doc_.dump(2) << '\n';
  }

 private:
  json doc_;
};

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

void require_file(const fs::path& path, const std::string& what) {
  if (!fs::is_regular_file(path)) {
    throw InvalidArgument(what + " not found: " + path.string());
  }
}

fs::path manifest_for(const fs::path& output) {
  return fs::path(output.string() + ".manifest.json");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

StoppingRule parse_stopping(const std::string& text) {
  if (text == "aitken") return StoppingRule::aitken;
  if (text == "delta") return StoppingRule::delta_loglik;
  throw InvalidArgument("unknown stopping rule '" + text + "' (expected aitken or delta)");
}

// ---------------------------------------------------------------- extract

struct ExtractOptions {
  std::string logs;
  std::string vocab = MBSS_DEFAULT_VOCAB;
  std::string labels;
  std::string out;
  std::string manifest;
};

/// labels file: "file,label" per line, label one-based or empty.
std::map<std::string, std::optional<int>> read_label_map(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  std::map<std::string, std::optional<int>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected file,label");
    }
    const std::string file = line.substr(0, comma);
    const std::string cell = line.substr(comma + 1);
    if (line_no == 1 && cell == "label") continue;  // header
    std::optional<int> label;
    if (!cell.empty()) {
      try {
        std::size_t used = 0;
        const int v = std::stoi(cell, &used);
        if (used != cell.size() || v < 1) throw std::invalid_argument(cell);
        label = v - 1;
      } catch (const std::exception&) {
        throw DataError(path.string() + ":" + std::to_string(line_no) + ": bad label '" + cell + "'");
      }
    }
    out[file] = label;
  }
  return out;
}

int run_extract(const ExtractOptions& o) {
  const fs::path logs_dir(o.logs);
  if (!fs::is_directory(logs_dir)) throw InvalidArgument("log directory not found: " + o.logs);
  require_file(o.vocab, "vocabulary");
  if (!o.labels.empty()) require_file(o.labels, "labels file");

  Manifest manifest("extract");
  manifest.parameters()["logs"] = o.logs;
  manifest.parameters()["vocab"] = o.vocab;
  manifest.parameters()["labels"] = o.labels;

  const ApiVocabulary vocab = load_vocabulary(o.vocab);
  manifest.input(o.vocab);
  std::map<std::string, std::optional<int>> label_map;
  if (!o.labels.empty()) {
    label_map = read_label_map(o.labels);
    manifest.input(o.labels);
  }

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(logs_dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  FeatureTable table;
  table.vocabulary = vocab;
  std::vector<FeatureVector> rows;
  bool partial = false;
  for (const auto& file : files) {
    manifest.input(file);
    std::ifstream in(file, std::ios::binary);
    try {
      if (!in) throw DataError("cannot read file");
      LogParseResult r = parse_log(in, vocab);
      rows.push_back(std::move(r.features));
      const auto it = label_map.find(file.filename().string());
      table.labels.push_back(it == label_map.end() ? std::nullopt : it->second);
      if (r.malformed_lines > 0) {
        std::cerr << "warning: " << file.filename().string() << ": " << r.malformed_lines
                  << " malformed line(s) skipped\n";
      }
    } catch (const DataError& e) {
      partial = true;
      std::cerr << "error: " << file.filename().string() << ": " << e.what() << '\n';
      manifest.error(file.filename().string(), e.what());
    }
  }
  if (rows.empty()) throw DataError("no log in " + o.logs + " could be parsed");

  table.features.resize(static_cast<Eigen::Index>(rows.size()),
                        static_cast<Eigen::Index>(vocab.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < vocab.size(); ++c) {
      table.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r].bits[c];
    }
  }
  {
    auto out = open_output(o.out);
    write_feature_table(table, out);
  }
  manifest.output(o.out);
  manifest.write(o.manifest.empty() ? manifest_for(o.out) : fs::path(o.manifest));
  return partial ? kExitPartial : kExitOk;
}

// -------------------------------------------------------------------- fit

struct FitOptions {
  std::string data;
  std::string families = "EII,VII,EEI,VVI,EEE,VVV";
  double tolerance = 1e-5;
  int max_iterations = 1000;
  double epsilon = kDefaultEpsilon;
  std::string stopping = "aitken";
  std::uint64_t seed = 0;
  int classes = 0;
  bool real_valued = false;
  std::string model_out;
  std::string report_out;
  std::string trace_out;
  std::string manifest;
};

CemConfig cem_config(double tolerance, int max_iterations, double epsilon,
                     const std::string& stopping, std::uint64_t seed) {
  CemConfig config;
  config.tolerance = tolerance;
  config.max_iterations = max_iterations;
  config.epsilon = epsilon;
  config.stopping = parse_stopping(stopping);
  config.seed = seed;
  config.validate();
  return config;
}

int run_fit(const FitOptions& o) {
  const auto families = parse_family_list(o.families);
  const CemConfig config = cem_config(o.tolerance, o.max_iterations, o.epsilon, o.stopping, o.seed);
  require_file(o.data, "dataset");

  Manifest manifest("fit");
  manifest.seed(o.seed);
  auto& p = manifest.parameters();
  p["data"] = o.data;
  p["families"] = o.families;
  p["tolerance"] = o.tolerance;
  p["max_iterations"] = o.max_iterations;
  p["epsilon"] = o.epsilon;
  p["stopping"] = o.stopping;
  p["classes"] = o.classes;
  p["real_valued"] = o.real_valued;
  manifest.input(o.data);

  CsvOptions csv{.allow_real = o.real_valued, .num_classes = std::nullopt};
  if (o.classes > 0) csv.num_classes = o.classes;
  const Dataset dataset = load_dataset_csv(o.data, csv);

  const Selection selection = select_model(dataset, families, config);
  const ModelScore& best = selection.best();
  save_model(best.fit->model, fs::path(o.model_out));
  manifest.output(o.model_out);

  const fs::path report = o.report_out.empty() ? fs::path(o.model_out + ".selection.csv")
                                               : fs::path(o.report_out);
  {
    auto out = open_output(report);
    write_selection_csv(selection, out);
  }
  manifest.output(report);
  if (!o.trace_out.empty()) {
    auto out = open_output(o.trace_out);
    write_trace_csv(*best.fit, out);
    out.close();
    manifest.output(o.trace_out);
  }
  for (const auto& s : selection.all) {
    if (s.failed) std::cerr << "warning: " << to_string(s.family) << " failed: " << s.failure << '\n';
  }
  std::cerr << "selected " << to_string(best.family) << " (BIC " << num(best.bic) << ", "
            << best.fit->iterations << " iterations"
            << (best.fit->converged ? "" : ", not converged") << ")\n";
  manifest.write(o.manifest.empty() ? manifest_for(o.model_out) : fs::path(o.manifest));
  return kExitOk;
}

// --------------------------------------------------------------- classify

struct ClassifyOptions {
  std::string model;
  std::string data;
  std::string out;
  int positive_class = 2;
  bool all_rows = false;
  bool real_valued = false;
  std::string manifest;
};

int run_classify(const ClassifyOptions& o) {
  require_file(o.model, "model");
  require_file(o.data, "dataset");
  Manifest manifest("classify");
  auto& p = manifest.parameters();
  p["model"] = o.model;
  p["data"] = o.data;
  p["positive_class"] = o.positive_class;
  p["all_rows"] = o.all_rows;
  p["real_valued"] = o.real_valued;

  const MixtureModel model = load_model(fs::path(o.model));
  manifest.input(o.model);
  const FeatureTable table = load_feature_table(o.data, o.real_valued);
  manifest.input(o.data);
  if (static_cast<std::size_t>(table.features.cols()) != model.dim()) {
    throw DimensionError(model.dim(), static_cast<std::size_t>(table.features.cols()));
  }
  const int positive = o.positive_class - 1;
  if (positive < 0 || positive >= model.num_components()) {
    throw InvalidArgument("--positive-class must be in 1.." + std::to_string(model.num_components()));
  }

  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < table.labels.size(); ++r) {
    if (o.all_rows || !table.labels[r]) rows.push_back(r);
  }
  Matrix X(static_cast<Eigen::Index>(rows.size()), table.features.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    X.row(static_cast<Eigen::Index>(i)) = table.features.row(static_cast<Eigen::Index>(rows[i]));
  }
  const Prediction pred = predict(model, X);
  {
    auto out = open_output(o.out);
    out << "sample_id,predicted_label,score\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out << rows[i] << ',' << pred.labels[i] + 1 << ','
          << num(pred.posteriors(static_cast<Eigen::Index>(i), positive)) << '\n';
    }
  }
  manifest.output(o.out);
  manifest.write(o.manifest.empty() ? manifest_for(o.out) : fs::path(o.manifest));
  return kExitOk;
}

// --------------------------------------------------------------- evaluate

struct EvaluateOptions {
  std::string data;
  std::string protocol = "cv10";
  int folds = 10;
  std::string classifiers = "mbss,lda,3nn";
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string oos_data;
  std::vector<double> fractions = kDefaultFractions;
  std::vector<int> replicates = kDefaultReplicates;
  std::vector<std::string> external;
  bool pca = false;
  int pca_components = 2;
  int positive_class = 2;
  std::string families = "EII,VII,EEI,VVI,EEE,VVV";
  double tolerance = 1e-5;
  int max_iterations = 1000;
  double epsilon = kDefaultEpsilon;
  std::string stopping = "aitken";
  bool real_valued = false;
};

/// "name=path" or plain "path" (name taken from the file stem).
std::pair<std::string, fs::path> external_source(const std::string& text) {
  const auto eq = text.find('=');
  if (eq != std::string::npos) return {text.substr(0, eq), fs::path(text.substr(eq + 1))};
  return {fs::path(text).stem().string(), fs::path(text)};
}

int run_evaluate(const EvaluateOptions& o) {
  if (!o.seed) throw InvalidArgument("evaluate requires --seed");
  if (o.protocol != "cv10" && o.protocol != "cv" && o.protocol != "oos") {
    throw InvalidArgument("--protocol must be cv10, cv or oos");
  }
  const bool oos = o.protocol == "oos";
  const int folds = o.protocol == "cv10" ? 10 : o.folds;
  if (!oos && folds < 2) throw InvalidArgument("--folds must be at least 2");
  if (oos && o.oos_data.empty()) throw InvalidArgument("--protocol oos requires --oos-data");
  if (o.fractions.size() != o.replicates.size()) {
    throw InvalidArgument("--fractions and --replicates must have the same length");
  }
  if (o.pca_components < 1) throw InvalidArgument("--pca-components must be positive");

  ClassifierSpec base;
  base.families = parse_family_list(o.families);
  base.cem = cem_config(o.tolerance, o.max_iterations, o.epsilon, o.stopping, *o.seed);
  std::vector<ClassifierSpec> specs;
  for (const auto& name : split_list(o.classifiers)) specs.push_back(parse_classifier(name, base));
  if (specs.empty()) throw InvalidArgument("--classifiers is empty");

  require_file(o.data, "dataset");
  if (oos) require_file(o.oos_data, "out-of-sample dataset");
  std::vector<std::pair<std::string, fs::path>> externals;
  for (const auto& e : o.external) {
    externals.push_back(external_source(e));
    require_file(externals.back().second, "external predictions");
  }

  const fs::path dir(o.out_dir);
  fs::create_directories(dir);
  Manifest manifest("evaluate");
  manifest.seed(*o.seed);
  auto& p = manifest.parameters();
  p["data"] = o.data;
  p["protocol"] = o.protocol;
  p["folds"] = folds;
  p["classifiers"] = o.classifiers;
  p["oos_data"] = o.oos_data;
  p["fractions"] = o.fractions;
  p["replicates"] = o.replicates;
  p["external_predictions"] = o.external;
  p["pca"] = o.pca;
  p["pca_components"] = o.pca_components;
  p["positive_class"] = o.positive_class;
  p["families"] = o.families;
  p["tolerance"] = o.tolerance;
  p["max_iterations"] = o.max_iterations;
  p["epsilon"] = o.epsilon;
  p["stopping"] = o.stopping;
  p["real_valued"] = o.real_valued;

  const Dataset dataset = load_dataset_csv(o.data, {.allow_real = o.real_valued, .num_classes = std::nullopt});
  manifest.input(o.data);
  const int positive = o.positive_class - 1;
  if (positive < 0 || positive >= dataset.num_classes()) {
    throw InvalidArgument("--positive-class must be in 1.." + std::to_string(dataset.num_classes()));
  }
  std::optional<FeatureTable> oos_table;
  if (oos) {
    oos_table = load_feature_table(o.oos_data, o.real_valued);
    manifest.input(o.oos_data);
    if (oos_table->features.cols() != static_cast<Eigen::Index>(dataset.dim())) {
      throw DimensionError(dataset.dim(), static_cast<std::size_t>(oos_table->features.cols()));
    }
  }

  std::vector<ComparisonRow> rows;
  std::ostringstream report;
  report << "protocol: " << o.protocol << "\n";
  report << "labeled rows: " << dataset.n() << ", unlabeled rows: " << dataset.m()
         << ", features: " << dataset.dim() << "\n";
  std::vector<std::string> warnings;

  if (!oos) {
    std::vector<CvReport> reports;
    for (const auto& spec : specs) {
      reports.push_back(cross_validate(dataset, spec, folds, *o.seed, positive));
      rows.push_back(comparison_row(reports.back()));
    }
    report << "folds: " << folds << "\n";
    {
      auto out = open_output(dir / "cv_folds.csv");
      write_cv_folds_csv(reports, out);
    }
    {
      auto out = open_output(dir / "roc.csv");
      write_roc_csv(reports, out);
    }
    manifest.output(dir / "cv_folds.csv");
    manifest.output(dir / "roc.csv");
    for (const auto& [name, path] : externals) {
      std::ifstream in(path);
      rows.push_back(score_external_in_sample(read_external_predictions(in, name), dataset, positive));
      manifest.input(path);
    }
  } else {
    std::vector<std::pair<std::string, DetectionSweep>> sweeps;
    for (const auto& spec : specs) {
      const Predictor predictor = [&](const Matrix& X) {
        return train_and_predict(spec, dataset.labeled(), dataset.labels(), dataset.num_classes(),
                                 X, dataset.unlabeled(), positive)
            .labels;
      };
      DetectionSweep sweep = detection_rate(predictor, oos_table->features, o.fractions,
                                            o.replicates, *o.seed, positive);
      ComparisonRow row;
      row.classifier = spec.name();
      for (const auto& r : sweep.rows) {
        if (!r.skipped) row.detection_rate = r.rate.mean;  // largest fraction wins
      }
      rows.push_back(row);
      for (const auto& w : sweep.warnings) warnings.push_back(spec.name() + ": " + w);
      sweeps.emplace_back(spec.name(), std::move(sweep));
    }
    report << "out-of-sample rows: " << oos_table->features.rows() << "\n";
    {
      auto out = open_output(dir / "dr.csv");
      write_detection_csv(sweeps, out);
    }
    manifest.output(dir / "dr.csv");
    for (const auto& [name, path] : externals) {
      std::ifstream in(path);
      rows.push_back(score_external_detection(read_external_predictions(in, name),
                                              static_cast<std::size_t>(oos_table->features.rows()),
                                              positive));
      manifest.input(path);
    }
  }

  if (o.pca) {
    const Matrix empty(0, static_cast<Eigen::Index>(dataset.dim()));
    const ScatterTable scatter =
        pca_project(dataset.labeled(), dataset.labels(), oos ? oos_table->features : empty,
                    o.pca_components, positive);
    auto out = open_output(dir / "pca.csv");
    write_scatter_csv(scatter, out);
    out.close();
    manifest.output(dir / "pca.csv");
  }

  {
    auto out = open_output(dir / "comparison.csv");
    write_comparison_csv(rows, out);
  }
  manifest.output(dir / "comparison.csv");
  report << "\n";
  write_comparison_table(rows, report);
  for (const auto& w : warnings) report << "warning: " << w << "\n";
  {
    auto out = open_output(dir / "report.txt");
    out << report.str();
  }
  manifest.output(dir / "report.txt");
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
  std::cout << report.str();
  manifest.write(dir / "manifest.json");
  return kExitOk;
}

// ------------------------------------------------------------------ synth

struct SynthOptions {
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string truth_out;
  std::size_t dim = 5;
  std::size_t size = 1000;
  double separation = 6.0;
  double rho = 0.0;
  double label_fraction = 0.5;
  double weight2 = 0.5;
  std::optional<double> threshold;
  std::string oos_out;
  std::size_t oos_size = 200;
  double oos_shift = 0.0;
  std::string manifest;
};

int run_synth(const SynthOptions& o) {
  if (!o.seed) throw InvalidArgument("synth requires --seed");
  if (!(o.weight2 > 0.0 && o.weight2 < 1.0)) throw InvalidArgument("--weight2 must be in (0, 1)");
  SynthSpec spec = two_class_spec(o.dim, o.separation, o.size, o.label_fraction, *o.seed, o.rho,
                                  o.weight2);
  Manifest manifest("synth");
  manifest.seed(*o.seed);
  auto& p = manifest.parameters();
  p["dim"] = o.dim;
  p["size"] = o.size;
  p["separation"] = o.separation;
  p["rho"] = o.rho;
  p["label_fraction"] = o.label_fraction;
  p["weight2"] = o.weight2;
  p["threshold"] = o.threshold ? json(*o.threshold) : json(nullptr);
  p["oos_size"] = o.oos_size;
  p["oos_shift"] = o.oos_shift;

  const SynthSample sample = sample_mixture(spec);
  FeatureTable table = to_feature_table(sample.dataset);
  if (o.threshold) table.features = binarize(table.features, *o.threshold);
  {
    auto out = open_output(o.out);
    write_feature_table(table, out);
  }
  manifest.output(o.out);
  if (!o.truth_out.empty()) {
    auto out = open_output(o.truth_out);
    out << "sample_id,label\n";
    for (std::size_t i = 0; i < sample.truth.size(); ++i) out << i << ',' << sample.truth[i] + 1 << '\n';
    out.close();
    manifest.output(o.truth_out);
  }
  if (!o.oos_out.empty()) {
    // Class 2 only, its mean moved along the first coordinate axis.
    SynthSpec oos = spec;
    oos.weights = {0.0, 1.0};
    oos.means[1](0) += o.oos_shift;
    oos.size = o.oos_size;
    oos.seed = *o.seed + 1;
    const MixtureDraws draws = draw_mixture(oos);
    FeatureTable oos_table;
    oos_table.vocabulary = table.vocabulary;
    oos_table.features = o.threshold ? binarize(draws.features, *o.threshold) : draws.features;
    oos_table.labels.assign(o.oos_size, std::nullopt);
    auto out = open_output(o.oos_out);
    write_feature_table(oos_table, out);
    out.close();
    manifest.output(o.oos_out);
  }
  manifest.write(o.manifest.empty() ? manifest_for(o.out) : fs::path(o.manifest));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Model-based semi-supervised classification of API-call feature vectors"};
  app.set_version_flag("--version", std::string(MBSS_VERSION));
  app.set_config("--config", "", "TOML/INI file with option defaults; flags take precedence");
  app.require_subcommand(1);

  ExtractOptions ex;
  auto* extract = app.add_subcommand("extract", "Convert a directory of trace logs into a feature CSV");
  extract->add_option("--logs", ex.logs, "Directory of trace logs, one file per sample")->required();
  extract->add_option("--vocab", ex.vocab, "API vocabulary, one identity per line")->capture_default_str();
  extract->add_option("--labels", ex.labels, "CSV of file,label (one-based label; empty = unlabeled)");
  extract->add_option("--out", ex.out, "Output feature CSV")->required();
  extract->add_option("--manifest", ex.manifest, "Run manifest path (default <out>.manifest.json)");

  FitOptions fo;
  auto* fit_cmd = app.add_subcommand("fit", "Fit semi-supervised mixtures and keep the best BIC model");
  fit_cmd->add_option("--data", fo.data, "Dataset CSV (empty label cell = unlabeled)")->required();
  fit_cmd->add_option("--families", fo.families, "Comma-separated covariance families")->capture_default_str();
  fit_cmd->add_option("--tol", fo.tolerance, "Convergence tolerance (> 0)")->capture_default_str();
  fit_cmd->add_option("--max-iter", fo.max_iterations, "Maximum CEM iterations")->capture_default_str();
  fit_cmd->add_option("--epsilon", fo.epsilon, "Initial covariance ridge factor")->capture_default_str();
  fit_cmd->add_option("--stopping", fo.stopping, "Stopping rule: aitken or delta")->capture_default_str();
  fit_cmd->add_option("--seed", fo.seed, "Seed recorded in the manifest")->capture_default_str();
  fit_cmd->add_option("--classes", fo.classes, "Number of classes (default: largest label)");
  fit_cmd->add_flag("--real-valued", fo.real_valued, "Accept real-valued feature cells");
  fit_cmd->add_option("--model-out", fo.model_out, "Output model JSON")->required();
  fit_cmd->add_option("--report-out", fo.report_out, "Selection CSV (default <model-out>.selection.csv)");
  fit_cmd->add_option("--trace-out", fo.trace_out, "Per-iteration trace CSV of the selected fit");
  fit_cmd->add_option("--manifest", fo.manifest, "Run manifest path (default <model-out>.manifest.json)");

  ClassifyOptions co;
  auto* classify = app.add_subcommand("classify", "Assign rows to the maximum-posterior class");
  classify->add_option("--model", co.model, "Model JSON written by fit")->required();
  classify->add_option("--data", co.data, "Dataset CSV")->required();
  classify->add_option("--out", co.out, "Predictions CSV: sample_id,predicted_label,score")->required();
  classify->add_option("--positive-class", co.positive_class, "Class whose posterior is the score")->capture_default_str();
  classify->add_flag("--all-rows", co.all_rows, "Classify labeled rows too (default: unlabeled only)");
  classify->add_flag("--real-valued", co.real_valued, "Accept real-valued feature cells");
  classify->add_option("--manifest", co.manifest, "Run manifest path (default <out>.manifest.json)");

  EvaluateOptions eo;
  auto* evaluate = app.add_subcommand("evaluate", "Cross-validation or out-of-sample detection-rate evaluation");
  evaluate->add_option("--data", eo.data, "Training dataset CSV")->required();
  evaluate->add_option("--protocol", eo.protocol, "cv10, cv (with --folds) or oos")->capture_default_str();
  evaluate->add_option("--folds", eo.folds, "Folds for --protocol cv")->capture_default_str();
  evaluate->add_option("--classifiers", eo.classifiers, "Comma-separated: mbss, lda, knn, <k>nn")->capture_default_str();
  evaluate->add_option("--seed", eo.seed, "Seed for fold assignment and subsampling")->required();
  evaluate->add_option("--out-dir", eo.out_dir, "Directory for report files")->required();
  evaluate->add_option("--oos-data", eo.oos_data, "All-positive out-of-sample CSV (--protocol oos)");
  evaluate->add_option("--fractions", eo.fractions, "Subsample fractions for the detection-rate sweep")
      ->delimiter(',')->capture_default_str();
  evaluate->add_option("--replicates", eo.replicates, "Replicates per fraction")
      ->delimiter(',')->capture_default_str();
  evaluate->add_option("--external-predictions", eo.external, "[name=]path of external predictions CSV (repeatable)");
  evaluate->add_flag("--pca", eo.pca, "Write pca.csv scatter coordinates");
  evaluate->add_option("--pca-components", eo.pca_components, "Principal components to export")->capture_default_str();
  evaluate->add_option("--positive-class", eo.positive_class, "Malicious class label")->capture_default_str();
  evaluate->add_option("--families", eo.families, "MBSS candidate families")->capture_default_str();
  evaluate->add_option("--tol", eo.tolerance, "MBSS convergence tolerance")->capture_default_str();
  evaluate->add_option("--max-iter", eo.max_iterations, "MBSS maximum iterations")->capture_default_str();
  evaluate->add_option("--epsilon", eo.epsilon, "Initial covariance ridge factor")->capture_default_str();
  evaluate->add_option("--stopping", eo.stopping, "Stopping rule: aitken or delta")->capture_default_str();
  evaluate->add_flag("--real-valued", eo.real_valued, "Accept real-valued feature cells");

  SynthOptions so;
  auto* synth = app.add_subcommand("synth", "Write a seeded two-class Gaussian dataset");
  synth->add_option("--seed", so.seed, "Random seed")->required();
  synth->add_option("--out", so.out, "Output dataset CSV")->required();
  synth->add_option("--truth-out", so.truth_out, "CSV of sample_id,label for every row");
  synth->add_option("--dim", so.dim, "Feature dimension")->capture_default_str();
  synth->add_option("--size", so.size, "Total number of rows")->capture_default_str();
  synth->add_option("--separation", so.separation, "Distance between the class means")->capture_default_str();
  synth->add_option("--rho", so.rho, "Correlation between features")->capture_default_str();
  synth->add_option("--label-fraction", so.label_fraction, "Share of rows that keep their label")->capture_default_str();
  synth->add_option("--weight2", so.weight2, "Mixing weight of class 2")->capture_default_str();
  synth->add_option("--threshold", so.threshold, "Binarize features at this threshold");
  synth->add_option("--oos-out", so.oos_out, "Also write an unlabeled class-2-only CSV");
  synth->add_option("--oos-size", so.oos_size, "Rows in the out-of-sample CSV")->capture_default_str();
  synth->add_option("--oos-shift", so.oos_shift, "Shift of the out-of-sample mean along feature 1")->capture_default_str();
  synth->add_option("--manifest", so.manifest, "Run manifest path (default <out>.manifest.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*extract) return run_extract(ex);
    if (*fit_cmd) return run_fit(fo);
    if (*classify) return run_classify(co);
    if (*evaluate) return run_evaluate(eo);
    if (*synth) return run_synth(so);
  } catch (const InvalidArgument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitInternal;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}
