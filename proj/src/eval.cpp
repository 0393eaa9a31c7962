#include "mbss/eval.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include "mbss/baselines.hpp"
#include "mbss/error.hpp"
#include "mbss/model_select.hpp"
#include "mbss/rng.hpp"

namespace mbss {
namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : ""; }

Matrix select_rows(const Matrix& X, std::span<const std::size_t> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), X.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

void check_positive_class(int positive_class, int num_classes) {
  if (positive_class < 0 || positive_class >= num_classes) {
    throw InvalidArgument("positive class " + std::to_string(positive_class + 1) +
                          " outside 1.." + std::to_string(num_classes));
  }
}

}  // namespace

std::string ClassifierSpec::name() const {
  switch (kind) {
    case ClassifierKind::mbss: return "MBSS";
    case ClassifierKind::lda: return "LDA";
    case ClassifierKind::knn: return std::to_string(k) + "NN";
  }
  return "?";
}

ClassifierSpec parse_classifier(std::string_view text, const ClassifierSpec& base) {
  std::string lower;
  for (char c : text) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  ClassifierSpec spec = base;
  if (lower == "mbss") {
    spec.kind = ClassifierKind::mbss;
  } else if (lower == "lda") {
    spec.kind = ClassifierKind::lda;
  } else if (lower == "knn") {
    spec.kind = ClassifierKind::knn;
  } else if (lower.size() > 2 && lower.ends_with("nn")) {
    int k = 0;
    const auto [ptr, ec] = std::from_chars(lower.data(), lower.data() + lower.size() - 2, k);
    if (ec != std::errc() || ptr != lower.data() + lower.size() - 2 || k < 1) {
      throw InvalidArgument("unknown classifier '" + std::string(text) + "'");
    }
    spec.kind = ClassifierKind::knn;
    spec.k = k;
  } else {
    throw InvalidArgument("unknown classifier '" + std::string(text) +
                          "' (expected mbss, lda, knn or <k>nn)");
  }
  return spec;
}

Predictions train_and_predict(const ClassifierSpec& spec, const Matrix& train_features,
                              std::span<const int> train_labels, int num_classes,
                              const Matrix& test_features,
                              const Matrix& extra_unlabeled, int positive_class) {
  check_positive_class(positive_class, num_classes);
  const auto n_test = test_features.rows();
  Predictions out;
  out.labels.resize(static_cast<std::size_t>(n_test));
  out.scores.resize(static_cast<std::size_t>(n_test));

  switch (spec.kind) {
    case ClassifierKind::mbss: {
      Matrix unlabeled(n_test + extra_unlabeled.rows(), train_features.cols());
      if (n_test > 0) unlabeled.topRows(n_test) = test_features;
      if (extra_unlabeled.rows() > 0) unlabeled.bottomRows(extra_unlabeled.rows()) = extra_unlabeled;
      const Dataset data(train_features,
                         std::vector<int>(train_labels.begin(), train_labels.end()),
                         std::move(unlabeled), num_classes,
                         ApiVocabulary::numbered(static_cast<std::size_t>(train_features.cols())));
      const Selection selection = select_model(data, spec.families, spec.cem);
      const FitResult& fit = *selection.best().fit;
      for (Eigen::Index j = 0; j < n_test; ++j) {
        out.labels[static_cast<std::size_t>(j)] = fit.hard_labels[static_cast<std::size_t>(j)];
        out.scores[static_cast<std::size_t>(j)] = fit.posteriors(j, positive_class);
      }
      break;
    }
    case ClassifierKind::lda: {
      const LdaModel model = lda_fit(train_features, train_labels, num_classes, spec.cem.epsilon);
      for (Eigen::Index j = 0; j < n_test; ++j) {
        const Vector x = test_features.row(j).transpose();
        const auto p = lda_predict(model, x);
        out.labels[static_cast<std::size_t>(j)] = p.label;
        out.scores[static_cast<std::size_t>(j)] = lda_posteriors(model, x)(positive_class);
      }
      break;
    }
    case ClassifierKind::knn: {
      const KnnModel model(train_features,
                           std::vector<int>(train_labels.begin(), train_labels.end()),
                           num_classes, spec.k);
      for (Eigen::Index j = 0; j < n_test; ++j) {
        const Vector x = test_features.row(j).transpose();
        const auto votes = knn_votes(model, x);
        const auto top = std::max_element(votes.begin(), votes.end());
        const bool tie = std::count(votes.begin(), votes.end(), *top) > 1;
        out.labels[static_cast<std::size_t>(j)] =
            tie ? kAmbiguous : static_cast<int>(top - votes.begin());
        out.scores[static_cast<std::size_t>(j)] =
            static_cast<double>(votes[static_cast<std::size_t>(positive_class)]) /
            static_cast<double>(std::accumulate(votes.begin(), votes.end(), 0));
      }
      break;
    }
  }
  return out;
}

double ConfusionCounts::accuracy() const {
  const auto n = total();
  return n == 0 ? std::numeric_limits<double>::quiet_NaN()
                : static_cast<double>(correct) / static_cast<double>(n);
}

double ConfusionCounts::false_positive_rate() const {
  const auto negatives = fp + tn + ambiguous_negative;
  return negatives == 0 ? std::numeric_limits<double>::quiet_NaN()
                        : static_cast<double>(fp) / static_cast<double>(negatives);
}

ConfusionCounts confusion(std::span<const int> truth, std::span<const int> predicted,
                          int positive_class) {
  if (truth.size() != predicted.size()) {
    throw InvalidArgument("truth and prediction lengths differ");
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool positive = truth[i] == positive_class;
    if (predicted[i] == kAmbiguous) {
      ++(positive ? c.ambiguous_positive : c.ambiguous_negative);
      continue;
    }
    if (predicted[i] == truth[i]) ++c.correct;
    const bool flagged = predicted[i] == positive_class;
    if (positive) {
      ++(flagged ? c.tp : c.fn);
    } else {
      ++(flagged ? c.fp : c.tn);
    }
  }
  return c;
}

Summary summarize(std::span<const double> values) {
  Summary s;
  if (values.empty()) return {std::numeric_limits<double>::quiet_NaN(),
                              std::numeric_limits<double>::quiet_NaN()};
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

RocResult roc_auc(std::span<const double> scores, std::span<const int> truth) {
  if (scores.size() != truth.size()) throw InvalidArgument("score and truth lengths differ");
  for (double s : scores) {
    if (!std::isfinite(s)) throw InvalidArgument("ROC scores must be finite");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::size_t positives = 0;
  for (int t : truth) positives += t != 0;
  const std::size_t negatives = truth.size() - positives;
  const auto rate = [](std::size_t count, std::size_t total) {
    return total == 0 ? 0.0 : static_cast<double>(count) / static_cast<double>(total);
  };

  RocResult result;
  result.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double threshold = scores[order[i]];
    while (i < order.size() && scores[order[i]] == threshold) {
      ++(truth[order[i]] != 0 ? tp : fp);
      ++i;
    }
    result.points.push_back({threshold, rate(fp, negatives), rate(tp, positives)});
  }
  if (positives > 0 && negatives > 0) {
    double area = 0.0;
    for (std::size_t i = 1; i < result.points.size(); ++i) {
      const auto& a = result.points[i - 1];
      const auto& b = result.points[i];
      area += (b.fpr - a.fpr) * (a.tpr + b.tpr) * 0.5;
    }
    result.auc = area;
  }
  return result;
}

CvReport cross_validate(const Dataset& dataset, const ClassifierSpec& spec, int folds,
                        std::uint64_t seed, int positive_class) {
  check_positive_class(positive_class, dataset.num_classes());
  const auto splits = stratified_folds(dataset, folds, seed);
  CvReport report;
  report.classifier = spec.name();
  std::vector<double> accuracies;
  std::vector<double> fprs;
  std::vector<double> pooled_scores;
  std::vector<int> pooled_truth;

  for (std::size_t f = 0; f < splits.size(); ++f) {
    const auto& split = splits[f];
    std::vector<int> train_labels;
    std::vector<int> test_labels;
    for (auto i : split.train) train_labels.push_back(dataset.labels()[i]);
    for (auto i : split.test) test_labels.push_back(dataset.labels()[i]);
    const Predictions pred = train_and_predict(
        spec, select_rows(dataset.labeled(), split.train), train_labels,
        dataset.num_classes(), select_rows(dataset.labeled(), split.test),
        dataset.unlabeled(), positive_class);

    FoldResult fold;
    fold.fold = static_cast<int>(f) + 1;
    fold.test_size = split.test.size();
    fold.counts = confusion(test_labels, pred.labels, positive_class);
    fold.accuracy = fold.counts.accuracy();
    fold.fpr = fold.counts.false_positive_rate();
    report.ambiguous += fold.counts.ambiguous();
    accuracies.push_back(fold.accuracy);
    fprs.push_back(fold.fpr);
    report.folds.push_back(fold);
    for (std::size_t i = 0; i < test_labels.size(); ++i) {
      pooled_scores.push_back(pred.scores[i]);
      pooled_truth.push_back(test_labels[i] == positive_class ? 1 : 0);
    }
  }
  report.accuracy = summarize(accuracies);
  report.fpr = summarize(fprs);
  report.roc = roc_auc(pooled_scores, pooled_truth);
  return report;
}

DetectionSweep detection_rate(const Predictor& predictor, const Matrix& malicious,
                              std::span<const double> fractions,
                              std::span<const int> replicates, std::uint64_t seed,
                              int positive_class) {
  if (fractions.size() != replicates.size()) {
    throw InvalidArgument("fractions and replicate counts differ in length");
  }
  if (malicious.rows() == 0) throw InvalidArgument("detection test set is empty");
  const auto N = static_cast<std::size_t>(malicious.rows());
  Rng rng(seed);
  DetectionSweep sweep;
  std::vector<std::size_t> indices(N);

  for (std::size_t f = 0; f < fractions.size(); ++f) {
    const double fraction = fractions[f];
    if (!(fraction > 0.0 && fraction <= 1.0) || replicates[f] < 1) {
      throw InvalidArgument("fractions must be in (0, 1] and replicates positive");
    }
    DetectionRow row;
    row.fraction = fraction;
    row.replicates = replicates[f];
    row.sample_size = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(N)));
    if (row.sample_size == 0) {
      row.skipped = true;
      row.rate = {std::numeric_limits<double>::quiet_NaN(),
                  std::numeric_limits<double>::quiet_NaN()};
      sweep.warnings.push_back("fraction " + num(fraction) + " of " + std::to_string(N) +
                               " rows selects no samples; skipped");
      sweep.rows.push_back(row);
      continue;
    }
    std::vector<double> rates;
    for (int r = 0; r < replicates[f]; ++r) {
      std::iota(indices.begin(), indices.end(), std::size_t{0});
      // Partial Fisher-Yates: the first sample_size slots are the draw.
      for (std::size_t i = 0; i < row.sample_size; ++i) {
        std::swap(indices[i], indices[i + rng.index(N - i)]);
      }
      std::vector<std::size_t> chosen(indices.begin(),
                                      indices.begin() + static_cast<std::ptrdiff_t>(row.sample_size));
      std::sort(chosen.begin(), chosen.end());
      const auto labels = predictor(select_rows(malicious, chosen));
      const auto hits = std::count(labels.begin(), labels.end(), positive_class);
      rates.push_back(static_cast<double>(hits) / static_cast<double>(row.sample_size));
    }
    row.rate = summarize(rates);
    sweep.rows.push_back(row);
  }
  return sweep;
}

PcaModel pca_fit(const Matrix& X, int n_components) {
  const auto d = X.cols();
  if (n_components < 1 || n_components > std::min<Eigen::Index>(d, X.rows())) {
    throw InvalidArgument("n_components must be in 1..min(d, rows)");
  }
  PcaModel model;
  model.mean = X.colwise().mean().transpose();
  const Matrix centered = X.rowwise() - model.mean.transpose();
  const Matrix cov = centered.transpose() * centered / static_cast<double>(X.rows() - 1);
  if (!(cov.trace() > 0.0)) throw DataError("PCA input has zero variance");
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  if (eig.info() != Eigen::Success) throw NumericError("PCA eigendecomposition failed");

  model.components.resize(d, n_components);
  model.variances.resize(n_components);
  for (int c = 0; c < n_components; ++c) {
    const Eigen::Index src = d - 1 - c;  // eigenvalues are ascending
    Vector v = eig.eigenvectors().col(src);
    Eigen::Index arg = 0;
    for (Eigen::Index i = 1; i < d; ++i) {
      if (std::abs(v(i)) > std::abs(v(arg))) arg = i;
    }
    if (v(arg) < 0.0) v = -v;
    model.components.col(c) = v;
    model.variances(c) = std::max(0.0, eig.eigenvalues()(src));
  }
  return model;
}

Matrix pca_transform(const PcaModel& model, const Matrix& X) {
  if (X.rows() == 0) return Matrix(0, model.components.cols());
  if (X.cols() != model.mean.size()) {
    throw DimensionError(static_cast<std::size_t>(model.mean.size()),
                         static_cast<std::size_t>(X.cols()));
  }
  return (X.rowwise() - model.mean.transpose()) * model.components;
}

std::string_view to_string(Cohort cohort) {
  switch (cohort) {
    case Cohort::benign_in: return "benign-in";
    case Cohort::malicious_in: return "malicious-in";
    case Cohort::oos: return "oos";
  }
  return "?";
}

ScatterTable pca_project(const Matrix& in_sample, std::span<const int> labels,
                         const Matrix& out_of_sample, int n_components,
                         int positive_class) {
  if (static_cast<std::size_t>(in_sample.rows()) != labels.size()) {
    throw InvalidArgument("in-sample rows and labels differ in length");
  }
  const PcaModel model = pca_fit(in_sample, n_components);
  ScatterTable table;
  table.scores.resize(in_sample.rows() + out_of_sample.rows(), n_components);
  table.scores.topRows(in_sample.rows()) = pca_transform(model, in_sample);
  if (out_of_sample.rows() > 0) {
    table.scores.bottomRows(out_of_sample.rows()) = pca_transform(model, out_of_sample);
  }
  for (int y : labels) {
    table.cohorts.push_back(y == positive_class ? Cohort::malicious_in : Cohort::benign_in);
  }
  table.cohorts.insert(table.cohorts.end(), static_cast<std::size_t>(out_of_sample.rows()),
                       Cohort::oos);
  return table;
}

ExternalPredictions read_external_predictions(std::istream& in, std::string name) {
  ExternalPredictions out;
  out.name = std::move(name);
  std::string line;
  if (!std::getline(in, line)) throw DataError("external predictions file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "sample_id,predicted_label,score" && line != "sample_id,predicted_label") {
    throw DataError("external predictions header must be sample_id,predicted_label[,score]");
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    std::vector<std::string_view> cells;
    std::string_view rest = line;
    while (true) {
      const auto comma = rest.find(',');
      cells.push_back(trim(rest.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    const auto bad = [&](const std::string& what) {
      return DataError("external predictions line " + std::to_string(line_no) + ": " + what);
    };
    if (cells.size() < 2 || cells.size() > 3) throw bad("expected 2 or 3 cells");
    std::size_t id = 0;
    auto [p1, e1] = std::from_chars(cells[0].data(), cells[0].data() + cells[0].size(), id);
    if (e1 != std::errc() || p1 != cells[0].data() + cells[0].size()) throw bad("invalid sample_id");
    int label = kAmbiguous;
    if (!cells[1].empty() && cells[1] != "NA") {
      auto [p2, e2] = std::from_chars(cells[1].data(), cells[1].data() + cells[1].size(), label);
      if (e2 != std::errc() || p2 != cells[1].data() + cells[1].size() || label < 1) {
        throw bad("invalid predicted_label");
      }
      label -= 1;
    }
    std::optional<double> score;
    if (cells.size() == 3 && !cells[2].empty()) {
      const std::string text(cells[2]);
      char* end = nullptr;
      const double v = std::strtod(text.c_str(), &end);
      if (end != text.c_str() + text.size() || !std::isfinite(v)) throw bad("invalid score");
      score = v;
    }
    out.sample_ids.push_back(id);
    out.labels.push_back(label);
    out.scores.push_back(score);
  }
  return out;
}

ComparisonRow score_external_in_sample(const ExternalPredictions& external,
                                       const Dataset& dataset, int positive_class) {
  std::unordered_map<std::size_t, std::size_t> by_row;
  for (std::size_t i = 0; i < dataset.n(); ++i) by_row[dataset.labeled_rows()[i]] = i;
  std::vector<int> truth;
  std::vector<int> predicted;
  std::vector<double> scores;
  std::vector<int> score_truth;
  for (std::size_t e = 0; e < external.sample_ids.size(); ++e) {
    const auto it = by_row.find(external.sample_ids[e]);
    if (it == by_row.end()) continue;  // unlabeled or unknown row
    const int y = dataset.labels()[it->second];
    truth.push_back(y);
    predicted.push_back(external.labels[e]);
    if (external.scores[e]) {
      scores.push_back(*external.scores[e]);
      score_truth.push_back(y == positive_class ? 1 : 0);
    }
  }
  if (truth.empty()) throw DataError("external predictions '" + external.name +
                                     "' match no labeled rows");
  const auto counts = confusion(truth, predicted, positive_class);
  ComparisonRow row;
  row.classifier = external.name;
  row.mean_acc = counts.accuracy();
  row.mean_fpr = counts.false_positive_rate();
  row.ambiguous = counts.ambiguous();
  if (!scores.empty() && scores.size() == truth.size()) {
    row.auc = roc_auc(scores, score_truth).auc;
  }
  return row;
}

ComparisonRow score_external_detection(const ExternalPredictions& external,
                                       std::size_t set_size, int positive_class) {
  std::size_t hits = 0;
  std::size_t ambiguous = 0;
  std::vector<bool> seen(set_size, false);
  for (std::size_t e = 0; e < external.sample_ids.size(); ++e) {
    const auto id = external.sample_ids[e];
    if (id >= set_size) throw DataError("external sample_id " + std::to_string(id) +
                                        " outside the out-of-sample set");
    if (seen[id]) throw DataError("duplicate external sample_id " + std::to_string(id));
    seen[id] = true;
    hits += external.labels[e] == positive_class;
    ambiguous += external.labels[e] == kAmbiguous;
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw DataError("external predictions '" + external.name +
                    "' do not cover the whole out-of-sample set");
  }
  ComparisonRow row;
  row.classifier = external.name;
  row.detection_rate = static_cast<double>(hits) / static_cast<double>(set_size);
  row.ambiguous = ambiguous;
  return row;
}

ComparisonRow comparison_row(const CvReport& report) {
  ComparisonRow row;
  row.classifier = report.classifier;
  row.mean_acc = report.accuracy.mean;
  row.sd_acc = report.accuracy.sd;
  row.mean_fpr = report.fpr.mean;
  row.sd_fpr = report.fpr.sd;
  row.auc = report.roc.auc;
  row.ambiguous = report.ambiguous;
  return row;
}

void write_cv_folds_csv(std::span<const CvReport> reports, std::ostream& out) {
  out << "classifier,fold,test_size,accuracy,fpr,tp,fp,tn,fn,ambiguous\n";
  for (const auto& r : reports) {
    for (const auto& f : r.folds) {
      out << r.classifier << ',' << f.fold << ',' << f.test_size << ',' << num(f.accuracy)
          << ',' << num(f.fpr) << ',' << f.counts.tp << ',' << f.counts.fp << ','
          << f.counts.tn << ',' << f.counts.fn << ',' << f.counts.ambiguous() << '\n';
    }
  }
}

void write_roc_csv(std::span<const CvReport> reports, std::ostream& out) {
  out << "classifier,threshold,fpr,tpr\n";
  for (const auto& r : reports) {
    for (const auto& p : r.roc.points) {
      out << r.classifier << ',' << (std::isinf(p.threshold) ? std::string("inf") : num(p.threshold))
          << ',' << num(p.fpr) << ',' << num(p.tpr) << '\n';
    }
  }
}

void write_detection_csv(std::span<const std::pair<std::string, DetectionSweep>> sweeps,
                         std::ostream& out) {
  out << "classifier,fraction,replicates,sample_size,mean_dr,sd_dr\n";
  for (const auto& [name, sweep] : sweeps) {
    for (const auto& row : sweep.rows) {
      if (row.skipped) continue;
      out << name << ',' << num(row.fraction) << ',' << row.replicates << ','
          << row.sample_size << ',' << num(row.rate.mean) << ',' << num(row.rate.sd) << '\n';
    }
  }
}

void write_scatter_csv(const ScatterTable& table, std::ostream& out) {
  for (Eigen::Index c = 0; c < table.scores.cols(); ++c) out << "PC" << c + 1 << ',';
  out << "cohort\n";
  for (Eigen::Index r = 0; r < table.scores.rows(); ++r) {
    for (Eigen::Index c = 0; c < table.scores.cols(); ++c) out << num(table.scores(r, c)) << ',';
    out << to_string(table.cohorts[static_cast<std::size_t>(r)]) << '\n';
  }
}

void write_comparison_csv(std::span<const ComparisonRow> rows, std::ostream& out) {
  out << "classifier,mean_acc,sd_acc,mean_fpr,sd_fpr,auc,detection_rate,ambiguous\n";
  for (const auto& r : rows) {
    out << r.classifier << ',' << opt_num(r.mean_acc) << ',' << opt_num(r.sd_acc) << ','
        << opt_num(r.mean_fpr) << ',' << opt_num(r.sd_fpr) << ',' << opt_num(r.auc) << ','
        << opt_num(r.detection_rate) << ',' << r.ambiguous << '\n';
  }
}

void write_comparison_table(std::span<const ComparisonRow> rows, std::ostream& out) {
  const auto pct = [](const std::optional<double>& v) {
    if (!v || std::isnan(*v)) return std::string("-");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * *v);
    return std::string(buf);
  };
  const auto fix = [](const std::optional<double>& v) {
    if (!v || std::isnan(*v)) return std::string("-");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", *v);
    return std::string(buf);
  };
  char line[256];
  std::snprintf(line, sizeof line, "%-16s %9s %7s %8s %7s %6s %8s %9s\n", "Classifier",
                "Mean ACC", "Sd ACC", "Mean FP", "Sd FP", "AUC", "DR", "Ambiguous");
  out << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-16s %9s %7s %8s %7s %6s %8s %9zu\n",
                  r.classifier.c_str(), pct(r.mean_acc).c_str(), fix(r.sd_acc).c_str(),
                  pct(r.mean_fpr).c_str(), fix(r.sd_fpr).c_str(), fix(r.auc).c_str(),
                  pct(r.detection_rate).c_str(), r.ambiguous);
    out << line;
  }
}

}  // namespace mbss
