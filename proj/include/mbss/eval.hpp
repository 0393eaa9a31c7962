#pragma once

// Evaluation harness: stratified cross-validation, detection rate under
// test-size subsampling, ROC/AUC, PCA scatter export and report writers.
//
// The positive class ("malicious") is a zero-based class index; every other
// class counts as negative.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mbss/cem.hpp"
#include "mbss/dataset.hpp"

namespace mbss {

/// Label value used for an abstention (a k-NN vote tie).
inline constexpr int kAmbiguous = -1;

enum class ClassifierKind { mbss, lda, knn };

struct ClassifierSpec {
  ClassifierKind kind = ClassifierKind::mbss;
  /// Candidate families for MBSS; the maximum-BIC fit is used.
  std::vector<CovarianceFamily> families{kAllFamilies.begin(), kAllFamilies.end()};
  CemConfig cem;
  int k = 3;

  /// "MBSS", "LDA" or e.g. "3NN".
  std::string name() const;
};

/// Parses "mbss", "lda", "knn" or "<k>nn" (e.g. "3nn").
ClassifierSpec parse_classifier(std::string_view text, const ClassifierSpec& base = {});

struct Predictions {
  std::vector<int> labels;     // kAmbiguous for abstentions
  std::vector<double> scores;  // posterior (or vote share) of the positive class
};

/// Trains on the labeled rows and predicts test_features. MBSS is fit
/// semi-supervised with test_features followed by extra_unlabeled as its
/// unlabeled block; the baselines ignore both during training.
Predictions train_and_predict(const ClassifierSpec& spec, const Matrix& train_features,
                              std::span<const int> train_labels, int num_classes,
                              const Matrix& test_features,
                              const Matrix& extra_unlabeled, int positive_class);

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;
  std::size_t ambiguous_positive = 0;  // abstentions on positive samples
  std::size_t ambiguous_negative = 0;
  std::size_t correct = 0;             // exact label matches

  std::size_t total() const {
    return tp + fp + tn + fn + ambiguous_positive + ambiguous_negative;
  }
  std::size_t ambiguous() const { return ambiguous_positive + ambiguous_negative; }
  double accuracy() const;
  /// FP over all negative samples (abstentions included in the denominator).
  /// NaN when there are no negative samples.
  double false_positive_rate() const;
};

ConfusionCounts confusion(std::span<const int> truth, std::span<const int> predicted,
                          int positive_class);

struct Summary {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation; 0 for a single value
};

Summary summarize(std::span<const double> values);

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocResult {
  std::vector<RocPoint> points;
  /// Unset when truth holds only one class.
  std::optional<double> auc;
};

/// Sweeps every unique score as a threshold (score >= threshold is
/// positive), from (0,0) to (1,1); AUC by the trapezoidal rule.
/// truth[i] != 0 marks a positive sample.
RocResult roc_auc(std::span<const double> scores, std::span<const int> truth);

struct FoldResult {
  int fold = 0;
  std::size_t test_size = 0;
  double accuracy = 0.0;
  double fpr = 0.0;
  ConfusionCounts counts;
};

struct CvReport {
  std::string classifier;
  std::vector<FoldResult> folds;
  Summary accuracy;
  Summary fpr;
  std::size_t ambiguous = 0;
  /// ROC of the pooled out-of-fold positive-class scores.
  RocResult roc;
};

/// Stratified k-fold cross-validation over the labeled rows.
CvReport cross_validate(const Dataset& dataset, const ClassifierSpec& spec,
                        int folds, std::uint64_t seed, int positive_class);

struct DetectionRow {
  double fraction = 0.0;
  int replicates = 0;
  std::size_t sample_size = 0;
  bool skipped = false;
  Summary rate;
};

struct DetectionSweep {
  std::vector<DetectionRow> rows;
  std::vector<std::string> warnings;
};

inline const std::vector<double> kDefaultFractions = {0.001, 0.01, 0.2, 0.5, 0.9, 1.0};
inline const std::vector<int> kDefaultReplicates = {50, 30, 20, 10, 5, 1};

using Predictor = std::function<std::vector<int>(const Matrix&)>;

/// For each fraction, draws `replicates` subsamples of round(fraction * N)
/// rows without replacement and reports the mean and sd of the share
/// predicted positive. Fractions that yield zero rows are skipped with a
/// warning.
DetectionSweep detection_rate(const Predictor& predictor, const Matrix& malicious,
                              std::span<const double> fractions,
                              std::span<const int> replicates, std::uint64_t seed,
                              int positive_class);

struct PcaModel {
  Vector mean;
  Matrix components;  // d x c, unit columns, largest coordinate positive
  Vector variances;   // descending
};

/// Principal directions of the sample covariance of X.
/// Throws DataError on zero-variance data, InvalidArgument when
/// n_components exceeds min(d, rows).
PcaModel pca_fit(const Matrix& X, int n_components);
Matrix pca_transform(const PcaModel& model, const Matrix& X);

enum class Cohort { benign_in, malicious_in, oos };
std::string_view to_string(Cohort cohort);

struct ScatterTable {
  Matrix scores;  // rows x c
  std::vector<Cohort> cohorts;
};

/// Fits PCA on the in-sample block only and projects both blocks.
ScatterTable pca_project(const Matrix& in_sample, std::span<const int> labels,
                         const Matrix& out_of_sample, int n_components,
                         int positive_class);

/// Externally produced predictions (e.g. from an SVM).
/// CSV: sample_id,predicted_label[,score]; labels are one-based, "NA" or an
/// empty cell is an abstention. sample_id is the row ordinal in the dataset
/// CSV the predictions refer to.
struct ExternalPredictions {
  std::string name;
  std::vector<std::size_t> sample_ids;
  std::vector<int> labels;
  std::vector<std::optional<double>> scores;
};

ExternalPredictions read_external_predictions(std::istream& in, std::string name);

/// One classifier row of the comparison table; unset cells print as "-".
struct ComparisonRow {
  std::string classifier;
  std::optional<double> mean_acc;
  std::optional<double> sd_acc;
  std::optional<double> mean_fpr;
  std::optional<double> sd_fpr;
  std::optional<double> auc;
  std::optional<double> detection_rate;
  std::size_t ambiguous = 0;
};

/// Scores external predictions against the labeled rows of `dataset`.
ComparisonRow score_external_in_sample(const ExternalPredictions& external,
                                       const Dataset& dataset, int positive_class);
/// Detection rate of external predictions over an all-positive set of
/// `set_size` rows.
ComparisonRow score_external_detection(const ExternalPredictions& external,
                                       std::size_t set_size, int positive_class);

ComparisonRow comparison_row(const CvReport& report);

void write_cv_folds_csv(std::span<const CvReport> reports, std::ostream& out);
void write_roc_csv(std::span<const CvReport> reports, std::ostream& out);
void write_detection_csv(std::span<const std::pair<std::string, DetectionSweep>> sweeps,
                         std::ostream& out);
void write_scatter_csv(const ScatterTable& table, std::ostream& out);
void write_comparison_csv(std::span<const ComparisonRow> rows, std::ostream& out);
/// Fixed-width text table.
void write_comparison_table(std::span<const ComparisonRow> rows, std::ostream& out);

}  // namespace mbss
