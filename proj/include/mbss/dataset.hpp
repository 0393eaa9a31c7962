#pragma once

// Trace-log ingestion, the API vocabulary, binary feature vectors and the
// labeled/unlabeled Dataset container.
//
// Class indices are zero-based in memory (0..K-1) and one-based in every
// file format (1..K).

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace mbss {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// One intercepted API invocation: "ClassName.methodName".
struct ApiEvent {
  std::string class_name;
  std::string method_name;

  std::string identity() const { return class_name + "." + method_name; }
};

/// Parses one log record. The first whitespace-delimited token is split at
/// its last '.'; any further tokens (timestamps, arguments) are ignored.
/// Returns nullopt when the record has no class or no method part.
std::optional<ApiEvent> parse_event(std::string_view line);

/// Ordered, duplicate-free list of monitored API identities. The position
/// of an entry is its feature index.
class ApiVocabulary {
 public:
  ApiVocabulary() = default;
  /// Throws DataError on empty input, duplicates, or entries containing
  /// characters that cannot appear in a CSV header cell.
  explicit ApiVocabulary(std::vector<std::string> entries);

  /// Generic names f1..fd, used for synthetic data.
  static ApiVocabulary numbered(std::size_t d);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<std::string>& entries() const { return entries_; }
  std::optional<std::size_t> index_of(std::string_view identity) const;

  friend bool operator==(const ApiVocabulary& a, const ApiVocabulary& b) {
    return a.entries_ == b.entries_;
  }

 private:
  std::vector<std::string> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Reads one identity per line; blank lines and '#' comments are skipped,
/// duplicates keep their first occurrence.
ApiVocabulary build_vocabulary(std::istream& api_list);
ApiVocabulary load_vocabulary(const std::filesystem::path& path);
void save_vocabulary(const ApiVocabulary& vocabulary, std::ostream& out);

/// Presence bits over a vocabulary.
struct FeatureVector {
  std::vector<std::uint8_t> bits;

  std::size_t size() const { return bits.size(); }
  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

struct LogParseResult {
  FeatureVector features;
  std::size_t parsed_lines = 0;
  std::size_t malformed_lines = 0;
  std::size_t unknown_apis = 0;
};

/// Converts one trace into presence bits. Multiplicity and order of the
/// records are discarded; APIs outside the vocabulary are ignored.
/// Throws DataError when no line parses.
LogParseResult parse_log(std::istream& raw_log, const ApiVocabulary& vocabulary);

/// Labeled block (features + class labels) and unlabeled block sharing one
/// vocabulary. Every row also remembers its ordinal in the CSV it came from,
/// which serves as the sample id in prediction files.
class Dataset {
 public:
  /// Row ordinals default to labeled rows first, then unlabeled rows.
  Dataset(Matrix labeled, std::vector<int> labels, Matrix unlabeled,
          int num_classes, ApiVocabulary vocabulary);
  Dataset(Matrix labeled, std::vector<int> labels, Matrix unlabeled,
          int num_classes, ApiVocabulary vocabulary,
          std::vector<std::size_t> labeled_rows,
          std::vector<std::size_t> unlabeled_rows);

  const Matrix& labeled() const { return labeled_; }
  const std::vector<int>& labels() const { return labels_; }
  const Matrix& unlabeled() const { return unlabeled_; }
  const ApiVocabulary& vocabulary() const { return vocabulary_; }
  const std::vector<std::size_t>& labeled_rows() const { return labeled_rows_; }
  const std::vector<std::size_t>& unlabeled_rows() const {
    return unlabeled_rows_;
  }

  int num_classes() const { return num_classes_; }
  std::size_t dim() const { return vocabulary_.size(); }
  std::size_t n() const { return static_cast<std::size_t>(labeled_.rows()); }
  std::size_t m() const { return static_cast<std::size_t>(unlabeled_.rows()); }

  /// Labeled row counts per class.
  std::vector<std::size_t> class_counts() const;

  /// Same labeled block with a different unlabeled block (row ordinals of
  /// the new block continue after the existing rows).
  Dataset with_unlabeled(Matrix unlabeled) const;

  friend bool operator==(const Dataset& a, const Dataset& b);

 private:
  Matrix labeled_;
  std::vector<int> labels_;
  Matrix unlabeled_;
  int num_classes_;
  ApiVocabulary vocabulary_;
  std::vector<std::size_t> labeled_rows_;
  std::vector<std::size_t> unlabeled_rows_;
};

/// Raw CSV contents: every row with an optional one-based label cell
/// (stored zero-based). No class-coverage requirement, so fully unlabeled
/// files are representable.
struct FeatureTable {
  ApiVocabulary vocabulary;
  Matrix features;
  std::vector<std::optional<int>> labels;
};

struct CsvOptions {
  /// Accept arbitrary real feature cells instead of only "0"/"1".
  bool allow_real = false;
  /// Number of classes; inferred as the largest label when unset.
  std::optional<int> num_classes;
};

/// CSV with a header of API identities plus a trailing "label" column.
/// Labels are one-based; an empty label cell marks an unlabeled row.
/// Feature cells are written as "0"/"1" when binary and with 17 significant
/// digits otherwise.
void write_feature_table(const FeatureTable& table, std::ostream& out);
FeatureTable read_feature_table(std::istream& in, bool allow_real = false);
FeatureTable load_feature_table(const std::filesystem::path& path,
                                bool allow_real = false);
/// Splits a table into labeled and unlabeled blocks. Throws DataError if
/// the Dataset invariants do not hold.
Dataset to_dataset(FeatureTable table, std::optional<int> num_classes = std::nullopt);
FeatureTable to_feature_table(const Dataset& dataset);

void write_dataset_csv(const Dataset& dataset, std::ostream& out);
Dataset read_dataset_csv(std::istream& in, const CsvOptions& options = {});
Dataset load_dataset_csv(const std::filesystem::path& path,
                         const CsvOptions& options = {});

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Stratified k-fold split over labeled rows. Each class is shuffled with
/// the seed and dealt round-robin, continuing the deal across classes, so
/// fold sizes differ by at most one and every class is spread evenly.
std::vector<Fold> stratified_folds(std::span<const int> labels, int num_classes,
                                   int folds, std::uint64_t seed);
std::vector<Fold> stratified_folds(const Dataset& dataset, int folds,
                                   std::uint64_t seed);

struct Deduplicated {
  Matrix unique;
  std::vector<std::size_t> counts;
};

/// Unique rows in first-occurrence order with their multiplicities.
Deduplicated deduplicate(const Matrix& features);

}  // namespace mbss
