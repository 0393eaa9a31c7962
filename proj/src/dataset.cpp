#include "mbss/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "mbss/error.hpp"
#include "mbss/rng.hpp"

namespace mbss {
namespace {

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
  };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      return cells;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

void write_cell(std::ostream& out, double value) {
  if (value == 0.0) {
    out << '0';
  } else if (value == 1.0) {
    out << '1';
  } else {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    out << buf;
  }
}

}  // namespace

std::optional<ApiEvent> parse_event(std::string_view line) {
  line = trim(line);
  const std::size_t end = line.find_first_of(" \t");
  const std::string_view token = line.substr(0, end);
  const std::size_t dot = token.rfind('.');
  if (dot == std::string_view::npos || dot == 0 || dot + 1 == token.size()) {
    return std::nullopt;
  }
  return ApiEvent{std::string(token.substr(0, dot)),
                  std::string(token.substr(dot + 1))};
}

ApiVocabulary::ApiVocabulary(std::vector<std::string> entries)
    : entries_(std::move(entries)) {
  if (entries_.empty()) throw DataError("API vocabulary is empty");
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const std::string& e = entries_[i];
    if (e.empty() || e.find_first_of(",\"\n\r") != std::string::npos ||
        e == "label") {
      throw DataError("invalid vocabulary entry '" + e + "'");
    }
    if (!index_.emplace(e, i).second) {
      throw DataError("duplicate vocabulary entry '" + e + "'");
    }
  }
}

ApiVocabulary ApiVocabulary::numbered(std::size_t d) {
  std::vector<std::string> names;
  names.reserve(d);
  for (std::size_t i = 1; i <= d; ++i) names.push_back("f" + std::to_string(i));
  return ApiVocabulary(std::move(names));
}

std::optional<std::size_t> ApiVocabulary::index_of(std::string_view identity) const {
  const auto it = index_.find(std::string(identity));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

ApiVocabulary build_vocabulary(std::istream& api_list) {
  std::vector<std::string> entries;
  std::unordered_map<std::string, bool> seen;
  std::string line;
  while (std::getline(api_list, line)) {
    const std::string_view entry = trim(line);
    if (entry.empty() || entry.front() == '#') continue;
    std::string key(entry);
    if (seen.emplace(key, true).second) entries.push_back(std::move(key));
  }
  if (entries.empty()) throw DataError("API list contains no entries");
  return ApiVocabulary(std::move(entries));
}

ApiVocabulary load_vocabulary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open vocabulary file " + path.string());
  return build_vocabulary(in);
}

void save_vocabulary(const ApiVocabulary& vocabulary, std::ostream& out) {
  for (const auto& e : vocabulary.entries()) out << e << '\n';
}

LogParseResult parse_log(std::istream& raw_log, const ApiVocabulary& vocabulary) {
  if (vocabulary.empty()) throw InvalidArgument("vocabulary is empty");
  LogParseResult result;
  result.features.bits.assign(vocabulary.size(), 0);
  std::string line;
  while (std::getline(raw_log, line)) {
    if (trim(line).empty()) continue;
    const auto event = parse_event(line);
    if (!event) {
      ++result.malformed_lines;
      continue;
    }
    ++result.parsed_lines;
    if (const auto idx = vocabulary.index_of(event->identity())) {
      result.features.bits[*idx] = 1;
    } else {
      ++result.unknown_apis;
    }
  }
  if (result.parsed_lines == 0) {
    throw DataError("log contains no parseable API records (" +
                    std::to_string(result.malformed_lines) + " malformed)");
  }
  return result;
}

Dataset::Dataset(Matrix labeled, std::vector<int> labels, Matrix unlabeled,
                 int num_classes, ApiVocabulary vocabulary)
    : Dataset(labeled, labels, unlabeled, num_classes, vocabulary, {}, {}) {}

Dataset::Dataset(Matrix labeled, std::vector<int> labels, Matrix unlabeled,
                 int num_classes, ApiVocabulary vocabulary,
                 std::vector<std::size_t> labeled_rows,
                 std::vector<std::size_t> unlabeled_rows)
    : labeled_(std::move(labeled)),
      labels_(std::move(labels)),
      unlabeled_(std::move(unlabeled)),
      num_classes_(num_classes),
      vocabulary_(std::move(vocabulary)),
      labeled_rows_(std::move(labeled_rows)),
      unlabeled_rows_(std::move(unlabeled_rows)) {
  const auto d = static_cast<Eigen::Index>(vocabulary_.size());
  if (d == 0) throw DataError("dataset vocabulary is empty");
  if (num_classes_ < 1) throw DataError("number of classes must be positive");
  if (labeled_.cols() != d && labeled_.rows() > 0) {
    throw DimensionError(vocabulary_.size(), labeled_.cols());
  }
  if (unlabeled_.cols() != d && unlabeled_.rows() > 0) {
    throw DimensionError(vocabulary_.size(), unlabeled_.cols());
  }
  if (labeled_.rows() == 0) labeled_.resize(0, d);
  if (unlabeled_.rows() == 0) unlabeled_.resize(0, d);
  if (static_cast<std::size_t>(labeled_.rows()) != labels_.size()) {
    throw DataError("labeled block has " + std::to_string(labeled_.rows()) +
                    " rows but " + std::to_string(labels_.size()) + " labels");
  }
  std::vector<bool> present(static_cast<std::size_t>(num_classes_), false);
  for (int y : labels_) {
    if (y < 0 || y >= num_classes_) {
      throw DataError("label " + std::to_string(y + 1) + " outside 1.." +
                      std::to_string(num_classes_));
    }
    present[static_cast<std::size_t>(y)] = true;
  }
  for (int k = 0; k < num_classes_; ++k) {
    if (!present[static_cast<std::size_t>(k)]) {
      throw DataError("class " + std::to_string(k + 1) +
                      " has no labeled samples");
    }
  }
  if (labeled_rows_.empty() && unlabeled_rows_.empty()) {
    labeled_rows_.resize(n());
    std::iota(labeled_rows_.begin(), labeled_rows_.end(), std::size_t{0});
    unlabeled_rows_.resize(m());
    std::iota(unlabeled_rows_.begin(), unlabeled_rows_.end(), n());
  }
  if (labeled_rows_.size() != n() || unlabeled_rows_.size() != m()) {
    throw DataError("row ordinal count does not match the blocks");
  }
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes_), 0);
  for (int y : labels_) ++counts[static_cast<std::size_t>(y)];
  return counts;
}

Dataset Dataset::with_unlabeled(Matrix unlabeled) const {
  std::size_t next = 0;
  for (auto r : labeled_rows_) next = std::max(next, r + 1);
  for (auto r : unlabeled_rows_) next = std::max(next, r + 1);
  std::vector<std::size_t> rows(static_cast<std::size_t>(unlabeled.rows()));
  std::iota(rows.begin(), rows.end(), next);
  return Dataset(labeled_, labels_, std::move(unlabeled), num_classes_,
                 vocabulary_, labeled_rows_, std::move(rows));
}

bool operator==(const Dataset& a, const Dataset& b) {
  // Matrix operator== is coefficient-wise exact.
  return a.num_classes_ == b.num_classes_ && a.vocabulary_ == b.vocabulary_ &&
         a.labels_ == b.labels_ && a.labeled_rows_ == b.labeled_rows_ &&
         a.unlabeled_rows_ == b.unlabeled_rows_ &&
         a.labeled_.rows() == b.labeled_.rows() &&
         a.unlabeled_.rows() == b.unlabeled_.rows() &&
         a.labeled_ == b.labeled_ && a.unlabeled_ == b.unlabeled_;
}

void write_feature_table(const FeatureTable& table, std::ostream& out) {
  if (static_cast<std::size_t>(table.features.rows()) != table.labels.size()) {
    throw InvalidArgument("feature table rows and labels differ in length");
  }
  for (const auto& e : table.vocabulary.entries()) out << e << ',';
  out << "label\n";
  for (Eigen::Index r = 0; r < table.features.rows(); ++r) {
    for (Eigen::Index c = 0; c < table.features.cols(); ++c) {
      write_cell(out, table.features(r, c));
      out << ',';
    }
    if (const auto& y = table.labels[static_cast<std::size_t>(r)]) out << *y + 1;
    out << '\n';
  }
}

FeatureTable read_feature_table(std::istream& in, bool allow_real) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("dataset CSV is empty");
  line = strip_cr(std::move(line));
  const auto header = split_commas(line);
  if (header.size() < 2 || header.back() != "label") {
    throw DataError("dataset CSV header must end with a 'label' column");
  }
  std::vector<std::string> names;
  for (std::size_t i = 0; i + 1 < header.size(); ++i) names.emplace_back(header[i]);
  FeatureTable table;
  table.vocabulary = ApiVocabulary(std::move(names));
  const std::size_t d = table.vocabulary.size();

  std::vector<double> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(std::move(line));
    if (line.empty()) continue;
    const auto cells = split_commas(line);
    const auto fail = [&](const std::string& what) {
      return DataError("line " + std::to_string(line_no) + ": " + what);
    };
    if (cells.size() != d + 1) {
      throw fail("expected " + std::to_string(d + 1) + " cells, got " +
                 std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < d; ++c) {
      const std::string_view cell = trim(cells[c]);
      if (cell == "0") {
        values.push_back(0.0);
      } else if (cell == "1") {
        values.push_back(1.0);
      } else if (allow_real) {
        const std::string text(cell);
        char* end = nullptr;
        const double value = std::strtod(text.c_str(), &end);
        if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(value)) {
          throw fail("invalid feature cell '" + text + "'");
        }
        values.push_back(value);
      } else {
        throw fail("feature cell '" + std::string(cell) + "' is not 0 or 1");
      }
    }
    const std::string_view label_cell = trim(cells.back());
    if (label_cell.empty()) {
      table.labels.emplace_back(std::nullopt);
      continue;
    }
    int label = 0;
    const auto [ptr, ec] =
        std::from_chars(label_cell.data(), label_cell.data() + label_cell.size(), label);
    if (ec != std::errc() || ptr != label_cell.data() + label_cell.size() || label < 1) {
      throw fail("invalid label '" + std::string(label_cell) + "'");
    }
    table.labels.emplace_back(label - 1);
  }

  const auto rows = static_cast<Eigen::Index>(table.labels.size());
  table.features.resize(rows, static_cast<Eigen::Index>(d));
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < table.features.cols(); ++c) {
      table.features(r, c) = values[static_cast<std::size_t>(r) * d + static_cast<std::size_t>(c)];
    }
  }
  return table;
}

FeatureTable load_feature_table(const std::filesystem::path& path, bool allow_real) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset " + path.string());
  return read_feature_table(in, allow_real);
}

Dataset to_dataset(FeatureTable table, std::optional<int> num_classes) {
  std::vector<std::size_t> lab_rows;
  std::vector<std::size_t> unl_rows;
  std::vector<int> labels;
  int inferred = 0;
  for (std::size_t r = 0; r < table.labels.size(); ++r) {
    if (const auto& y = table.labels[r]) {
      lab_rows.push_back(r);
      labels.push_back(*y);
      inferred = std::max(inferred, *y + 1);
    } else {
      unl_rows.push_back(r);
    }
  }
  const int K = num_classes.value_or(inferred);
  if (K == 0) throw DataError("dataset has no labeled rows");
  const auto gather = [&](const std::vector<std::size_t>& rows) {
    Matrix X(static_cast<Eigen::Index>(rows.size()), table.features.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      X.row(static_cast<Eigen::Index>(i)) = table.features.row(static_cast<Eigen::Index>(rows[i]));
    }
    return X;
  };
  Matrix labeled = gather(lab_rows);
  Matrix unlabeled = gather(unl_rows);
  return Dataset(std::move(labeled), std::move(labels), std::move(unlabeled), K,
                 std::move(table.vocabulary), std::move(lab_rows), std::move(unl_rows));
}

FeatureTable to_feature_table(const Dataset& dataset) {
  const std::size_t total = dataset.n() + dataset.m();
  FeatureTable table;
  table.vocabulary = dataset.vocabulary();
  table.features.resize(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(dataset.dim()));
  table.labels.assign(total, std::nullopt);
  std::vector<bool> filled(total, false);
  const auto place = [&](std::size_t row, const auto& x, std::optional<int> y) {
    if (row >= total || filled[row]) throw DataError("row ordinals are not a permutation");
    filled[row] = true;
    table.features.row(static_cast<Eigen::Index>(row)) = x;
    table.labels[row] = y;
  };
  for (std::size_t i = 0; i < dataset.n(); ++i) {
    place(dataset.labeled_rows()[i], dataset.labeled().row(static_cast<Eigen::Index>(i)),
          dataset.labels()[i]);
  }
  for (std::size_t j = 0; j < dataset.m(); ++j) {
    place(dataset.unlabeled_rows()[j], dataset.unlabeled().row(static_cast<Eigen::Index>(j)),
          std::nullopt);
  }
  return table;
}

void write_dataset_csv(const Dataset& dataset, std::ostream& out) {
  write_feature_table(to_feature_table(dataset), out);
}

Dataset read_dataset_csv(std::istream& in, const CsvOptions& options) {
  return to_dataset(read_feature_table(in, options.allow_real), options.num_classes);
}

Dataset load_dataset_csv(const std::filesystem::path& path,
                         const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset " + path.string());
  return read_dataset_csv(in, options);
}

std::vector<Fold> stratified_folds(std::span<const int> labels, int num_classes,
                                   int folds, std::uint64_t seed) {
  if (folds < 2) throw InvalidArgument("folds must be at least 2");
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(num_classes));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i];
    if (y < 0 || y >= num_classes) throw InvalidArgument("label out of range");
    members[static_cast<std::size_t>(y)].push_back(i);
  }
  for (std::size_t k = 0; k < members.size(); ++k) {
    if (members[k].size() < static_cast<std::size_t>(folds)) {
      throw InvalidArgument("class " + std::to_string(k + 1) + " has " +
                            std::to_string(members[k].size()) +
                            " labeled samples, fewer than " +
                            std::to_string(folds) + " folds");
    }
  }

  Rng rng(seed);
  std::vector<int> assignment(labels.size(), 0);
  std::size_t position = 0;
  for (auto& group : members) {
    rng.shuffle(std::span<std::size_t>(group));
    for (std::size_t idx : group) {
      assignment[idx] = static_cast<int>(position % static_cast<std::size_t>(folds));
      ++position;
    }
  }

  std::vector<Fold> result(static_cast<std::size_t>(folds));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (int f = 0; f < folds; ++f) {
      auto& fold = result[static_cast<std::size_t>(f)];
      (assignment[i] == f ? fold.test : fold.train).push_back(i);
    }
  }
  return result;
}

std::vector<Fold> stratified_folds(const Dataset& dataset, int folds,
                                   std::uint64_t seed) {
  return stratified_folds(dataset.labels(), dataset.num_classes(), folds, seed);
}

Deduplicated deduplicate(const Matrix& features) {
  std::map<std::vector<double>, std::size_t> first_seen;
  std::vector<Eigen::Index> unique_rows;
  Deduplicated result;
  for (Eigen::Index r = 0; r < features.rows(); ++r) {
    std::vector<double> key(static_cast<std::size_t>(features.cols()));
    for (Eigen::Index c = 0; c < features.cols(); ++c) {
      key[static_cast<std::size_t>(c)] = features(r, c);
    }
    const auto [it, inserted] = first_seen.emplace(std::move(key), unique_rows.size());
    if (inserted) {
      unique_rows.push_back(r);
      result.counts.push_back(1);
    } else {
      ++result.counts[it->second];
    }
  }
  result.unique.resize(static_cast<Eigen::Index>(unique_rows.size()), features.cols());
  for (std::size_t i = 0; i < unique_rows.size(); ++i) {
    result.unique.row(static_cast<Eigen::Index>(i)) = features.row(unique_rows[i]);
  }
  return result;
}

}  // namespace mbss
