#pragma once

// Reference classifiers: k-nearest neighbor and linear discriminant analysis.

#include <span>
#include <variant>
#include <vector>

#include "mbss/dataset.hpp"
#include "mbss/gmm.hpp"

namespace mbss {

/// The k-NN vote ended in a tie between two or more classes.
struct AmbiguousTie {
  friend bool operator==(AmbiguousTie, AmbiguousTie) { return true; }
};

using KnnOutcome = std::variant<int, AmbiguousTie>;

class KnnModel {
 public:
  /// Throws InvalidArgument on an empty training set, k < 1, k > n, or a
  /// label outside [0, num_classes).
  KnnModel(Matrix features, std::vector<int> labels, int num_classes, int k = 3);

  const Matrix& features() const { return features_; }
  const std::vector<int>& labels() const { return labels_; }
  int num_classes() const { return num_classes_; }
  int k() const { return k_; }

 private:
  Matrix features_;
  std::vector<int> labels_;
  int num_classes_;
  int k_;
};

/// Per-class vote counts among the k nearest training points by squared
/// Euclidean distance. Points tied with the k-th nearest are all included.
std::vector<int> knn_votes(const KnnModel& model, const Eigen::Ref<const Vector>& x);

/// Majority label, or AmbiguousTie when the top vote count is shared.
KnnOutcome knn_predict(const KnnModel& model, const Eigen::Ref<const Vector>& x);

struct LdaModel {
  Matrix means;           // K x d
  Matrix pooled_covariance;
  Vector log_priors;
  // Cached Sigma^-1 mu_k (columns) and -1/2 mu_k^T Sigma^-1 mu_k + log pi_k.
  Matrix coefficients;    // d x K
  Vector intercepts;      // K
};

/// Class means, priors n_k/n and the pooled within-class covariance
/// sum_k W_k / n regularized like the mixture covariances.
/// Throws InvalidArgument if a class has fewer than two samples.
LdaModel lda_fit(const Matrix& features, std::span<const int> labels,
                 int num_classes, double epsilon = kDefaultEpsilon);

struct LdaPrediction {
  int label = 0;
  Vector scores;
};

/// score_k(x) = x^T Sigma^-1 mu_k - 1/2 mu_k^T Sigma^-1 mu_k + log pi_k.
LdaPrediction lda_predict(const LdaModel& model, const Eigen::Ref<const Vector>& x);

/// Softmax of the discriminant scores: the plug-in class posteriors.
Vector lda_posteriors(const LdaModel& model, const Eigen::Ref<const Vector>& x);

}  // namespace mbss
