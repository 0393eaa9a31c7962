#include "mbss/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mbss/error.hpp"

namespace mbss {

KnnModel::KnnModel(Matrix features, std::vector<int> labels, int num_classes, int k)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      num_classes_(num_classes),
      k_(k) {
  if (features_.rows() == 0) throw InvalidArgument("k-NN training set is empty");
  if (static_cast<std::size_t>(features_.rows()) != labels_.size()) {
    throw InvalidArgument("k-NN feature and label counts differ");
  }
  if (k_ < 1 || k_ > features_.rows()) {
    throw InvalidArgument("k must be in 1..n (got " + std::to_string(k_) + ")");
  }
  for (int y : labels_) {
    if (y < 0 || y >= num_classes_) throw InvalidArgument("k-NN label out of range");
  }
}

std::vector<int> knn_votes(const KnnModel& model, const Eigen::Ref<const Vector>& x) {
  const Matrix& X = model.features();
  if (x.size() != X.cols()) {
    throw DimensionError(static_cast<std::size_t>(X.cols()), static_cast<std::size_t>(x.size()));
  }
  std::vector<double> dist(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    dist[static_cast<std::size_t>(i)] = (X.row(i).transpose() - x).squaredNorm();
  }
  std::vector<double> sorted = dist;
  const auto kth = sorted.begin() + (model.k() - 1);
  std::nth_element(sorted.begin(), kth, sorted.end());
  const double radius = *kth;

  std::vector<int> votes(static_cast<std::size_t>(model.num_classes()), 0);
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist[i] <= radius) ++votes[static_cast<std::size_t>(model.labels()[i])];
  }
  return votes;
}

KnnOutcome knn_predict(const KnnModel& model, const Eigen::Ref<const Vector>& x) {
  const auto votes = knn_votes(model, x);
  const auto top = std::max_element(votes.begin(), votes.end());
  if (std::count(votes.begin(), votes.end(), *top) > 1) return AmbiguousTie{};
  return static_cast<int>(top - votes.begin());
}

LdaModel lda_fit(const Matrix& features, std::span<const int> labels,
                 int num_classes, double epsilon) {
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw InvalidArgument("LDA feature and label counts differ");
  }
  const Eigen::Index d = features.cols();
  const auto K = static_cast<Eigen::Index>(num_classes);
  std::vector<std::size_t> counts(static_cast<std::size_t>(K), 0);
  Matrix means = Matrix::Zero(K, d);
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= num_classes) throw InvalidArgument("LDA label out of range");
    ++counts[static_cast<std::size_t>(y)];
    means.row(y) += features.row(i);
  }
  for (Eigen::Index k = 0; k < K; ++k) {
    if (counts[static_cast<std::size_t>(k)] < 2) {
      throw InvalidArgument("LDA needs at least two samples of class " +
                            std::to_string(k + 1));
    }
    means.row(k) /= static_cast<double>(counts[static_cast<std::size_t>(k)]);
  }
  // Within-class scatter per class, then pooled in class order.
  std::vector<Matrix> within(static_cast<std::size_t>(K), Matrix::Zero(d, d));
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    const Vector diff = (features.row(i) - means.row(y)).transpose();
    within[static_cast<std::size_t>(y)].noalias() += diff * diff.transpose();
  }
  Matrix scatter = Matrix::Zero(d, d);
  for (const auto& w : within) scatter += w;
  const double n = static_cast<double>(features.rows());

  LdaModel model;
  model.means = std::move(means);
  model.pooled_covariance = regularize_covariance(scatter / n, epsilon);
  model.log_priors.resize(K);
  for (Eigen::Index k = 0; k < K; ++k) {
    model.log_priors(k) = std::log(static_cast<double>(counts[static_cast<std::size_t>(k)]) / n);
  }
  const Eigen::LLT<Matrix> llt(model.pooled_covariance);
  model.coefficients = llt.solve(model.means.transpose());
  model.intercepts.resize(K);
  for (Eigen::Index k = 0; k < K; ++k) {
    model.intercepts(k) = -0.5 * model.means.row(k).dot(model.coefficients.col(k)) +
                          model.log_priors(k);
  }
  return model;
}

LdaPrediction lda_predict(const LdaModel& model, const Eigen::Ref<const Vector>& x) {
  if (x.size() != model.means.cols()) {
    throw DimensionError(static_cast<std::size_t>(model.means.cols()),
                         static_cast<std::size_t>(x.size()));
  }
  LdaPrediction p;
  p.scores = model.coefficients.transpose() * x + model.intercepts;
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < p.scores.size(); ++k) {
    if (p.scores(k) > p.scores(best)) best = k;
  }
  p.label = static_cast<int>(best);
  return p;
}

Vector lda_posteriors(const LdaModel& model, const Eigen::Ref<const Vector>& x) {
  Vector s = lda_predict(model, x).scores;
  s.array() -= s.maxCoeff();
  s = s.array().exp();
  return s / s.sum();
}

}  // namespace mbss
