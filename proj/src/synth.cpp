#include "mbss/synth.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "mbss/error.hpp"
#include "mbss/rng.hpp"

namespace mbss {

void SynthSpec::validate() const {
  const auto K = weights.size();
  if (K == 0) throw InvalidArgument("synthetic spec needs at least one component");
  if (means.size() != K || covariances.size() != K) {
    throw InvalidArgument("synthetic spec: weights, means and covariances differ in length");
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw InvalidArgument("synthetic weights must be nonnegative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw InvalidArgument("synthetic weights must sum to 1");
  const auto d = means.front().size();
  if (d == 0) throw InvalidArgument("synthetic dimension must be positive");
  for (std::size_t k = 0; k < K; ++k) {
    if (means[k].size() != d || covariances[k].rows() != d || covariances[k].cols() != d) {
      throw InvalidArgument("synthetic component " + std::to_string(k + 1) +
                            " has inconsistent dimensions");
    }
  }
  if (!(label_fraction > 0.0 && label_fraction <= 1.0)) {
    throw InvalidArgument("label fraction must be in (0, 1]");
  }
}

MixtureDraws draw_mixture(const SynthSpec& spec) {
  spec.validate();
  const auto d = static_cast<Eigen::Index>(spec.dim());
  std::vector<Matrix> factors;
  for (const auto& cov : spec.covariances) {
    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() != Eigen::Success) {
      throw InvalidArgument("synthetic covariance is not positive definite");
    }
    factors.push_back(llt.matrixL());
  }
  std::vector<double> cumulative(spec.weights.size());
  std::partial_sum(spec.weights.begin(), spec.weights.end(), cumulative.begin());

  Rng rng(spec.seed);
  MixtureDraws draws;
  draws.features.resize(static_cast<Eigen::Index>(spec.size), d);
  draws.components.resize(spec.size);
  Vector z(d);
  for (std::size_t i = 0; i < spec.size; ++i) {
    const double u = rng.uniform() * cumulative.back();
    int k = 0;
    while (k + 1 < spec.num_components() &&
           (u >= cumulative[static_cast<std::size_t>(k)] ||
            spec.weights[static_cast<std::size_t>(k)] == 0.0)) {
      ++k;
    }
    for (Eigen::Index c = 0; c < d; ++c) z(c) = rng.normal();
    const auto ku = static_cast<std::size_t>(k);
    draws.features.row(static_cast<Eigen::Index>(i)) =
        (spec.means[ku] + factors[ku] * z).transpose();
    draws.components[i] = k;
  }
  return draws;
}

SynthSample sample_mixture(const SynthSpec& spec) {
  MixtureDraws draws = draw_mixture(spec);
  const std::size_t N = spec.size;
  const auto n_labeled = static_cast<std::size_t>(
      std::llround(spec.label_fraction * static_cast<double>(N)));

  // Separate stream so the labeled split does not perturb the draws.
  Rng rng(spec.seed ^ 0x9E3779B97F4A7C15ULL);
  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<bool> is_labeled(N, false);
  for (std::size_t i = 0; i < n_labeled; ++i) is_labeled[order[i]] = true;

  const auto d = draws.features.cols();
  Matrix labeled(static_cast<Eigen::Index>(n_labeled), d);
  Matrix unlabeled(static_cast<Eigen::Index>(N - n_labeled), d);
  std::vector<int> labels;
  std::vector<int> unlabeled_truth;
  std::vector<std::size_t> lab_rows;
  std::vector<std::size_t> unl_rows;
  for (std::size_t i = 0; i < N; ++i) {
    const auto row = draws.features.row(static_cast<Eigen::Index>(i));
    if (is_labeled[i]) {
      labeled.row(static_cast<Eigen::Index>(labels.size())) = row;
      labels.push_back(draws.components[i]);
      lab_rows.push_back(i);
    } else {
      unlabeled.row(static_cast<Eigen::Index>(unlabeled_truth.size())) = row;
      unlabeled_truth.push_back(draws.components[i]);
      unl_rows.push_back(i);
    }
  }
  Dataset dataset(std::move(labeled), std::move(labels), std::move(unlabeled),
                  spec.num_components(), ApiVocabulary::numbered(spec.dim()),
                  std::move(lab_rows), std::move(unl_rows));
  return SynthSample{std::move(dataset), std::move(unlabeled_truth),
                     std::move(draws.components)};
}

Matrix binarize(const Matrix& features, double threshold) {
  return (features.array() > threshold).cast<double>().matrix();
}

SynthSpec two_class_spec(std::size_t d, double separation, std::size_t size,
                         double label_fraction, std::uint64_t seed, double rho,
                         double second_weight) {
  if (d == 0) throw InvalidArgument("dimension must be positive");
  const auto dd = static_cast<Eigen::Index>(d);
  SynthSpec spec;
  spec.weights = {1.0 - second_weight, second_weight};
  const Vector direction = Vector::Ones(dd) / std::sqrt(static_cast<double>(d));
  spec.means = {Vector::Zero(dd), separation * direction};
  Matrix cov = Matrix::Constant(dd, dd, rho);
  cov.diagonal().setOnes();
  spec.covariances = {cov, cov};
  spec.size = size;
  spec.label_fraction = label_fraction;
  spec.seed = seed;
  return spec;
}

}  // namespace mbss
