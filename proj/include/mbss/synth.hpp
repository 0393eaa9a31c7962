#pragma once

// Seeded synthetic mixtures with known ground truth.

#include <cstdint>
#include <vector>

#include "mbss/dataset.hpp"
#include "mbss/gmm.hpp"

namespace mbss {

struct SynthSpec {
  std::vector<double> weights;     // length K, sums to 1
  std::vector<Vector> means;       // K vectors of length d
  std::vector<Matrix> covariances; // K symmetric positive definite d x d
  std::size_t size = 0;            // total number of points
  double label_fraction = 1.0;     // in (0, 1]
  std::uint64_t seed = 0;

  int num_components() const { return static_cast<int>(weights.size()); }
  std::size_t dim() const { return means.empty() ? 0 : static_cast<std::size_t>(means.front().size()); }
  /// Throws InvalidArgument when the spec is inconsistent.
  void validate() const;
};

struct MixtureDraws {
  Matrix features;
  std::vector<int> components;
};

/// Draws `size` points: a component by the weights, then a Gaussian draw
/// mean + L z with L the Cholesky factor. One random stream per seed.
MixtureDraws draw_mixture(const SynthSpec& spec);

struct SynthSample {
  Dataset dataset;
  /// True components of the unlabeled rows, in unlabeled-row order.
  std::vector<int> unlabeled_truth;
  /// True components of every point in CSV row order.
  std::vector<int> truth;
};

/// draw_mixture followed by a uniformly random labeled subset of
/// round(label_fraction * size) points. Throws DataError if a class ends up
/// without labeled rows.
SynthSample sample_mixture(const SynthSpec& spec);

/// Elementwise indicator of value > threshold.
Matrix binarize(const Matrix& features, double threshold);

/// Two-class preset used by tests and the CLI: class means 0 and
/// separation * (1,...,1)/sqrt(d); covariance of the given family shape
/// (spherical unit variance, or unit variances with correlation rho).
SynthSpec two_class_spec(std::size_t d, double separation, std::size_t size,
                         double label_fraction, std::uint64_t seed,
                         double rho = 0.0, double second_weight = 0.5);

}  // namespace mbss
