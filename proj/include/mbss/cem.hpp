#pragma once

// Conditional expectation-maximization for semi-supervised Gaussian
// mixtures. Labeled rows always keep their true class; unlabeled rows are
// hard-assigned to their maximum-posterior component in every CM-step.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "mbss/dataset.hpp"
#include "mbss/gmm.hpp"

namespace mbss {

enum class StoppingRule {
  /// Stop when the Aitken-accelerated asymptotic log-likelihood is within
  /// tolerance of the current value.
  aitken,
  /// Stop when consecutive log-likelihoods differ by less than tolerance.
  delta_loglik,
};

struct CemConfig {
  CovarianceFamily family = CovarianceFamily::EII;
  double tolerance = 1e-5;
  int max_iterations = 1000;
  double epsilon = kDefaultEpsilon;
  /// Recorded for provenance. The fit itself draws no random numbers.
  std::uint64_t seed = 0;
  StoppingRule stopping = StoppingRule::aitken;

  /// Throws InvalidArgument unless tolerance > 0, max_iterations >= 1 and
  /// 0 < epsilon <= kMaxEpsilon.
  void validate() const;
};

struct IterationRecord {
  int iteration = 0;
  double complete_loglik = 0.0;
  double observed_loglik = 0.0;
  std::size_t changed_labels = 0;
};

struct FitResult {
  MixtureModel model;
  int iterations = 0;
  /// Complete-data log-likelihood after each CM-step.
  std::vector<double> loglik_trace;
  std::vector<IterationRecord> history;
  bool converged = false;
  /// Posteriors of the unlabeled rows under the final model (m x K).
  Matrix posteriors;
  /// Row argmax of posteriors, lowest index on ties.
  std::vector<int> hard_labels;
};

/// Discriminant-analysis estimates from the labeled rows only.
/// Throws InvalidArgument if a class has fewer than two labeled rows.
MixtureModel initialize(const Dataset& dataset, const CemConfig& config);

/// Posterior membership probabilities of each unlabeled row.
Matrix e_step(const MixtureModel& model, const Matrix& unlabeled);

/// Row-wise argmax; ties go to the lowest class index.
std::vector<int> hard_assign(const Matrix& posteriors);

/// Closed-form family-constrained estimates from labeled rows with their
/// true labels plus unlabeled rows with the given hard labels. A component
/// with no members keeps the mean (and, for per-component families, the
/// covariance) of `previous` and gets weight 1/(n+m) before renormalizing;
/// without `previous` an empty component is an InvalidArgument.
MixtureModel estimate_parameters(const Dataset& dataset,
                                 std::span<const int> hard_labels,
                                 CovarianceFamily family, double epsilon,
                                 const MixtureModel* previous = nullptr);

/// Hard-assigns the posteriors, then estimates parameters.
MixtureModel cm_step(const Dataset& dataset, const Matrix& posteriors,
                     CovarianceFamily family, double epsilon = kDefaultEpsilon,
                     const MixtureModel* previous = nullptr);

FitResult fit(const Dataset& dataset, const CemConfig& config);

struct Prediction {
  std::vector<int> labels;
  Matrix posteriors;
};

Prediction predict(const MixtureModel& model, const Matrix& X);

/// Aitken stopping test on the last three values of a trace (falls back to
/// the absolute difference of the last two values). Returns false for
/// fewer than two values.
bool has_converged(std::span<const double> trace, double tolerance,
                   StoppingRule rule);

/// iteration,complete_loglik,observed_loglik,n_changed_labels
void write_trace_csv(const FitResult& result, std::ostream& out);

}  // namespace mbss
