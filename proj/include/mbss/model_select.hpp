#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mbss/cem.hpp"

namespace mbss {

/// 2 * loglik - ln(n_obs) * n_params. Larger is better.
double bic(double loglik, std::size_t n_obs, long long n_params);

struct ModelScore {
  CovarianceFamily family = CovarianceFamily::EII;
  bool failed = false;
  std::string failure;
  /// Complete-data log-likelihood at convergence and its BIC.
  double loglik = 0.0;
  double bic = 0.0;
  /// Observed-data counterparts, reported for diagnostics only.
  double observed_loglik = 0.0;
  double observed_bic = 0.0;
  long long param_count = 0;
  std::optional<FitResult> fit;
};

struct Selection {
  std::size_t best_index = 0;
  std::vector<ModelScore> all;

  const ModelScore& best() const { return all[best_index]; }
};

/// Fits every family with CEM and keeps the maximum-BIC model. Ties go to
/// fewer parameters, then to the earlier family in the list. Families whose
/// fit throws are recorded as failed; if all fail the last error is rethrown.
Selection select_model(const Dataset& dataset,
                       std::span<const CovarianceFamily> families,
                       const CemConfig& config);

/// family,converged,iterations,loglik,params,bic,observed_bic,selected
void write_selection_csv(const Selection& selection, std::ostream& out);

}  // namespace mbss
