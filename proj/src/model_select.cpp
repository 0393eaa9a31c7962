#include "mbss/model_select.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <ostream>

#include "mbss/error.hpp"

namespace mbss {

double bic(double loglik, std::size_t n_obs, long long n_params) {
  if (n_obs < 1) throw InvalidArgument("BIC needs at least one observation");
  return 2.0 * loglik - std::log(static_cast<double>(n_obs)) * static_cast<double>(n_params);
}

Selection select_model(const Dataset& dataset,
                       std::span<const CovarianceFamily> families,
                       const CemConfig& config) {
  if (families.empty()) throw InvalidArgument("no candidate covariance families");
  config.validate();
  const std::size_t n_obs = dataset.n() + dataset.m();
  Selection selection;
  std::exception_ptr last_error;
  std::optional<std::size_t> best;

  for (auto family : families) {
    ModelScore score;
    score.family = family;
    score.param_count = parameter_count(family, dataset.num_classes(),
                                        static_cast<int>(dataset.dim()));
    CemConfig cfg = config;
    cfg.family = family;
    try {
      FitResult result = fit(dataset, cfg);
      score.loglik = result.loglik_trace.back();
      score.observed_loglik = result.history.back().observed_loglik;
      score.bic = bic(score.loglik, n_obs, score.param_count);
      score.observed_bic = bic(score.observed_loglik, n_obs, score.param_count);
      score.fit = std::move(result);
    } catch (const NumericError& e) {
      score.failed = true;
      score.failure = e.what();
      last_error = std::current_exception();
    }
    selection.all.push_back(std::move(score));

    const std::size_t idx = selection.all.size() - 1;
    const auto& s = selection.all[idx];
    if (s.failed || !std::isfinite(s.bic)) continue;
    if (!best) {
      best = idx;
      continue;
    }
    const auto& b = selection.all[*best];
    if (s.bic > b.bic || (s.bic == b.bic && s.param_count < b.param_count)) {
      best = idx;
    }
  }
  if (!best) {
    if (last_error) std::rethrow_exception(last_error);
    throw NumericError("no candidate family produced a finite BIC");
  }
  selection.best_index = *best;
  return selection;
}

void write_selection_csv(const Selection& selection, std::ostream& out) {
  out << "family,converged,iterations,loglik,params,bic,observed_bic,selected\n";
  char buf[64];
  const auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (std::size_t i = 0; i < selection.all.size(); ++i) {
    const auto& s = selection.all[i];
    out << to_string(s.family) << ',';
    if (s.failed) {
      out << "failed,0,,";
      out << s.param_count << ",,,0\n";
      continue;
    }
    out << (s.fit->converged ? "true" : "false") << ',' << s.fit->iterations << ','
        << num(s.loglik) << ',' << s.param_count << ',' << num(s.bic) << ','
        << num(s.observed_bic) << ',' << (i == selection.best_index ? 1 : 0) << '\n';
  }
}

}  // namespace mbss
