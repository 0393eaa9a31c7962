#include "mbss/cem.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "mbss/error.hpp"

namespace mbss {
namespace {

// Sufficient statistics of one component, accumulated over rows in
// canonical order: labeled rows ascending, then unlabeled rows ascending.
struct ComponentStats {
  std::size_t count = 0;
  Vector mean;
  Matrix scatter;     // full W_k, only for EEE/VVV
  Vector sq_dev;      // diag(W_k), for the diagonal families
};

template <class Visit>
void for_each_assigned(const Dataset& dataset, std::span<const int> hard_labels,
                       Visit&& visit) {
  const Matrix& L = dataset.labeled();
  const Matrix& U = dataset.unlabeled();
  for (Eigen::Index i = 0; i < L.rows(); ++i) {
    visit(dataset.labels()[static_cast<std::size_t>(i)], L.row(i));
  }
  for (Eigen::Index j = 0; j < U.rows(); ++j) {
    visit(hard_labels[static_cast<std::size_t>(j)], U.row(j));
  }
}

std::vector<ComponentStats> accumulate(const Dataset& dataset,
                                       std::span<const int> hard_labels, int K,
                                       CovarianceFamily family) {
  const auto d = static_cast<Eigen::Index>(dataset.dim());
  std::vector<ComponentStats> stats(static_cast<std::size_t>(K));
  for (auto& s : stats) {
    s.mean = Vector::Zero(d);
    s.sq_dev = Vector::Zero(d);
    if (!is_diagonal(family)) s.scatter = Matrix::Zero(d, d);
  }
  for_each_assigned(dataset, hard_labels, [&](int k, const auto& x) {
    auto& s = stats[static_cast<std::size_t>(k)];
    ++s.count;
    s.mean += x.transpose();
  });
  for (auto& s : stats) {
    if (s.count > 0) s.mean /= static_cast<double>(s.count);
  }
  for_each_assigned(dataset, hard_labels, [&](int k, const auto& x) {
    auto& s = stats[static_cast<std::size_t>(k)];
    const Vector diff = x.transpose() - s.mean;
    if (is_diagonal(family)) {
      s.sq_dev += diff.cwiseAbs2();
    } else {
      s.scatter.noalias() += diff * diff.transpose();
    }
  });
  return stats;
}

}  // namespace

void CemConfig::validate() const {
  if (!(tolerance > 0.0) || !std::isfinite(tolerance)) {
    throw InvalidArgument("tolerance must be positive");
  }
  if (max_iterations < 1) throw InvalidArgument("max_iterations must be at least 1");
  if (!(epsilon > 0.0) || epsilon > kMaxEpsilon) {
    throw InvalidArgument("regularization epsilon must be in (0, 1e-2]");
  }
}

MixtureModel estimate_parameters(const Dataset& dataset,
                                 std::span<const int> hard_labels,
                                 CovarianceFamily family, double epsilon,
                                 const MixtureModel* previous) {
  const int K = dataset.num_classes();
  if (hard_labels.size() != dataset.m()) {
    throw InvalidArgument("hard label count does not match unlabeled rows");
  }
  for (int y : hard_labels) {
    if (y < 0 || y >= K) throw InvalidArgument("hard label out of range");
  }
  if (previous && (previous->num_components() != K || previous->dim() != dataset.dim())) {
    throw InvalidArgument("previous model does not match the dataset");
  }
  const auto d = static_cast<Eigen::Index>(dataset.dim());
  const double total = static_cast<double>(dataset.n() + dataset.m());
  const auto stats = accumulate(dataset, hard_labels, K, family);

  Vector weights(K);
  std::vector<Vector> means;
  bool any_empty = false;
  for (int k = 0; k < K; ++k) {
    const auto& s = stats[static_cast<std::size_t>(k)];
    if (s.count == 0) {
      if (!previous) {
        throw InvalidArgument("component " + std::to_string(k + 1) +
                              " has no members");
      }
      any_empty = true;
      weights(k) = 1.0 / total;
      means.push_back(previous->component(k).mean());
    } else {
      weights(k) = static_cast<double>(s.count) / total;
      means.push_back(s.mean);
    }
  }
  if (any_empty) weights /= weights.sum();

  // Per-component raw covariance estimates (before regularization).
  std::vector<Matrix> covs(static_cast<std::size_t>(K));
  if (is_shared(family)) {
    Matrix pooled = Matrix::Zero(d, d);
    if (family == CovarianceFamily::EEE) {
      for (const auto& s : stats) pooled += s.scatter;
      pooled /= total;
    } else {
      Vector diag = Vector::Zero(d);
      for (const auto& s : stats) diag += s.sq_dev;
      if (family == CovarianceFamily::EII) {
        pooled.diagonal().setConstant(diag.sum() / (static_cast<double>(d) * total));
      } else {
        pooled.diagonal() = diag / total;
      }
    }
    const Matrix shared = regularize_covariance(pooled, epsilon);
    for (auto& c : covs) c = shared;
  } else {
    for (int k = 0; k < K; ++k) {
      const auto& s = stats[static_cast<std::size_t>(k)];
      auto& cov = covs[static_cast<std::size_t>(k)];
      if (s.count == 0) {
        cov = previous->component(k).covariance();
        continue;
      }
      const double nk = static_cast<double>(s.count);
      Matrix raw = Matrix::Zero(d, d);
      switch (family) {
        case CovarianceFamily::VII:
          raw.diagonal().setConstant(s.sq_dev.sum() / (static_cast<double>(d) * nk));
          break;
        case CovarianceFamily::VVI:
          raw.diagonal() = s.sq_dev / nk;
          break;
        default:
          raw = s.scatter / nk;
          break;
      }
      cov = regularize_covariance(raw, epsilon);
    }
  }

  std::vector<ComponentParams> components;
  components.reserve(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    components.emplace_back(std::move(means[static_cast<std::size_t>(k)]),
                            std::move(covs[static_cast<std::size_t>(k)]));
  }
  return MixtureModel(family, std::move(weights), std::move(components));
}

MixtureModel initialize(const Dataset& dataset, const CemConfig& config) {
  config.validate();
  const auto counts = dataset.class_counts();
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] < 2) {
      throw InvalidArgument("class " + std::to_string(k + 1) + " has " +
                            std::to_string(counts[k]) +
                            " labeled samples; at least 2 are required");
    }
  }
  const Dataset labeled_only = dataset.with_unlabeled(Matrix(0, static_cast<Eigen::Index>(dataset.dim())));
  return estimate_parameters(labeled_only, {}, config.family, config.epsilon);
}

Matrix e_step(const MixtureModel& model, const Matrix& unlabeled) {
  if (unlabeled.rows() == 0) return Matrix(0, model.num_components());
  return log_responsibilities(model, unlabeled).array().exp().matrix();
}

std::vector<int> hard_assign(const Matrix& posteriors) {
  std::vector<int> labels(static_cast<std::size_t>(posteriors.rows()), 0);
  for (Eigen::Index j = 0; j < posteriors.rows(); ++j) {
    int best = 0;
    for (Eigen::Index k = 1; k < posteriors.cols(); ++k) {
      if (posteriors(j, k) > posteriors(j, best)) best = static_cast<int>(k);
    }
    labels[static_cast<std::size_t>(j)] = best;
  }
  return labels;
}

MixtureModel cm_step(const Dataset& dataset, const Matrix& posteriors,
                     CovarianceFamily family, double epsilon,
                     const MixtureModel* previous) {
  if (static_cast<std::size_t>(posteriors.rows()) != dataset.m() ||
      (posteriors.rows() > 0 && posteriors.cols() != dataset.num_classes())) {
    throw InvalidArgument("posterior matrix must be m x K");
  }
  const auto labels = hard_assign(posteriors);
  return estimate_parameters(dataset, labels, family, epsilon, previous);
}

bool has_converged(std::span<const double> trace, double tolerance,
                   StoppingRule rule) {
  const std::size_t g = trace.size();
  if (g < 2) return false;
  const double latest = trace[g - 1];
  const double current = trace[g - 2];
  const double step = latest - current;
  if (rule == StoppingRule::aitken && g >= 3) {
    const double previous_step = current - trace[g - 3];
    if (previous_step != 0.0) {
      const double a = step / previous_step;
      if (a < 1.0) {
        const double asymptote = current + step / (1.0 - a);
        return std::abs(asymptote - current) < tolerance;
      }
    }
  }
  return std::abs(step) < tolerance;
}

FitResult fit(const Dataset& dataset, const CemConfig& config) {
  MixtureModel model = initialize(dataset, config);
  FitResult result{model, 0, {}, {}, false, {}, {}};
  std::vector<int> labels;
  for (int g = 1; g <= config.max_iterations; ++g) {
    const auto next = hard_assign(e_step(model, dataset.unlabeled()));
    std::size_t changed = next.size();
    if (!labels.empty() || next.empty()) {
      changed = 0;
      for (std::size_t j = 0; j < next.size(); ++j) changed += next[j] != labels[j];
    }
    labels = next;
    model = estimate_parameters(dataset, labels, config.family, config.epsilon, &model);

    const double lc = complete_log_likelihood(model, dataset, labels);
    result.loglik_trace.push_back(lc);
    result.history.push_back({g, lc, observed_log_likelihood(model, dataset), changed});
    result.iterations = g;
    if (has_converged(result.loglik_trace, config.tolerance, config.stopping)) {
      result.converged = true;
      break;
    }
  }
  result.posteriors = e_step(model, dataset.unlabeled());
  result.hard_labels = hard_assign(result.posteriors);
  result.model = std::move(model);
  return result;
}

Prediction predict(const MixtureModel& model, const Matrix& X) {
  Prediction p;
  p.posteriors = e_step(model, X);
  p.labels = hard_assign(p.posteriors);
  return p;
}

void write_trace_csv(const FitResult& result, std::ostream& out) {
  out << "iteration,complete_loglik,observed_loglik,n_changed_labels\n";
  char buf[64];
  for (const auto& r : result.history) {
    out << r.iteration << ',';
    std::snprintf(buf, sizeof buf, "%.17g", r.complete_loglik);
    out << buf << ',';
    std::snprintf(buf, sizeof buf, "%.17g", r.observed_loglik);
    out << buf << ',' << r.changed_labels << '\n';
  }
}

}  // namespace mbss
