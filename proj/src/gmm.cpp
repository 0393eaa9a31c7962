#include "mbss/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "mbss/error.hpp"

namespace mbss {
namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // log(2 pi)

double log_sum_exp(const Eigen::Ref<const Eigen::RowVectorXd>& terms) {
  const double top = terms.maxCoeff();
  if (!std::isfinite(top)) return top;
  double sum = 0.0;
  for (Eigen::Index k = 0; k < terms.size(); ++k) sum += std::exp(terms(k) - top);
  return top + std::log(sum);
}

// log pi_k + log f_k(x_j) for every row and component.
Matrix log_joint(const MixtureModel& model, const Matrix& X) {
  if (X.rows() > 0 && static_cast<std::size_t>(X.cols()) != model.dim()) {
    throw DimensionError(model.dim(), static_cast<std::size_t>(X.cols()));
  }
  Matrix joint(X.rows(), model.num_components());
  for (int k = 0; k < model.num_components(); ++k) {
    joint.col(k) = log_densities(model.component(k), X).array() +
                   std::log(model.weights()(k));
  }
  return joint;
}

void check_labels(std::span<const int> labels, int K, const char* what) {
  for (int y : labels) {
    if (y < 0 || y >= K) {
      throw InvalidArgument(std::string(what) + " label " + std::to_string(y + 1) +
                            " outside 1.." + std::to_string(K));
    }
  }
}

}  // namespace

std::string_view to_string(CovarianceFamily family) {
  switch (family) {
    case CovarianceFamily::EII: return "EII";
    case CovarianceFamily::VII: return "VII";
    case CovarianceFamily::EEI: return "EEI";
    case CovarianceFamily::VVI: return "VVI";
    case CovarianceFamily::EEE: return "EEE";
    case CovarianceFamily::VVV: return "VVV";
  }
  return "?";
}

CovarianceFamily parse_family(std::string_view tag) {
  for (auto f : kAllFamilies) {
    if (to_string(f) == tag) return f;
  }
  throw InvalidArgument("unknown covariance family '" + std::string(tag) +
                        "' (expected EII, VII, EEI, VVI, EEE or VVV)");
}

std::vector<CovarianceFamily> parse_family_list(std::string_view tags) {
  std::vector<CovarianceFamily> out;
  std::size_t start = 0;
  while (start <= tags.size()) {
    const std::size_t comma = std::min(tags.find(',', start), tags.size());
    auto tag = tags.substr(start, comma - start);
    while (!tag.empty() && tag.front() == ' ') tag.remove_prefix(1);
    while (!tag.empty() && tag.back() == ' ') tag.remove_suffix(1);
    if (!tag.empty()) {
      const auto f = parse_family(tag);
      if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
    }
    start = comma + 1;
  }
  if (out.empty()) throw InvalidArgument("empty covariance family list");
  return out;
}

bool is_shared(CovarianceFamily family) {
  return family == CovarianceFamily::EII || family == CovarianceFamily::EEI ||
         family == CovarianceFamily::EEE;
}

bool is_spherical(CovarianceFamily family) {
  return family == CovarianceFamily::EII || family == CovarianceFamily::VII;
}

bool is_diagonal(CovarianceFamily family) {
  return is_spherical(family) || family == CovarianceFamily::EEI ||
         family == CovarianceFamily::VVI;
}

Matrix regularize_covariance(const Matrix& cov, double epsilon) {
  if (cov.rows() != cov.cols() || cov.rows() == 0) {
    throw InvalidArgument("covariance must be a non-empty square matrix");
  }
  if (!(epsilon > 0.0)) throw InvalidArgument("regularization epsilon must be positive");
  if (!cov.allFinite()) throw NumericError("covariance has non-finite entries");
  const double d = static_cast<double>(cov.rows());
  double scale = cov.trace() / d;
  if (!(scale > 0.0)) scale = 1.0;
  for (double eps = epsilon; eps <= kMaxEpsilon * (1.0 + 1e-9); eps *= 10.0) {
    Matrix candidate = cov;
    candidate.diagonal().array() += eps * scale;
    Eigen::LLT<Matrix> llt(candidate);
    if (llt.info() == Eigen::Success) return candidate;
  }
  throw NumericError("covariance is not positive definite after regularization up to " +
                     std::to_string(kMaxEpsilon));
}

ComponentParams::ComponentParams(Vector mean, Matrix covariance)
    : mean_(std::move(mean)), covariance_(std::move(covariance)) {
  const auto d = mean_.size();
  if (d == 0) throw InvalidArgument("component dimension must be positive");
  if (covariance_.rows() != d || covariance_.cols() != d) {
    throw DimensionError(static_cast<std::size_t>(d),
                         static_cast<std::size_t>(covariance_.rows()));
  }
  const double tol = 1e-12 * std::max(1.0, covariance_.cwiseAbs().maxCoeff());
  if ((covariance_ - covariance_.transpose()).cwiseAbs().maxCoeff() > tol) {
    throw NumericError("covariance is not symmetric");
  }
  Eigen::LLT<Matrix> llt(covariance_);
  if (llt.info() != Eigen::Success) {
    throw NumericError("covariance is not positive definite");
  }
  cholesky_ = llt.matrixL();
  log_det_ = 2.0 * cholesky_.diagonal().array().log().sum();
}

bool conforms_to_family(CovarianceFamily family,
                        std::span<const ComponentParams> components, double tol) {
  if (components.empty()) return false;
  double scale = 0.0;
  for (const auto& c : components) {
    scale = std::max(scale, c.covariance().diagonal().cwiseAbs().maxCoeff());
  }
  const double limit = tol * std::max(scale, std::numeric_limits<double>::min());
  const Matrix& first = components.front().covariance();
  for (const auto& c : components) {
    const Matrix& S = c.covariance();
    if (S.rows() != first.rows()) return false;
    if (is_diagonal(family)) {
      Matrix off = S;
      off.diagonal().setZero();
      if (off.cwiseAbs().maxCoeff() > limit) return false;
    }
    if (is_spherical(family)) {
      const auto diag = S.diagonal();
      if (diag.maxCoeff() - diag.minCoeff() > limit) return false;
    }
    if (is_shared(family) && (S - first).cwiseAbs().maxCoeff() > limit) {
      return false;
    }
  }
  return true;
}

MixtureModel::MixtureModel(CovarianceFamily family, Vector weights,
                           std::vector<ComponentParams> components)
    : family_(family), weights_(std::move(weights)), components_(std::move(components)) {
  if (components_.empty()) throw InvalidArgument("mixture needs at least one component");
  if (weights_.size() != static_cast<Eigen::Index>(components_.size())) {
    throw InvalidArgument("weight count does not match component count");
  }
  if ((weights_.array() < 0.0).any() || !weights_.allFinite()) {
    throw InvalidArgument("mixture weights must be nonnegative");
  }
  if (std::abs(weights_.sum() - 1.0) > 1e-12) {
    throw InvalidArgument("mixture weights must sum to 1");
  }
  for (const auto& c : components_) {
    if (c.dim() != components_.front().dim()) {
      throw DimensionError(components_.front().dim(), c.dim());
    }
  }
  if (!conforms_to_family(family_, components_)) {
    throw InvalidArgument("covariances do not conform to family " +
                          std::string(to_string(family_)));
  }
}

double log_density(const ComponentParams& component,
                   const Eigen::Ref<const Vector>& x) {
  if (static_cast<std::size_t>(x.size()) != component.dim()) {
    throw DimensionError(component.dim(), static_cast<std::size_t>(x.size()));
  }
  const Vector z = component.cholesky().triangularView<Eigen::Lower>().solve(
      x - component.mean());
  const double d = static_cast<double>(component.dim());
  return -0.5 * z.squaredNorm() - 0.5 * (d * kLog2Pi + component.log_det());
}

Vector log_densities(const ComponentParams& component, const Matrix& X) {
  if (X.rows() == 0) return Vector(0);
  if (static_cast<std::size_t>(X.cols()) != component.dim()) {
    throw DimensionError(component.dim(), static_cast<std::size_t>(X.cols()));
  }
  Matrix centered = (X.rowwise() - component.mean().transpose()).transpose();
  component.cholesky().triangularView<Eigen::Lower>().solveInPlace(centered);
  const double d = static_cast<double>(component.dim());
  const double constant = -0.5 * (d * kLog2Pi + component.log_det());
  return (-0.5 * centered.colwise().squaredNorm().transpose()).array() + constant;
}

Matrix log_responsibilities(const MixtureModel& model, const Matrix& X) {
  Matrix resp = log_joint(model, X);
  for (Eigen::Index j = 0; j < resp.rows(); ++j) {
    const double norm = log_sum_exp(resp.row(j));
    resp.row(j).array() -= norm;
  }
  return resp;
}

double complete_log_likelihood(const MixtureModel& model, const Dataset& dataset,
                               std::span<const int> hard_labels) {
  if (hard_labels.size() != dataset.m()) {
    throw InvalidArgument("hard label count " + std::to_string(hard_labels.size()) +
                          " does not match unlabeled row count " +
                          std::to_string(dataset.m()));
  }
  const int K = model.num_components();
  check_labels(dataset.labels(), K, "dataset");
  check_labels(hard_labels, K, "hard");
  const Matrix lab = log_joint(model, dataset.labeled());
  const Matrix unl = log_joint(model, dataset.unlabeled());
  double total = 0.0;
  for (Eigen::Index i = 0; i < lab.rows(); ++i) {
    total += lab(i, dataset.labels()[static_cast<std::size_t>(i)]);
  }
  for (Eigen::Index j = 0; j < unl.rows(); ++j) {
    total += unl(j, hard_labels[static_cast<std::size_t>(j)]);
  }
  return total;
}

double observed_log_likelihood(const MixtureModel& model, const Dataset& dataset) {
  check_labels(dataset.labels(), model.num_components(), "dataset");
  const Matrix lab = log_joint(model, dataset.labeled());
  const Matrix unl = log_joint(model, dataset.unlabeled());
  double total = 0.0;
  for (Eigen::Index i = 0; i < lab.rows(); ++i) {
    total += lab(i, dataset.labels()[static_cast<std::size_t>(i)]);
  }
  for (Eigen::Index j = 0; j < unl.rows(); ++j) total += log_sum_exp(unl.row(j));
  return total;
}

long long parameter_count(CovarianceFamily family, int K, int d) {
  if (K < 1 || d < 1) throw InvalidArgument("K and d must be positive");
  const long long k = K;
  const long long dd = d;
  long long cov = 0;
  switch (family) {
    case CovarianceFamily::EII: cov = 1; break;
    case CovarianceFamily::VII: cov = k; break;
    case CovarianceFamily::EEI: cov = dd; break;
    case CovarianceFamily::VVI: cov = k * dd; break;
    case CovarianceFamily::EEE: cov = dd * (dd + 1) / 2; break;
    case CovarianceFamily::VVV: cov = k * dd * (dd + 1) / 2; break;
  }
  return (k - 1) + k * dd + cov;
}

}  // namespace mbss
