#pragma once

// Gaussian mixture models under constrained covariance families.
//
// Every density is evaluated in log space through a Cholesky factor; an
// explicit inverse or determinant is never formed.

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "mbss/dataset.hpp"

namespace mbss {

/// Covariance parameterizations Sigma_k = lambda_k D_k A_k D_k^T.
///   EII  lambda I            VII  lambda_k I
///   EEI  lambda A (shared)    VVI  lambda_k A_k
///   EEE  shared full          VVV  unconstrained per component
enum class CovarianceFamily { EII, VII, EEI, VVI, EEE, VVV };

inline constexpr std::array<CovarianceFamily, 6> kAllFamilies = {
    CovarianceFamily::EII, CovarianceFamily::VII, CovarianceFamily::EEI,
    CovarianceFamily::VVI, CovarianceFamily::EEE, CovarianceFamily::VVV};

std::string_view to_string(CovarianceFamily family);
/// Throws InvalidArgument for an unknown tag.
CovarianceFamily parse_family(std::string_view tag);
/// Comma-separated list of tags, e.g. "EII,VVV".
std::vector<CovarianceFamily> parse_family_list(std::string_view tags);

/// One covariance matrix shared by all components.
bool is_shared(CovarianceFamily family);
bool is_spherical(CovarianceFamily family);
bool is_diagonal(CovarianceFamily family);

inline constexpr double kDefaultEpsilon = 1e-6;
inline constexpr double kMaxEpsilon = 1e-2;

/// Adds epsilon * trace(cov)/d to the diagonal. If the result is not
/// positive definite epsilon is raised tenfold up to kMaxEpsilon, after
/// which NumericError is thrown. A zero-trace matrix uses a unit scale.
Matrix regularize_covariance(const Matrix& cov, double epsilon = kDefaultEpsilon);

/// Mean and covariance of one Gaussian component with its cached lower
/// Cholesky factor and log-determinant.
class ComponentParams {
 public:
  /// Throws NumericError if the covariance is not symmetric positive
  /// definite, DimensionError if sizes disagree.
  ComponentParams(Vector mean, Matrix covariance);

  const Vector& mean() const { return mean_; }
  const Matrix& covariance() const { return covariance_; }
  const Matrix& cholesky() const { return cholesky_; }
  double log_det() const { return log_det_; }
  std::size_t dim() const { return static_cast<std::size_t>(mean_.size()); }

 private:
  Vector mean_;
  Matrix covariance_;
  Matrix cholesky_;
  double log_det_ = 0.0;
};

class MixtureModel {
 public:
  /// Validates weights (nonnegative, sum to one within 1e-12), dimensions,
  /// and that the covariances conform to the family within 1e-8.
  MixtureModel(CovarianceFamily family, Vector weights,
               std::vector<ComponentParams> components);

  CovarianceFamily family() const { return family_; }
  const Vector& weights() const { return weights_; }
  const std::vector<ComponentParams>& components() const { return components_; }
  const ComponentParams& component(int k) const {
    return components_[static_cast<std::size_t>(k)];
  }
  int num_components() const { return static_cast<int>(components_.size()); }
  std::size_t dim() const { return components_.front().dim(); }

 private:
  CovarianceFamily family_;
  Vector weights_;
  std::vector<ComponentParams> components_;
};

/// True when every covariance satisfies the family constraint within tol
/// (relative to the largest diagonal entry).
bool conforms_to_family(CovarianceFamily family,
                        std::span<const ComponentParams> components,
                        double tol = 1e-8);

/// log N(x; mean, cov).
double log_density(const ComponentParams& component,
                   const Eigen::Ref<const Vector>& x);
/// log N(x_i; mean, cov) for every row of X.
Vector log_densities(const ComponentParams& component, const Matrix& X);

/// Row j, column k: log pi_k + log f_k(x_j) - logsumexp over k'.
Matrix log_responsibilities(const MixtureModel& model, const Matrix& X);

/// Complete-data log-likelihood: labeled rows under their true class plus
/// unlabeled rows under hard_labels.
double complete_log_likelihood(const MixtureModel& model, const Dataset& dataset,
                               std::span<const int> hard_labels);

/// Labeled rows under their true class plus the mixture log-density of each
/// unlabeled row.
double observed_log_likelihood(const MixtureModel& model, const Dataset& dataset);

/// (K-1) mixing weights + K*d means + covariance parameters of the family.
long long parameter_count(CovarianceFamily family, int K, int d);

/// Structured JSON text. Doubles are written in shortest round-trip form,
/// so save/load is lossless.
void save_model(const MixtureModel& model, std::ostream& out);
MixtureModel load_model(std::istream& in);
void save_model(const MixtureModel& model, const std::filesystem::path& path);
MixtureModel load_model(const std::filesystem::path& path);

}  // namespace mbss
