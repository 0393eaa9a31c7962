#include <doctest.h>

#include <cmath>

#include "mbss/baselines.hpp"
#include "mbss/cem.hpp"
#include "mbss/error.hpp"
#include "oracles.hpp"

using namespace mbss;

namespace {

Matrix rows(std::initializer_list<std::initializer_list<double>> data) {
  Matrix out(static_cast<Eigen::Index>(data.size()),
             static_cast<Eigen::Index>(data.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : data) {
    Eigen::Index c = 0;
    for (double v : row) out(r, c++) = v;
    ++r;
  }
  return out;
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

/// Two Gaussian classes with a shared random covariance.
void two_class_instance(Rng& rng, Eigen::Index n, Eigen::Index d, Matrix& X, std::vector<int>& y) {
  const Matrix cov = oracle::random_spd(rng, d);
  const Matrix Lc = cov.llt().matrixL();
  const Vector shift = oracle::random_vector(rng, d, 1.5);
  X.resize(n, d);
  y.clear();
  for (Eigen::Index i = 0; i < n; ++i) {
    const int k = i < 2 ? static_cast<int>(i) : static_cast<int>(rng.index(2));
    X.row(i) = (Lc * oracle::random_vector(rng, d) + (k == 1 ? shift : Vector::Zero(d))).transpose();
    y.push_back(k);
  }
  // Make sure both classes have at least two members.
  y[2] = 0;
  y[3] = 1;
}

}  // namespace

TEST_CASE("kNN basics") {
  const Matrix X = rows({{0, 0}, {1, 0}, {0, 1}, {5, 5}, {6, 5}});
  const KnnModel one(X, {0, 0, 0, 1, 1}, 2, 1);
  CHECK(knn_predict(one, vec({5, 5})) == KnnOutcome{1});
  const KnnModel three(X, {0, 0, 1, 1, 1}, 2, 3);
  // Nearest three to the origin are labeled (1, 1, 2) in one-based terms.
  CHECK(knn_predict(three, vec({0, 0})) == KnnOutcome{0});
}

TEST_CASE("kNN includes every point tied at the k-th distance") {
  // Four points at distance 1 around the origin, balanced labels.
  const Matrix X = rows({{1, 0}, {-1, 0}, {0, 1}, {0, -1}});
  const KnnModel m(X, {0, 1, 0, 1}, 2, 3);
  const auto votes = knn_votes(m, vec({0, 0}));
  CHECK(votes == std::vector<int>{2, 2});
  CHECK(std::holds_alternative<AmbiguousTie>(knn_predict(m, vec({0, 0}))));
}

TEST_CASE("kNN with k = n returns the global majority") {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const auto n = static_cast<Eigen::Index>(3 + rng.index(10));
    const Matrix X = oracle::random_points(rng, n, 3);
    std::vector<int> y;
    std::vector<int> counts(3, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      y.push_back(static_cast<int>(rng.index(3)));
      ++counts[static_cast<std::size_t>(y.back())];
    }
    const KnnModel m(X, y, 3, static_cast<int>(n));
    const auto out = knn_predict(m, oracle::random_vector(rng, 3));
    const int top = *std::max_element(counts.begin(), counts.end());
    if (std::count(counts.begin(), counts.end(), top) > 1) {
      CHECK(std::holds_alternative<AmbiguousTie>(out));
    } else {
      CHECK(std::get<int>(out) == static_cast<int>(std::find(counts.begin(), counts.end(), top) - counts.begin()));
    }
  }
}

TEST_CASE("kNN validation") {
  const Matrix X = rows({{0}, {1}});
  CHECK_THROWS_AS(KnnModel(Matrix(0, 1), {}, 2, 1), InvalidArgument);
  CHECK_THROWS_AS(KnnModel(X, {0, 1}, 2, 3), InvalidArgument);
  CHECK_THROWS_AS(KnnModel(X, {0, 1}, 2, 0), InvalidArgument);
  CHECK_THROWS_AS(KnnModel(X, {0, 2}, 2, 1), InvalidArgument);
  const KnnModel m(X, {0, 1}, 2, 1);
  CHECK_THROWS_AS(knn_votes(m, vec({1, 2})), DimensionError);
}

TEST_CASE("LDA perpendicular bisector") {
  // Identity pooled covariance, means (0,0) and (2,0), equal priors.
  const Matrix X = rows({{-1, 0}, {1, 0}, {0, 1}, {0, -1}, {1, 0}, {3, 0}, {2, 1}, {2, -1}});
  const std::vector<int> y{0, 0, 0, 0, 1, 1, 1, 1};
  const LdaModel m = lda_fit(X, y, 2);
  CHECK(lda_predict(m, vec({0.9, 5})).label == 0);
  CHECK(lda_predict(m, vec({1.1, -5})).label == 1);
}

TEST_CASE("LDA with equal means follows the prior") {
  const Matrix X = rows({{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, -1}, {1, -1}, {-1, 1}, {1, 0}, {-1, 0}});
  const std::vector<int> y{0, 0, 0, 0, 0, 0, 0, 0, 1, 1};
  const LdaModel m = lda_fit(X, y, 2);
  Rng rng(2);
  for (int i = 0; i < 20; ++i) {
    CHECK(lda_predict(m, oracle::random_vector(rng, 2, 3.0)).label == 0);
  }
}

TEST_CASE("LDA agrees with the plug-in Bayes rule") {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix X;
    std::vector<int> y;
    two_class_instance(rng, 200, 4, X, y);
    const LdaModel m = lda_fit(X, y, 2);
    const Matrix T = oracle::random_points(rng, 50, 4, 2.0);
    for (Eigen::Index i = 0; i < T.rows(); ++i) {
      const Vector x = T.row(i).transpose();
      double best = -1.0;
      int label = 0;
      for (int k = 0; k < 2; ++k) {
        const double p = std::exp(m.log_priors(k)) *
                         oracle::density(x, m.means.row(k).transpose(), m.pooled_covariance);
        if (p > best) {
          best = p;
          label = k;
        }
      }
      CHECK(lda_predict(m, x).label == label);
      const Vector post = lda_posteriors(m, x);
      CHECK(std::abs(post.sum() - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("LDA decisions are invariant to shifting every feature") {
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix X;
    std::vector<int> y;
    two_class_instance(rng, 100, 3, X, y);
    const Vector shift = (Vector(3) << 1.0, -2.0, 0.5).finished();
    const Matrix Xs = X.rowwise() + shift.transpose();
    const LdaModel a = lda_fit(X, y, 2);
    const LdaModel b = lda_fit(Xs, y, 2);
    const Matrix T = oracle::random_points(rng, 40, 3, 2.0);
    for (Eigen::Index i = 0; i < T.rows(); ++i) {
      const Vector x = T.row(i).transpose();
      CHECK(lda_predict(a, x).label == lda_predict(b, x + shift).label);
    }
  }
}

TEST_CASE("LDA equals the EEE mixture initialized on labeled data") {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix X;
    std::vector<int> y;
    two_class_instance(rng, 120, 3, X, y);
    const Dataset ds(X, y, Matrix(0, 3), 2, ApiVocabulary::numbered(3));
    CemConfig c;
    c.family = CovarianceFamily::EEE;
    const MixtureModel init = initialize(ds, c);
    const LdaModel lda = lda_fit(X, y, 2);
    CHECK(lda.pooled_covariance == init.component(0).covariance());
    const Matrix T = oracle::random_points(rng, 100, 3, 2.0);
    const Prediction p = predict(init, T);
    for (Eigen::Index i = 0; i < T.rows(); ++i) {
      CHECK(lda_predict(lda, T.row(i).transpose()).label == p.labels[static_cast<std::size_t>(i)]);
    }
  }
}

TEST_CASE("LDA validation") {
  CHECK_THROWS_AS(lda_fit(rows({{0}, {1}, {2}}), std::vector<int>{0, 0, 1}, 2), InvalidArgument);
  const LdaModel m = lda_fit(rows({{0}, {1}, {2}, {3}}), std::vector<int>{0, 0, 1, 1}, 2);
  CHECK_THROWS_AS(lda_predict(m, vec({1, 2})), DimensionError);
}
