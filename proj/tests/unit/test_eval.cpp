#include <doctest.h>

#include <cmath>
#include <sstream>

#include "mbss/error.hpp"
#include "mbss/eval.hpp"
#include "mbss/synth.hpp"
#include "oracles.hpp"

using namespace mbss;
using doctest::Approx;

namespace {

ClassifierSpec spec_of(const char* name) { return parse_classifier(name); }

std::vector<double> to_vector(std::initializer_list<double> v) { return v; }

}  // namespace

TEST_CASE("classifier names") {
  CHECK(spec_of("mbss").name() == "MBSS");
  CHECK(spec_of("LDA").name() == "LDA");
  CHECK(spec_of("3nn").name() == "3NN");
  CHECK(spec_of("knn").k == 3);
  CHECK(spec_of("5NN").k == 5);
  CHECK_THROWS_AS(parse_classifier("svm"), InvalidArgument);
  CHECK_THROWS_AS(parse_classifier("0nn"), InvalidArgument);
}

TEST_CASE("confusion counts") {
  const std::vector<int> truth{1, 1, 0, 0, 1, 0};
  const std::vector<int> pred{1, 0, 1, 0, kAmbiguous, kAmbiguous};
  const auto c = confusion(truth, pred, 1);
  CHECK(c.tp == 1);
  CHECK(c.fn == 1);
  CHECK(c.fp == 1);
  CHECK(c.tn == 1);
  CHECK(c.ambiguous() == 2);
  CHECK(c.total() == truth.size());
  CHECK(c.accuracy() == Approx(2.0 / 6.0));
  CHECK(c.false_positive_rate() == Approx(1.0 / 3.0));
  CHECK(std::isnan(confusion(std::vector<int>{1}, std::vector<int>{1}, 1).false_positive_rate()));
}

TEST_CASE("constant malicious classifier on a 57/43 split") {
  std::vector<int> truth(57, 1);
  truth.insert(truth.end(), 43, 0);
  const std::vector<int> pred(100, 1);
  const auto c = confusion(truth, pred, 1);
  CHECK(c.accuracy() == Approx(0.57));
  CHECK(c.false_positive_rate() == 1.0);
}

TEST_CASE("accuracy plus error rate is one and counts are conserved") {
  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<int> truth;
    std::vector<int> pred;
    const std::size_t n = 1 + rng.index(40);
    for (std::size_t i = 0; i < n; ++i) {
      truth.push_back(static_cast<int>(rng.index(3)));
      pred.push_back(static_cast<int>(rng.index(4)) - 1);
    }
    const auto c = confusion(truth, pred, 2);
    CHECK(c.total() == n);
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < n; ++i) wrong += pred[i] != truth[i];
    CHECK(c.accuracy() + static_cast<double>(wrong) / static_cast<double>(n) == Approx(1.0));
  }
}

TEST_CASE("summarize uses the sample standard deviation") {
  const auto s = summarize(to_vector({1.0, 2.0, 3.0, 4.0}));
  CHECK(s.mean == 2.5);
  CHECK(s.sd == Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-15));
  CHECK(summarize(to_vector({7.0})).sd == 0.0);
}

TEST_CASE("ROC and AUC") {
  const std::vector<int> truth{1, 1, 1, 0, 0, 0};
  const auto perfect = roc_auc(to_vector({0.9, 0.8, 0.7, 0.3, 0.2, 0.1}), truth);
  CHECK(*perfect.auc == 1.0);
  const auto flat = roc_auc(to_vector({0.5, 0.5, 0.5, 0.5, 0.5, 0.5}), truth);
  CHECK(*flat.auc == 0.5);
  const std::vector<double> inverted{0.9, 0.8, 0.3, 0.7, 0.2, 0.1};
  const auto one = roc_auc(inverted, truth);
  CHECK(*one.auc == Approx(oracle::auc_pairs(inverted, truth)).epsilon(1e-15));
  CHECK(*one.auc == Approx(8.0 / 9.0));
  CHECK(one.points.front().fpr == 0.0);
  CHECK(one.points.back().fpr == 1.0);
  CHECK(one.points.back().tpr == 1.0);

  const auto single = roc_auc(to_vector({0.1, 0.2}), std::vector<int>{1, 1});
  CHECK_FALSE(single.auc.has_value());
  CHECK_FALSE(single.points.empty());
}

TEST_CASE("AUC matches the pair-counting oracle and ignores monotone transforms") {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.index(30);
    std::vector<double> scores;
    std::vector<int> truth;
    for (std::size_t i = 0; i < n; ++i) {
      scores.push_back(std::round(rng.uniform() * 10.0) / 10.0);  // plenty of ties
      truth.push_back(i < 2 ? static_cast<int>(i) : static_cast<int>(rng.index(2)));
    }
    const auto roc = roc_auc(scores, truth);
    REQUIRE(roc.auc.has_value());
    CHECK(std::abs(*roc.auc - oracle::auc_pairs(scores, truth)) < 1e-12);
    std::vector<double> warped;
    for (double s : scores) warped.push_back(std::exp(3.0 * s) - 7.0);
    CHECK(*roc_auc(warped, truth).auc == *roc.auc);
    for (std::size_t i = 1; i < roc.points.size(); ++i) {
      CHECK(roc.points[i].fpr >= roc.points[i - 1].fpr);
      CHECK(roc.points[i].tpr >= roc.points[i - 1].tpr);
    }
  }
}

TEST_CASE("cross-validation on separable data is perfect") {
  const auto s = sample_mixture(two_class_spec(2, 12.0, 200, 1.0, 3));
  for (const char* name : {"lda", "3nn", "mbss"}) {
    const CvReport r = cross_validate(s.dataset, spec_of(name), 10, 7, 1);
    CHECK(r.folds.size() == 10);
    CHECK(r.accuracy.mean == 1.0);
    CHECK(r.accuracy.sd == 0.0);
    CHECK(r.fpr.mean == 0.0);
    CHECK(*r.roc.auc == 1.0);
    std::vector<double> accs;
    for (const auto& f : r.folds) accs.push_back(f.accuracy);
    const auto again = summarize(accs);
    CHECK(std::abs(again.mean - r.accuracy.mean) < 1e-12);
  }
}

TEST_CASE("cross-validation is deterministic and conserves samples") {
  const auto s = sample_mixture(two_class_spec(3, 2.0, 150, 0.8, 4));
  const CvReport a = cross_validate(s.dataset, spec_of("3nn"), 5, 11, 1);
  const CvReport b = cross_validate(s.dataset, spec_of("3nn"), 5, 11, 1);
  std::size_t total = 0;
  for (std::size_t f = 0; f < a.folds.size(); ++f) {
    CHECK(a.folds[f].accuracy == b.folds[f].accuracy);
    CHECK(a.folds[f].counts.total() == a.folds[f].test_size);
    total += a.folds[f].test_size;
  }
  CHECK(total == s.dataset.n());
  CHECK_THROWS_AS(cross_validate(s.dataset, spec_of("lda"), 5, 11, 2), InvalidArgument);
}

TEST_CASE("detection rate sweep") {
  Rng rng(5);
  const Matrix M = oracle::random_points(rng, 200, 3);
  const Predictor all_positive = [](const Matrix& X) {
    return std::vector<int>(static_cast<std::size_t>(X.rows()), 1);
  };
  const auto sweep = detection_rate(all_positive, M, kDefaultFractions, kDefaultReplicates, 3, 1);
  REQUIRE(sweep.rows.size() == 6);
  CHECK(sweep.rows[0].skipped);  // 0.1% of 200 rounds to zero
  CHECK(sweep.warnings.size() == 1);
  for (std::size_t i = 1; i < sweep.rows.size(); ++i) {
    CHECK(sweep.rows[i].rate.mean == 1.0);
    CHECK(sweep.rows[i].sample_size ==
          static_cast<std::size_t>(std::llround(kDefaultFractions[i] * 200.0)));
  }

  // Positive iff the first feature is positive.
  const Predictor sign = [](const Matrix& X) {
    std::vector<int> out;
    for (Eigen::Index r = 0; r < X.rows(); ++r) out.push_back(X(r, 0) > 0 ? 1 : 0);
    return out;
  };
  const auto a = detection_rate(sign, M, kDefaultFractions, kDefaultReplicates, 3, 1);
  const auto b = detection_rate(sign, M, kDefaultFractions, kDefaultReplicates, 3, 1);
  double full = 0.0;
  for (Eigen::Index r = 0; r < M.rows(); ++r) full += M(r, 0) > 0;
  full /= 200.0;
  CHECK(a.rows.back().rate.mean == full);
  CHECK(a.rows.back().rate.sd == 0.0);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    if (a.rows[i].skipped) continue;
    CHECK(a.rows[i].rate.mean == b.rows[i].rate.mean);
    CHECK(a.rows[i].rate.sd == b.rows[i].rate.sd);
  }
  // The full-set run does not depend on the seed.
  const auto c = detection_rate(sign, M, std::vector<double>{1.0}, std::vector<int>{1}, 99, 1);
  CHECK(c.rows[0].rate.mean == full);

  CHECK_THROWS_AS(detection_rate(sign, M, std::vector<double>{0.5}, std::vector<int>{1, 2}, 1, 1),
                  InvalidArgument);
  CHECK_THROWS_AS(detection_rate(sign, Matrix(0, 3), std::vector<double>{0.5}, std::vector<int>{1}, 1, 1),
                  InvalidArgument);
}

TEST_CASE("PCA on axis-aligned data") {
  Rng rng(6);
  Matrix X = oracle::random_points(rng, 500, 3);
  // Whiten the sample, then scale to exact variances 1, 9, 4.
  X = X.rowwise() - X.colwise().mean();
  const Eigen::LLT<Matrix> llt(X.transpose() * X / 499.0);
  X = X * Matrix(llt.matrixU()).inverse();
  X.col(1) *= 3.0;
  X.col(2) *= 2.0;
  const PcaModel m = pca_fit(X, 3);
  CHECK(m.variances(0) == Approx(9.0).epsilon(1e-9));
  CHECK(m.variances(1) == Approx(4.0).epsilon(1e-9));
  CHECK(m.variances(2) == Approx(1.0).epsilon(1e-9));
}

TEST_CASE("PCA on a diagonal covariance follows the variance order") {
  Rng rng(7);
  Matrix X(2000, 3);
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    X(r, 0) = 1.0 * rng.normal();
    X(r, 1) = 3.0 * rng.normal();
    X(r, 2) = 2.0 * rng.normal();
  }
  const PcaModel m = pca_fit(X, 3);
  CHECK(std::abs(m.components(1, 0)) > 0.99);
  CHECK(std::abs(m.components(2, 1)) > 0.99);
  CHECK(std::abs(m.components(0, 2)) > 0.99);
  const Matrix P = pca_transform(m, X);
  const Matrix centered = X.rowwise() - X.colwise().mean();
  CHECK((P.col(0) - centered.col(1) * (m.components(1, 0) > 0 ? 1.0 : -1.0)).cwiseAbs().maxCoeff() < 0.2);
}

TEST_CASE("PCA projections are centered, uncorrelated and invertible") {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix A = oracle::random_spd(rng, 5);
    const Matrix X = oracle::random_points(rng, 60, 5) * A + Matrix::Constant(60, 5, 3.0);
    const PcaModel m = pca_fit(X, 5);
    const Matrix P = pca_transform(m, X);
    CHECK(P.colwise().mean().cwiseAbs().maxCoeff() < 1e-10);
    const Matrix C = P.transpose() * P / 59.0;
    const Matrix off = C - Matrix(C.diagonal().asDiagonal());
    CHECK(off.cwiseAbs().maxCoeff() < 1e-9 * m.variances(0));
    const Matrix back = (P * m.components.transpose()).rowwise() + m.mean.transpose();
    CHECK((back - X).cwiseAbs().maxCoeff() < 1e-9);
    for (Eigen::Index c = 0; c < 5; ++c) {
      Eigen::Index arg = 0;
      m.components.col(c).cwiseAbs().maxCoeff(&arg);
      CHECK(m.components(arg, c) > 0.0);
    }

    Matrix twice(120, 5);
    twice << X, X;
    const PcaModel m2 = pca_fit(twice, 5);
    CHECK((m2.components - m.components).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("PCA errors") {
  CHECK_THROWS_AS(pca_fit(Matrix::Ones(5, 3), 2), DataError);
  Rng rng(9);
  CHECK_THROWS_AS(pca_fit(oracle::random_points(rng, 5, 3), 4), InvalidArgument);
}

TEST_CASE("pca_project tags cohorts") {
  Rng rng(10);
  const Matrix in = oracle::random_points(rng, 6, 3);
  const Matrix out = oracle::random_points(rng, 2, 3);
  const auto table = pca_project(in, std::vector<int>{0, 1, 1, 0, 0, 1}, out, 2, 1);
  CHECK(table.scores.rows() == 8);
  CHECK(table.cohorts[0] == Cohort::benign_in);
  CHECK(table.cohorts[1] == Cohort::malicious_in);
  CHECK(table.cohorts[7] == Cohort::oos);
  std::ostringstream csv;
  write_scatter_csv(table, csv);
  CHECK(csv.str().rfind("PC1,PC2,cohort\n", 0) == 0);
}

TEST_CASE("external predictions") {
  std::istringstream in("sample_id,predicted_label,score\n0,2,0.9\n1,1,0.2\n2,NA,\n3,2,0.6\n");
  const auto ext = read_external_predictions(in, "SVM");
  CHECK(ext.labels == std::vector<int>{1, 0, kAmbiguous, 1});
  CHECK_FALSE(ext.scores[2].has_value());

  Matrix L(4, 1);
  L << 0, 1, 2, 3;
  const Dataset ds(L, {1, 0, 0, 1}, Matrix(0, 1), 2, ApiVocabulary::numbered(1));
  const auto row = score_external_in_sample(ext, ds, 1);
  CHECK(*row.mean_acc == 0.75);
  CHECK(*row.mean_fpr == 0.0);
  CHECK(row.ambiguous == 1);
  CHECK_FALSE(row.auc.has_value());  // one row without a score

  const auto dr = score_external_detection(ext, 4, 1);
  CHECK(*dr.detection_rate == 0.5);
  CHECK_THROWS_AS(score_external_detection(ext, 5, 1), DataError);

  std::istringstream bad("id,label\n");
  CHECK_THROWS_AS(read_external_predictions(bad, "x"), DataError);
  std::istringstream bad_label("sample_id,predicted_label\n0,zero\n");
  CHECK_THROWS_AS(read_external_predictions(bad_label, "x"), DataError);
}

TEST_CASE("report writers") {
  const auto s = sample_mixture(two_class_spec(2, 4.0, 100, 1.0, 12));
  const std::vector<CvReport> reports{cross_validate(s.dataset, spec_of("lda"), 4, 1, 1)};
  std::ostringstream folds;
  write_cv_folds_csv(reports, folds);
  const std::string fold_text = folds.str();
  CHECK(std::count(fold_text.begin(), fold_text.end(), '\n') == 5);
  std::ostringstream roc;
  write_roc_csv(reports, roc);
  CHECK(roc.str().rfind("classifier,threshold,fpr,tpr\nLDA,inf,0,0\n", 0) == 0);

  std::vector<ComparisonRow> rows{comparison_row(reports[0])};
  ComparisonRow ext;
  ext.classifier = "SVM";
  ext.detection_rate = 0.9;
  rows.push_back(ext);
  std::ostringstream csv;
  write_comparison_csv(rows, csv);
  CHECK(csv.str().find("\nSVM,,,,,,0.90000000000000002,0\n") != std::string::npos);
  std::ostringstream table;
  write_comparison_table(rows, table);
  CHECK(table.str().find("90.0%") != std::string::npos);
}
