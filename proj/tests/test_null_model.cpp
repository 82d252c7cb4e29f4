#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "shc/null_model.hpp"
#include "test_util.hpp"

using namespace shc;
using Catch::Approx;

TEST_CASE("sample spectrum of degenerate and toy data", "[null-model]") {
  DataMatrix same;
  same.values.resize(3, 4);
  same.values.setConstant(2.5);
  const Vector eig = sample_cov_eigenvalues(same);
  REQUIRE(eig.size() == 2);
  CHECK(eig.cwiseAbs().maxCoeff() < 1e-12);

  DataMatrix axis;
  axis.values.resize(2, 2);
  axis.values << -1.0, 0.0, 1.0, 0.0;
  const Vector one = sample_cov_eigenvalues(axis);
  REQUIRE(one.size() == 1);  // min(N-1, p) candidates
  CHECK(one(0) == Approx(2.0));
}

TEST_CASE("gram-trick spectrum equals the dense covariance spectrum", "[null-model][oracle]") {
  std::mt19937_64 gen(17);
  // p > N exercises the Gram path; the oracle diagonalizes the explicit
  // p x p covariance.
  for (const auto& [n, p] : std::vector<std::pair<int, int>>{
           {10, 200}, {8, 37}, {21, 300}, {5, 120}}) {
    const DataMatrix d = testutil::random_data(n, p, gen);
    const Vector got = sample_cov_eigenvalues(d);
    REQUIRE(got.size() == std::min(n - 1, p));

    const Matrix xc = d.values.rowwise() - d.values.colwise().mean();
    const Matrix cov = xc.transpose() * xc / (n - 1);
    Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
    for (int i = 0; i < got.size(); ++i) {
      const double want = std::max(0.0, es.eigenvalues()(p - 1 - i));
      CHECK(got(i) == Approx(want).margin(1e-8));
    }
  }
}

TEST_CASE("background noise estimate is consistent on standard normal data", "[null-model]") {
  std::mt19937_64 gen(2024);
  for (int rep = 0; rep < 20; ++rep) {
    const DataMatrix d = testutil::random_data(50, 1000, gen);
    const double s2 = estimate_sigma_b_sq(d);
    CHECK(s2 > 0.8);
    CHECK(s2 < 1.2);
  }
}

TEST_CASE("background noise estimate scales quadratically", "[null-model]") {
  std::mt19937_64 gen(4);
  const DataMatrix d = testutil::random_data(20, 40, gen);
  DataMatrix scaled = d;
  scaled.values *= 3.0;
  CHECK(estimate_sigma_b_sq(scaled) ==
        Approx(9.0 * estimate_sigma_b_sq(d)).epsilon(1e-12));

  DataMatrix constant;
  constant.values.resize(5, 5);
  constant.values.setConstant(1.0);
  CHECK_THROWS_AS(estimate_sigma_b_sq(constant), DegenerateData);
}

TEST_CASE("hard threshold floors the padded spectrum", "[null-model]") {
  std::mt19937_64 gen(9);
  const DataMatrix d = testutil::random_data(6, 10, gen);
  const NullModel m = fit_null(d, EigenMethod::Hard);
  REQUIRE(m.eigenvalues.size() == 10);
  REQUIRE(m.raw_eigenvalues.size() == 5);
  for (int i = 0; i < 5; ++i)
    CHECK(m.eigenvalues(i) ==
          Approx(std::max(m.raw_eigenvalues(i), m.sigma_b_sq)));
  for (int i = 5; i < 10; ++i) CHECK(m.eigenvalues(i) == m.sigma_b_sq);
}

TEST_CASE("axis toy padded to {2, 0} under the sample method", "[null-model]") {
  DataMatrix axis;
  axis.values.resize(2, 2);
  axis.values << -1.0, 0.0, 1.0, 0.0;
  const NullModel m = fit_null(axis, EigenMethod::Sample);
  REQUIRE(m.eigenvalues.size() == 2);
  CHECK(m.eigenvalues(0) == Approx(2.0));
  CHECK(m.eigenvalues(1) == 0.0);
}

TEST_CASE("soft threshold preserves total variance when feasible", "[null-model][oracle]") {
  std::mt19937_64 gen(31);
  for (int rep = 0; rep < 10; ++rep) {
    // Strong signal keeps sum(raw) above p * sigma_b^2.
    DataMatrix d = testutil::random_data(30, 60, gen);
    d.values.col(0) *= 12.0;
    d.values.col(1) *= 6.0;
    const NullModel m = fit_null(d, EigenMethod::Soft);
    const double raw_sum = m.raw_eigenvalues.sum();
    const double floor_sum = 60.0 * m.sigma_b_sq;
    const double want = std::max(raw_sum, floor_sum);
    CHECK(m.eigenvalues.sum() == Approx(want).epsilon(1e-6));
    if (raw_sum >= floor_sum)
      CHECK(m.eigenvalues.sum() == Approx(raw_sum).epsilon(1e-6));
  }
}

TEST_CASE("hard and soft spectra dominate the noise floor", "[null-model]") {
  std::mt19937_64 gen(77);
  for (int rep = 0; rep < 10; ++rep) {
    const DataMatrix d = testutil::random_data(12, 30, gen);
    for (EigenMethod method : {EigenMethod::Hard, EigenMethod::Soft}) {
      const NullModel m = fit_null(d, method);
      CHECK(m.eigenvalues.minCoeff() >= m.sigma_b_sq - 1e-12);
      for (int i = 1; i < m.eigenvalues.size(); ++i)
        CHECK(m.eigenvalues(i) <= m.eigenvalues(i - 1) + 1e-12);
    }
  }
}

TEST_CASE("spiked covariance fit keeps a small set of signal eigenvalues", "[null-model]") {
  // Sigma = diag(100, 1, ..., 1), p = 1000, N = 50: after soft
  // thresholding only a handful of eigenvalues should clear 2 * sigma_b^2
  // and the top one should sit within a factor of 3 of the truth.
  std::mt19937_64 gen(501);
  std::normal_distribution<double> normal;
  for (int rep = 0; rep < 20; ++rep) {
    DataMatrix d = testutil::random_data(50, 1000, gen);
    d.values.col(0) *= 10.0;
    const NullModel m = fit_null(d, EigenMethod::Soft);
    int above = 0;
    for (int i = 0; i < m.eigenvalues.size(); ++i)
      if (m.eigenvalues(i) > 2.0 * m.sigma_b_sq) ++above;
    CHECK(above >= 1);
    CHECK(above <= 15);  // a handful out of 1000 (49 raw candidates)
    CHECK(m.eigenvalues(0) > 100.0 / 3.0);
    CHECK(m.eigenvalues(0) < 300.0);
  }
}

TEST_CASE("fit_null ignores a common shift of all rows", "[null-model]") {
  std::mt19937_64 gen(3);
  const DataMatrix d = testutil::random_data(9, 14, gen);
  DataMatrix shifted = d;
  shifted.values.rowwise() += Eigen::RowVectorXd::Constant(14, 41.5);
  for (EigenMethod method :
       {EigenMethod::Hard, EigenMethod::Soft, EigenMethod::Sample}) {
    const NullModel a = fit_null(d, method);
    const NullModel b = fit_null(shifted, method);
    CHECK((a.eigenvalues - b.eigenvalues).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("sample_null variances track the spectrum", "[null-model]") {
  NullModel m;
  m.eigenvalues = Vector::Ones(10);
  const DataMatrix x = sample_null(m, 10000, 99);
  for (int j = 0; j < 10; ++j) {
    const double mean = x.values.col(j).mean();
    const double var =
        (x.values.col(j).array() - mean).square().sum() / (x.values.rows() - 1);
    CHECK(var > 0.8);
    CHECK(var < 1.2);
  }
}

TEST_CASE("sample_null is deterministic and honors zero eigenvalues", "[null-model]") {
  NullModel m;
  m.eigenvalues = Vector::Zero(3);
  m.eigenvalues(0) = 4.0;  // column 1 has sd 2, the rest are exactly 0
  const DataMatrix a = sample_null(m, 50, 7);
  const DataMatrix b = sample_null(m, 50, 7);
  CHECK(a.values == b.values);
  CHECK((a.values.col(1).array() == 0.0).all());
  CHECK((a.values.col(2).array() == 0.0).all());
  CHECK(a.values.col(0).cwiseAbs().maxCoeff() > 0.0);

  CHECK_THROWS_AS(sample_null(m, 1, 7), InvalidConfig);
}
