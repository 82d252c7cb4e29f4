#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "shc/data.hpp"
#include "shc/error.hpp"
#include "shc/rng.hpp"

// Gaussian null estimation under the factor-analysis model
// Lambda = Lambda_0 + sigma_b^2 I_p: only the eigenvalues of the null
// covariance are estimated, which is all a rotation-invariant test needs.
// sigma_b^2 comes from a robust MAD fit over all matrix entries, and the raw
// sample spectrum is thresholded by one of three rules (hard, soft, sample).

namespace shc {

enum class EigenMethod { Hard, Soft, Sample };

inline const char* to_string(EigenMethod m) {
  switch (m) {
    case EigenMethod::Hard: return "hard";
    case EigenMethod::Soft: return "soft";
    case EigenMethod::Sample: return "sample";
  }
  return "?";
}

struct NullModel {
  Vector eigenvalues;      // length p, descending
  double sigma_b_sq = 0.0;
  EigenMethod method = EigenMethod::Soft;
  int n_source = 0;        // observations the fit used
  Vector raw_eigenvalues;  // length min(N-1, p), descending, pre-threshold
};

namespace detail {

inline double median_inplace(std::vector<double>& v) {
  const std::size_t n = v.size();
  const std::size_t mid = n / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (n % 2 == 0) {
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid - 1),
                     v.begin() + static_cast<std::ptrdiff_t>(mid));
    m = 0.5 * (m + v[mid - 1]);
  }
  return m;
}

inline Vector descending_clamped(const Vector& ascending, int k) {
  Vector out(k);
  const int m = static_cast<int>(ascending.size());
  for (int i = 0; i < k; ++i) out(i) = std::max(0.0, ascending(m - 1 - i));
  return out;
}

}  // namespace detail

// Descending list of the min(N-1, p) candidate eigenvalues of the sample
// covariance (divisor N-1). Uses the N x N Gram matrix of the centered data
// when p > N; the nonzero spectrum is identical to the p x p covariance's.
inline Vector sample_cov_eigenvalues(const DataMatrix& data) {
  data.validate();
  const int n = data.n_obs();
  const int p = data.n_vars();
  if (n < 2) throw TooFewObservations("sample_cov_eigenvalues: need N >= 2");

  const Matrix xc = data.values.rowwise() - data.values.colwise().mean();
  const int k = std::min(n - 1, p);

  if (p > n) {
    Matrix g = Matrix::Zero(n, n);
    g.selfadjointView<Eigen::Lower>().rankUpdate(xc, 1.0 / (n - 1));
    Eigen::SelfAdjointEigenSolver<Matrix> es(g);
    return detail::descending_clamped(es.eigenvalues(), k);
  }
  Matrix c = Matrix::Zero(p, p);
  c.selfadjointView<Eigen::Lower>().rankUpdate(xc.transpose(), 1.0 / (n - 1));
  Eigen::SelfAdjointEigenSolver<Matrix> es(c);
  return detail::descending_clamped(es.eigenvalues(), k);
}

// Robust background-noise variance: squared MAD (about the median, over all
// N*p entries of the column-centered data) divided by the Gaussian
// consistency constant 0.6744898 = Phi^-1(0.75), squared.
inline double estimate_sigma_b_sq(const DataMatrix& data) {
  data.validate();
  const Matrix xc = data.values.rowwise() - data.values.colwise().mean();
  std::vector<double> entries(xc.data(), xc.data() + xc.size());
  const double med = detail::median_inplace(entries);
  for (double& e : entries) e = std::abs(e - med);
  const double mad = detail::median_inplace(entries);
  if (mad <= 0.0)
    throw DegenerateData("estimate_sigma_b_sq: zero MAD (constant-like data)");
  const double s = mad / 0.6744898;
  return s * s;
}

// Fits the diagonal Gaussian null. The raw spectrum is zero-padded to length
// p and then thresholded:
//   hard    lambda_j = max(raw_j, sigma_b^2)
//   soft    lambda_j = max(raw_j - tau, sigma_b^2), tau >= 0 chosen by
//           bisection so the total variance satisfies
//           sum lambda = max(sum raw, p * sigma_b^2)
//   sample  lambda = raw, unmodified (zeros allowed)
inline NullModel fit_null(const DataMatrix& data, EigenMethod method) {
  const Vector raw = sample_cov_eigenvalues(data);
  const int p = data.n_vars();

  Vector padded = Vector::Zero(p);
  padded.head(raw.size()) = raw;

  NullModel model;
  model.method = method;
  model.n_source = data.n_obs();
  model.raw_eigenvalues = raw;

  if (method == EigenMethod::Sample) {
    model.sigma_b_sq = 0.0;
    model.eigenvalues = padded;
    return model;
  }

  const double sb2 = estimate_sigma_b_sq(data);
  model.sigma_b_sq = sb2;

  if (method == EigenMethod::Hard) {
    model.eigenvalues = padded.cwiseMax(sb2);
    return model;
  }

  // Soft threshold. sum(tau) = sum_j max(padded_j - tau, sb2) decreases from
  // its tau=0 value to p*sb2 at tau = max raw - sb2; bisect to the target.
  const double target = std::max(padded.sum(), p * sb2);
  auto total_at = [&](double tau) {
    double s = 0.0;
    for (int j = 0; j < p; ++j) s += std::max(padded(j) - tau, sb2);
    return s;
  };
  double lo = 0.0;
  double hi = std::max(0.0, padded(0) - sb2);
  double tau = 0.0;
  if (total_at(0.0) > target && hi > 0.0) {
    for (int it = 0; it < 200; ++it) {
      tau = 0.5 * (lo + hi);
      if (total_at(tau) > target)
        lo = tau;
      else
        hi = tau;
    }
    tau = 0.5 * (lo + hi);
  }
  model.eigenvalues = (padded.array() - tau).cwiseMax(sb2);
  return model;
}

// n independent draws from N(0, diag(lambda)); deterministic given the seed.
// One normal variate is consumed per cell in column-major order regardless of
// the spectrum, so equal seeds give aligned draws across models.
inline DataMatrix sample_null(const NullModel& model, int n, std::uint64_t seed) {
  if (n < 2) throw InvalidConfig("sample_null: need n >= 2");
  const int p = static_cast<int>(model.eigenvalues.size());
  if (p < 1) throw InvalidConfig("sample_null: empty spectrum");

  Vector sd(p);
  for (int j = 0; j < p; ++j) sd(j) = std::sqrt(std::max(0.0, model.eigenvalues(j)));

  rng::Stream stream(seed);
  DataMatrix out;
  out.values.resize(n, p);
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < n; ++i) out.values(i, j) = sd(j) * stream.normal();
  return out;
}

}  // namespace shc
