#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "shc/data.hpp"
#include "shc/error.hpp"
#include "shc/null_model.hpp"

// Expression-matrix preprocessing: upper-quartile normalization across
// samples, replacement of zeros by the smallest nonzero value, log2
// transform, and selection of the most variable genes by MAD. Expression
// matrices are genes x samples (the on-disk convention); clustering consumes
// the transpose, where samples become observations.

namespace shc {

struct ExpressionMatrix {
  Matrix values;  // genes x samples
  std::vector<std::string> gene_ids;
  std::vector<std::string> sample_ids;

  int n_genes() const { return static_cast<int>(values.rows()); }
  int n_samples() const { return static_cast<int>(values.cols()); }

  void validate() const {
    if (values.rows() < 1 || values.cols() < 1)
      throw InvalidData("ExpressionMatrix: empty");
    if (!values.allFinite())
      throw InvalidData("ExpressionMatrix: non-finite entry");
    if (static_cast<int>(gene_ids.size()) != n_genes() ||
        static_cast<int>(sample_ids.size()) != n_samples())
      throw InvalidData("ExpressionMatrix: id lengths do not match dims");
    std::unordered_set<std::string> seen;
    for (const auto& g : gene_ids)
      if (!seen.insert(g).second)
        throw InvalidData("ExpressionMatrix: duplicate gene id '" + g + "'");
    seen.clear();
    for (const auto& s : sample_ids)
      if (!seen.insert(s).second)
        throw InvalidData("ExpressionMatrix: duplicate sample id '" + s + "'");
  }
};

struct PreprocessConfig {
  bool uq_normalize = true;
  bool replace_zeros = true;
  std::optional<int> top_genes;  // MAD filter size; >= 2 when present
  int log_base = 2;
  bool mad_before_log = false;  // swap the filter/log order
};

namespace detail {

// Type-7 (linear interpolation) quantile of a sorted vector.
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
  const std::size_t m = sorted.size();
  if (m == 1) return sorted[0];
  const double h = q * static_cast<double>(m - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= m) return sorted[m - 1];
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

inline double mad_about_median(std::vector<double> v) {
  const double med = median_inplace(v);
  for (double& e : v) e = std::abs(e - med);
  return median_inplace(v);
}

}  // namespace detail

// Scales each sample (column) so its upper quartile of nonzero values equals
// the across-sample mean of those quartiles.
inline ExpressionMatrix uq_normalize(const ExpressionMatrix& expr) {
  expr.validate();
  const int s = expr.n_samples();
  std::vector<double> uq(static_cast<std::size_t>(s));
  for (int c = 0; c < s; ++c) {
    std::vector<double> nonzero;
    for (int g = 0; g < expr.n_genes(); ++g) {
      const double v = expr.values(g, c);
      if (v != 0.0) nonzero.push_back(v);
    }
    if (nonzero.empty())
      throw DegenerateSample("uq_normalize: sample '" + expr.sample_ids[static_cast<std::size_t>(c)] +
                             "' is all zero");
    std::sort(nonzero.begin(), nonzero.end());
    uq[static_cast<std::size_t>(c)] = detail::quantile_sorted(nonzero, 0.75);
  }
  const double mean_uq =
      std::accumulate(uq.begin(), uq.end(), 0.0) / static_cast<double>(s);

  ExpressionMatrix out = expr;
  for (int c = 0; c < s; ++c)
    out.values.col(c) *= mean_uq / uq[static_cast<std::size_t>(c)];
  return out;
}

// Replaces every zero by the smallest nonzero value in the matrix. Idempotent.
inline ExpressionMatrix replace_zeros(const ExpressionMatrix& expr) {
  expr.validate();
  double smallest = std::numeric_limits<double>::infinity();
  for (int g = 0; g < expr.n_genes(); ++g)
    for (int c = 0; c < expr.n_samples(); ++c) {
      const double v = expr.values(g, c);
      if (v != 0.0 && v < smallest) smallest = v;
    }
  if (!std::isfinite(smallest))
    throw DegenerateData("replace_zeros: all-zero matrix");
  ExpressionMatrix out = expr;
  for (int g = 0; g < out.n_genes(); ++g)
    for (int c = 0; c < out.n_samples(); ++c)
      if (out.values(g, c) == 0.0) out.values(g, c) = smallest;
  return out;
}

// Keeps the g genes with the largest MAD across samples; ties resolve to the
// earlier gene, and the selected genes keep their input order.
inline ExpressionMatrix mad_filter(const ExpressionMatrix& expr, int g) {
  expr.validate();
  if (g < 2 || g > expr.n_genes())
    throw InvalidConfig("mad_filter: g must lie in [2, n_genes]");

  const int total = expr.n_genes();
  std::vector<double> mads(static_cast<std::size_t>(total));
  for (int i = 0; i < total; ++i) {
    std::vector<double> row(static_cast<std::size_t>(expr.n_samples()));
    for (int c = 0; c < expr.n_samples(); ++c)
      row[static_cast<std::size_t>(c)] = expr.values(i, c);
    mads[static_cast<std::size_t>(i)] = detail::mad_about_median(std::move(row));
  }

  std::vector<int> order(static_cast<std::size_t>(total));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return mads[static_cast<std::size_t>(a)] > mads[static_cast<std::size_t>(b)];
  });
  std::vector<char> keep(static_cast<std::size_t>(total), 0);
  for (int i = 0; i < g; ++i)
    keep[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = 1;

  ExpressionMatrix out;
  out.values.resize(g, expr.n_samples());
  out.sample_ids = expr.sample_ids;
  int row = 0;
  for (int i = 0; i < total; ++i) {
    if (!keep[static_cast<std::size_t>(i)]) continue;
    out.values.row(row) = expr.values.row(i);
    out.gene_ids.push_back(expr.gene_ids[static_cast<std::size_t>(i)]);
    ++row;
  }
  return out;
}

// Entrywise log (base `base`); requires strictly positive entries.
inline ExpressionMatrix log_transform(const ExpressionMatrix& expr, int base = 2) {
  expr.validate();
  if (base < 2) throw InvalidConfig("log_transform: base must be >= 2");
  const double denom = std::log(static_cast<double>(base));
  ExpressionMatrix out = expr;
  for (int g = 0; g < out.n_genes(); ++g)
    for (int c = 0; c < out.n_samples(); ++c) {
      const double v = out.values(g, c);
      if (!(v > 0.0))
        throw InvalidData("log_transform: nonpositive entry at gene " +
                          expr.gene_ids[static_cast<std::size_t>(g)] + ", sample " +
                          expr.sample_ids[static_cast<std::size_t>(c)]);
      out.values(g, c) = std::log(v) / denom;
    }
  return out;
}

// Fixed pipeline: uq_normalize -> replace_zeros -> log_transform ->
// mad_filter (the filter moves before the log with mad_before_log).
inline ExpressionMatrix preprocess(const ExpressionMatrix& expr,
                                   const PreprocessConfig& cfg) {
  if (cfg.top_genes && *cfg.top_genes < 2)
    throw InvalidConfig("preprocess: top_genes must be >= 2");
  ExpressionMatrix cur = expr;
  if (cfg.uq_normalize) cur = uq_normalize(cur);
  if (cfg.replace_zeros) cur = replace_zeros(cur);
  if (cfg.mad_before_log && cfg.top_genes)
    cur = mad_filter(cur, *cfg.top_genes);
  cur = log_transform(cur, cfg.log_base);
  if (!cfg.mad_before_log && cfg.top_genes)
    cur = mad_filter(cur, *cfg.top_genes);
  return cur;
}

// Samples become observations; gene ids become variable labels.
inline DataMatrix to_observations(const ExpressionMatrix& expr) {
  expr.validate();
  DataMatrix out;
  out.values = expr.values.transpose();
  out.row_labels = expr.sample_ids;
  out.col_labels = expr.gene_ids;
  return out;
}

}  // namespace shc
