#pragma once

#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "shc/cluster_index.hpp"
#include "shc/data.hpp"
#include "shc/error.hpp"
#include "shc/hclust.hpp"
#include "shc/null_model.hpp"
#include "shc/parallel.hpp"
#include "shc/rng.hpp"

// The SHC procedure: Monte Carlo hypothesis tests at dendrogram nodes against
// a Gaussian null fitted to the node's own observations, combined with a
// root-down sequential traversal that controls the family-wise error rate.
// A node j holding n_j of the N observations is rejected when
//
//   (C1)  p_j < alpha * (n_j - 1) / (N - 1),  and
//   (C2)  its parent was rejected (the root skips C2),
//
// so the significant set is always connected from the root and deeper tests
// face stricter cutoffs.

namespace shc {

// Shc1: classical 2-means test at each node (K-means on observed and null
// data). Shc2Linkage / Shc2TwoMeans: nulls are re-clustered with the same
// hierarchical algorithm and the statistic is read off their root split.
enum class ShcVariant { Shc1, Shc2Linkage, Shc2TwoMeans };

inline const char* to_string(ShcVariant v) {
  switch (v) {
    case ShcVariant::Shc1: return "shc1";
    case ShcVariant::Shc2Linkage: return "shc2-l";
    case ShcVariant::Shc2TwoMeans: return "shc2-2";
  }
  return "?";
}

struct ShcConfig {
  ShcVariant variant = ShcVariant::Shc2TwoMeans;
  int n_sim = 100;       // B; 1000 for final analyses
  double alpha = 0.05;
  int n_min = 10;        // minimum subtree size for testing
  EigenMethod eigen_method = EigenMethod::Soft;
  LinkageKind linkage = LinkageKind::Ward;
  std::uint64_t seed = 0;
  bool use_gaussian_p = false;  // drive C1 by the Gaussian-fit p instead
  int kmeans_restarts = 10;     // Shc1 only
  int kmeans_max_iter = 100;    // Shc1 only
  int threads = 0;              // 0 = SHC_THREADS / hardware

  // Test hook: when set, nulls are drawn from diag(known_eigenvalues)
  // instead of a fitted model. Exists to verify test calibration with the
  // covariance known exactly.
  std::optional<Vector> known_eigenvalues;

  void validate() const {
    if (n_sim < 1) throw InvalidConfig("ShcConfig: n_sim must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0))
      throw InvalidConfig("ShcConfig: alpha must lie in (0, 1)");
    if (n_min < 3) throw InvalidConfig("ShcConfig: n_min must be >= 3");
    if (kmeans_restarts < 0 || kmeans_max_iter < 1)
      throw InvalidConfig("ShcConfig: bad kmeans settings");
  }
};

struct NodeTestResult {
  int node = -1;
  int n_j = 0;
  CiValue observed;
  std::vector<double> null_indices;  // length B when tested
  double p_empirical = std::numeric_limits<double>::quiet_NaN();
  double p_gaussian = std::numeric_limits<double>::quiet_NaN();
  double alpha_star = 0.0;
  bool tested = false;
  bool rejected = false;
  bool degenerate_nulls = false;
};

struct ShcReport {
  Dendrogram dendrogram;
  std::map<int, NodeTestResult> results;  // only nodes the traversal reached
  std::vector<int> significant;           // rejected nodes, root first
  int k_hat = 1;
  ShcConfig config;
  std::optional<std::vector<std::string>> leaf_labels;
};

// Fraction of null indices showing strictly stronger clustering than the
// observed index.
inline double empirical_p(const std::vector<double>& null_indices,
                          const CiValue& observed) {
  if (null_indices.empty()) throw InvalidConfig("empirical_p: no null indices");
  int stronger = 0;
  for (double v : null_indices)
    if (stronger_than(CiValue{v, observed.kind}, observed)) ++stronger;
  return static_cast<double>(stronger) / static_cast<double>(null_indices.size());
}

// Tail probability of the observed index under a normal fit to the null
// indices (sample sd, divisor B-1): lower tail for the 2-means CI, upper
// tail for the linkage value. If the nulls are all identical the fit is
// degenerate: p is 0 or 1 by strict comparison and *degenerate is set.
inline double gaussian_fit_p(const std::vector<double>& null_indices,
                             const CiValue& observed,
                             bool* degenerate = nullptr) {
  const std::size_t b = null_indices.size();
  if (b < 1) throw InvalidConfig("gaussian_fit_p: no null indices");
  double mean = 0.0;
  for (double v : null_indices) mean += v;
  mean /= static_cast<double>(b);
  double ss = 0.0;
  for (double v : null_indices) ss += (v - mean) * (v - mean);
  const double sd = b < 2 ? 0.0 : std::sqrt(ss / static_cast<double>(b - 1));

  if (degenerate) *degenerate = false;
  if (sd <= 0.0) {  // fewer than two distinct null values
    if (degenerate) *degenerate = true;
    return stronger_than(observed, CiValue{mean, observed.kind}) ? 0.0 : 1.0;
  }

  const double z = (observed.value - mean) / sd;
  double p = observed.kind == ClusterIndexKind::TwoMeansCI
                 ? 0.5 * std::erfc(-z / std::sqrt(2.0))
                 : 0.5 * std::erfc(z / std::sqrt(2.0));
  p = std::max(p, std::numeric_limits<double>::min());
  p = std::min(p, std::nextafter(1.0, 0.0));
  return p;
}

namespace detail {

inline constexpr std::uint64_t kObservedTag = 0x0b5e7fedULL;
inline constexpr std::uint64_t kKmeansTag = 0x6b6d6e73ULL;

inline double null_index_for(const DataMatrix& xb, const ShcConfig& cfg,
                             std::uint64_t sim_seed) {
  switch (cfg.variant) {
    case ShcVariant::Shc2Linkage:
      return agglomerate(xb, cfg.linkage).merges().back().height;
    case ShcVariant::Shc2TwoMeans: {
      const Dendrogram d = agglomerate(xb, cfg.linkage);
      return two_means_ci(xb, cut_k(d, 2)).value;
    }
    case ShcVariant::Shc1:
      return kmeans_two_ci(xb, cfg.kmeans_restarts, cfg.kmeans_max_iter,
                           rng::chain(sim_seed, kKmeansTag))
          .first.value;
  }
  return 0.0;
}

}  // namespace detail

// Monte Carlo test of one node split. `left` and `right` index rows of
// `subset` and partition them; `node_id` keys the RNG streams and `total_n`
// is the size of the full dataset (for the alpha* cutoff). The returned
// result has p-values filled in but no decision; nodes smaller than n_min
// come back with tested = false.
inline NodeTestResult node_test(const DataMatrix& subset,
                                const std::vector<int>& left,
                                const std::vector<int>& right, int node_id,
                                int total_n, const ShcConfig& cfg) {
  cfg.validate();
  subset.validate();
  const int nj = subset.n_obs();
  if (static_cast<int>(left.size() + right.size()) != nj || left.empty() ||
      right.empty())
    throw InvalidData("node_test: left/right must partition the subset rows");
  std::vector<char> seen(static_cast<std::size_t>(nj), 0);
  for (const auto& side : {left, right})
    for (int i : side) {
      if (i < 0 || i >= nj || seen[static_cast<std::size_t>(i)]++)
        throw InvalidData("node_test: left/right must partition the subset rows");
    }
  if (total_n < 2 || nj > total_n)
    throw InvalidData("node_test: inconsistent total_n");

  NodeTestResult res;
  res.node = node_id;
  res.n_j = nj;
  res.alpha_star = cfg.alpha * static_cast<double>(nj - 1) / (total_n - 1);
  res.observed.kind = cfg.variant == ShcVariant::Shc2Linkage
                          ? ClusterIndexKind::LinkageValue
                          : ClusterIndexKind::TwoMeansCI;
  if (nj < cfg.n_min) return res;  // NodeTooSmall: marked, not an error

  const std::uint64_t node_seed =
      rng::chain(cfg.seed, static_cast<std::uint64_t>(node_id));

  switch (cfg.variant) {
    case ShcVariant::Shc2Linkage:
      res.observed =
          CiValue{linkage_value_between(subset, left, right, cfg.linkage),
                  ClusterIndexKind::LinkageValue};
      break;
    case ShcVariant::Shc2TwoMeans: {
      ClusterAssignment split;
      split.k = 2;
      split.labels.assign(static_cast<std::size_t>(nj), 1);
      for (int i : left) split.labels[static_cast<std::size_t>(i)] = 0;
      res.observed = two_means_ci(subset, split);
      break;
    }
    case ShcVariant::Shc1:
      res.observed = kmeans_two_ci(subset, cfg.kmeans_restarts,
                                   cfg.kmeans_max_iter,
                                   rng::chain(node_seed, detail::kObservedTag))
                         .first;
      break;
  }

  NullModel model;
  if (cfg.known_eigenvalues) {
    if (cfg.known_eigenvalues->size() != subset.n_vars())
      throw InvalidConfig("node_test: known_eigenvalues length != p");
    model.eigenvalues = *cfg.known_eigenvalues;
    model.method = cfg.eigen_method;
    model.n_source = nj;
  } else {
    model = fit_null(subset, cfg.eigen_method);
  }

  const int b_total = cfg.n_sim;
  std::vector<double> nulls(static_cast<std::size_t>(b_total));
  parallel_for(
      b_total,
      [&](int b) {
        const std::uint64_t sim_seed =
            rng::chain(node_seed, static_cast<std::uint64_t>(b));
        const DataMatrix xb = sample_null(model, nj, sim_seed);
        nulls[static_cast<std::size_t>(b)] =
            detail::null_index_for(xb, cfg, sim_seed);
      },
      cfg.threads);

  res.null_indices = std::move(nulls);
  res.p_empirical = empirical_p(res.null_indices, res.observed);
  res.p_gaussian = gaussian_fit_p(res.null_indices, res.observed,
                                  &res.degenerate_nulls);
  res.tested = true;
  return res;
}

// Full SHC run: cluster, then test breadth-first from the root. A node is
// tested only when its parent was rejected (the root is always tested) and
// its subtree holds at least n_min observations; untestable nodes are marked
// and their subtrees are not descended into.
inline ShcReport run_shc(const DataMatrix& data, const ShcConfig& cfg) {
  cfg.validate();
  data.validate();
  const int n = data.n_obs();
  if (n < std::max(4, cfg.n_min))
    throw TooFewObservations("run_shc: need N >= max(4, n_min)");

  Dendrogram dend = agglomerate(data, cfg.linkage);
  ShcReport report{std::move(dend), {}, {}, 1, cfg, data.row_labels};
  const Dendrogram& tree = report.dendrogram;

  const bool p_kind_gauss = cfg.use_gaussian_p;
  std::deque<int> queue{tree.root()};
  while (!queue.empty()) {
    const int node = queue.front();
    queue.pop_front();

    const auto [left_leaves, right_leaves] = node_split(tree, node);
    std::vector<int> rows;
    rows.reserve(left_leaves.size() + right_leaves.size());
    rows.insert(rows.end(), left_leaves.begin(), left_leaves.end());
    rows.insert(rows.end(), right_leaves.begin(), right_leaves.end());
    std::sort(rows.begin(), rows.end());
    std::unordered_map<int, int> local;
    local.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
      local[rows[i]] = static_cast<int>(i);
    std::vector<int> left_local, right_local;
    left_local.reserve(left_leaves.size());
    right_local.reserve(right_leaves.size());
    for (int g : left_leaves) left_local.push_back(local[g]);
    for (int g : right_leaves) right_local.push_back(local[g]);

    NodeTestResult res = node_test(data.subset_rows(rows), left_local,
                                   right_local, node, n, cfg);
    if (res.tested) {
      const double p = p_kind_gauss ? res.p_gaussian : res.p_empirical;
      res.rejected = p < res.alpha_star;
    }
    const bool rejected = res.rejected;
    report.results.emplace(node, std::move(res));

    if (rejected) {
      report.significant.push_back(node);
      const Merge& m = tree.merge_at(node);
      if (!tree.is_leaf(m.left)) queue.push_back(m.left);
      if (!tree.is_leaf(m.right)) queue.push_back(m.right);
    }
  }

  std::sort(report.significant.begin(), report.significant.end(),
            std::greater<int>());
  report.k_hat = static_cast<int>(report.significant.size()) + 1;
  return report;
}

// Number of clusters implied by cutting the tree at all significant nodes.
// Connectivity of the significant set (condition C2) makes this
// |significant| + 1, and 1 when nothing was rejected.
inline int count_k_hat(const ShcReport& report) {
  return static_cast<int>(report.significant.size()) + 1;
}

}  // namespace shc
