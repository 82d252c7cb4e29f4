#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "shc/data.hpp"
#include "shc/error.hpp"
#include "shc/hclust.hpp"
#include "shc/rng.hpp"

// Cluster-strength statistics. The 2-means cluster index
//
//   CI = (SS_1 + SS_2) / TSS
//
// is the ratio of within-cluster to total sum of squares of a 2-partition;
// smaller values mean stronger clustering. The linkage-value statistic is the
// merge height at a dendrogram node; larger values mean stronger clustering.

namespace shc {

enum class ClusterIndexKind { TwoMeansCI, LinkageValue };

struct CiValue {
  double value = std::numeric_limits<double>::quiet_NaN();
  ClusterIndexKind kind = ClusterIndexKind::TwoMeansCI;
};

// Strict comparison in each statistic's "stronger clustering" direction.
inline bool stronger_than(const CiValue& a, const CiValue& b) {
  if (a.kind != b.kind) throw KindMismatch("stronger_than: mixed index kinds");
  return a.kind == ClusterIndexKind::TwoMeansCI ? a.value < b.value
                                                : a.value > b.value;
}

inline CiValue two_means_ci(const DataMatrix& data,
                            const ClusterAssignment& assignment) {
  data.validate();
  const int n = data.n_obs();
  if (assignment.k != 2 || static_cast<int>(assignment.labels.size()) != n)
    throw InvalidK("two_means_ci: assignment must be a 2-partition of the rows");

  const Matrix& x = data.values;
  Eigen::RowVectorXd mean[2] = {Eigen::RowVectorXd::Zero(x.cols()),
                                Eigen::RowVectorXd::Zero(x.cols())};
  int count[2] = {0, 0};
  for (int i = 0; i < n; ++i) {
    const int l = assignment.labels[static_cast<std::size_t>(i)];
    if (l < 0 || l > 1) throw InvalidK("two_means_ci: label outside {0,1}");
    mean[l] += x.row(i);
    ++count[l];
  }
  if (count[0] == 0 || count[1] == 0)
    throw InvalidK("two_means_ci: empty cluster");
  mean[0] /= count[0];
  mean[1] /= count[1];
  const Eigen::RowVectorXd grand =
      (count[0] * mean[0] + count[1] * mean[1]) / static_cast<double>(n);

  double ss_within = 0.0, tss = 0.0;
  for (int i = 0; i < n; ++i) {
    const int l = assignment.labels[static_cast<std::size_t>(i)];
    ss_within += (x.row(i) - mean[l]).squaredNorm();
    tss += (x.row(i) - grand).squaredNorm();
  }
  if (tss <= 0.0) throw DegenerateData("two_means_ci: zero total sum of squares");
  return CiValue{ss_within / tss, ClusterIndexKind::TwoMeansCI};
}

namespace detail {

// One Lloyd run for k=2 from the given centroids; returns the assignment.
// An emptied cluster is repaired by splitting off the point farthest from
// its centroid (smallest index on ties).
inline ClusterAssignment lloyd_two(const Matrix& x, Eigen::RowVectorXd c0,
                                   Eigen::RowVectorXd c1, int max_iter) {
  const int n = static_cast<int>(x.rows());
  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  for (int iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    int count[2] = {0, 0};
    for (int i = 0; i < n; ++i) {
      const double d0 = (x.row(i) - c0).squaredNorm();
      const double d1 = (x.row(i) - c1).squaredNorm();
      const int l = d1 < d0 ? 1 : 0;
      if (l != labels[static_cast<std::size_t>(i)]) {
        labels[static_cast<std::size_t>(i)] = l;
        changed = true;
      }
      ++count[l];
    }
    if (count[0] == 0 || count[1] == 0) {
      const int empty = count[0] == 0 ? 0 : 1;
      const Eigen::RowVectorXd& full_c = empty == 0 ? c1 : c0;
      int far = 0;
      double far_d = -1.0;
      for (int i = 0; i < n; ++i) {
        const double di = (x.row(i) - full_c).squaredNorm();
        if (di > far_d) {
          far_d = di;
          far = i;
        }
      }
      labels[static_cast<std::size_t>(far)] = empty;
      changed = true;
    }
    Eigen::RowVectorXd m0 = Eigen::RowVectorXd::Zero(x.cols());
    Eigen::RowVectorXd m1 = Eigen::RowVectorXd::Zero(x.cols());
    int n0 = 0, n1 = 0;
    for (int i = 0; i < n; ++i) {
      if (labels[static_cast<std::size_t>(i)] == 0) {
        m0 += x.row(i);
        ++n0;
      } else {
        m1 += x.row(i);
        ++n1;
      }
    }
    c0 = m0 / n0;
    c1 = m1 / n1;
    if (!changed) break;
  }
  return ClusterAssignment{std::move(labels), 2};
}

}  // namespace detail

// Minimum 2-means CI found by Lloyd's algorithm over `restarts` k-means++
// style seedings plus one deterministic seeding from the Ward root split.
// Restart r draws from the stream chain(seed, r), so enlarging `restarts`
// never worsens the result.
inline std::pair<CiValue, ClusterAssignment> kmeans_two_ci(
    const DataMatrix& data, int restarts = 10, int max_iter = 100,
    std::uint64_t seed = 0) {
  data.validate();
  const int n = data.n_obs();
  if (n < 2) throw TooFewObservations("kmeans_two_ci: need N >= 2");
  if (restarts < 0 || max_iter < 1)
    throw InvalidConfig("kmeans_two_ci: bad restarts/max_iter");
  const Matrix& x = data.values;

  CiValue best{std::numeric_limits<double>::infinity(),
               ClusterIndexKind::TwoMeansCI};
  ClusterAssignment best_assignment;

  auto consider = [&](const ClusterAssignment& a) {
    const CiValue ci = two_means_ci(data, a);  // throws DegenerateData if TSS=0
    if (ci.value < best.value) {
      best = ci;
      best_assignment = a;
    }
  };

  // Deterministic seed: centroids of the Ward root split, then Lloyd. This
  // guarantees the returned CI never exceeds the hierarchical-split CI.
  {
    const Dendrogram dend = agglomerate(data, LinkageKind::Ward);
    const auto [l, r] = node_split(dend, dend.root());
    Eigen::RowVectorXd c0 = Eigen::RowVectorXd::Zero(x.cols());
    Eigen::RowVectorXd c1 = Eigen::RowVectorXd::Zero(x.cols());
    for (int i : l) c0 += x.row(i);
    for (int j : r) c1 += x.row(j);
    c0 /= static_cast<double>(l.size());
    c1 /= static_cast<double>(r.size());
    consider(detail::lloyd_two(x, c0, c1, max_iter));
  }

  for (int r = 0; r < restarts; ++r) {
    rng::Stream stream(rng::chain(seed, static_cast<std::uint64_t>(r)));
    const int i1 = static_cast<int>(stream.below(static_cast<std::uint64_t>(n)));
    // k-means++: second center with probability proportional to D^2.
    Vector w(n);
    for (int i = 0; i < n; ++i) w(i) = (x.row(i) - x.row(i1)).squaredNorm();
    const double total = w.sum();
    int i2 = i1 == 0 ? 1 : 0;
    if (total > 0.0) {
      const double u = stream.uniform() * total;
      double cum = 0.0;
      for (int i = 0; i < n; ++i) {
        cum += w(i);
        if (u < cum) {
          i2 = i;
          break;
        }
      }
    }
    consider(detail::lloyd_two(x, x.row(i1), x.row(i2), max_iter));
  }

  return {best, std::move(best_assignment)};
}

// Merge height at an internal node, as a larger-is-stronger index.
inline CiValue linkage_index(const Dendrogram& dend, int node) {
  return CiValue{dend.merge_at(node).height, ClusterIndexKind::LinkageValue};
}

}  // namespace shc
