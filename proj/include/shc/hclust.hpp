#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "shc/data.hpp"
#include "shc/error.hpp"

// Agglomerative hierarchical clustering over squared-Euclidean dissimilarity
// with Ward's, single, complete, and average linkage. Heights are the linkage
// values at each merge; Ward's linkage uses the convention
//
//   d_W(C1, C2) = 2 * n1 * n2 / (n1 + n2) * ||mean1 - mean2||^2,
//
// so two singletons merge at exactly their squared Euclidean distance.

namespace shc {

enum class LinkageKind { Ward, Single, Complete, Average };

// Closed for now; the parameter exists so correlation-type measures can be
// added later. Non-invariant dissimilarities are unsupported by the SHC test.
enum class Dissimilarity { SqEuclidean };

inline const char* to_string(LinkageKind k) {
  switch (k) {
    case LinkageKind::Ward: return "ward";
    case LinkageKind::Single: return "single";
    case LinkageKind::Complete: return "complete";
    case LinkageKind::Average: return "average";
  }
  return "?";
}

struct Merge {
  int left = -1;   // child node id (smaller)
  int right = -1;  // child node id (larger)
  double height = 0.0;
  int size = 0;    // leaves under the created node
};

// Merge j (1-based) creates node id N + j - 1; leaves are 0..N-1.
class Dendrogram {
 public:
  Dendrogram(int n_leaves, std::vector<Merge> merges)
      : n_(n_leaves), merges_(std::move(merges)) {
    validate();
  }

  int n_leaves() const { return n_; }
  const std::vector<Merge>& merges() const { return merges_; }
  int n_nodes() const { return 2 * n_ - 1; }
  int root() const { return 2 * n_ - 2; }
  bool is_leaf(int id) const { return id < n_; }

  const Merge& merge_at(int node) const {
    if (node < n_ || node >= n_nodes())
      throw NotInternal("node " + std::to_string(node) + " is not internal");
    return merges_[static_cast<std::size_t>(node - n_)];
  }

  int size_of(int node) const {
    return is_leaf(node) ? 1 : merge_at(node).size;
  }

  double height_of(int node) const {
    return is_leaf(node) ? 0.0 : merge_at(node).height;
  }

  // Leaf ids under `node`, ascending.
  std::vector<int> leaves_under(int node) const {
    std::vector<int> out;
    std::vector<int> stack{node};
    while (!stack.empty()) {
      const int id = stack.back();
      stack.pop_back();
      if (is_leaf(id)) {
        out.push_back(id);
      } else {
        const Merge& m = merge_at(id);
        stack.push_back(m.left);
        stack.push_back(m.right);
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  // parent[id] for every node; root maps to -1.
  std::vector<int> parents() const {
    std::vector<int> par(static_cast<std::size_t>(n_nodes()), -1);
    for (std::size_t j = 0; j < merges_.size(); ++j) {
      const int id = n_ + static_cast<int>(j);
      par[static_cast<std::size_t>(merges_[j].left)] = id;
      par[static_cast<std::size_t>(merges_[j].right)] = id;
    }
    return par;
  }

 private:
  void validate() const {
    if (n_ < 2 || merges_.size() != static_cast<std::size_t>(n_ - 1))
      throw InvalidData("Dendrogram: need N >= 2 and exactly N-1 merges");
    std::vector<char> used(static_cast<std::size_t>(n_nodes()), 0);
    double prev = 0.0;
    for (std::size_t j = 0; j < merges_.size(); ++j) {
      const Merge& m = merges_[j];
      const int id = n_ + static_cast<int>(j);
      for (int child : {m.left, m.right}) {
        if (child < 0 || child >= id)
          throw InvalidData("Dendrogram: child id out of range");
        if (used[static_cast<std::size_t>(child)]++)
          throw InvalidData("Dendrogram: node used as child twice");
      }
      if (m.left == m.right) throw InvalidData("Dendrogram: identical children");
      const int ls = m.left < n_ ? 1 : merges_[static_cast<std::size_t>(m.left - n_)].size;
      const int rs = m.right < n_ ? 1 : merges_[static_cast<std::size_t>(m.right - n_)].size;
      if (m.size != ls + rs) throw InvalidData("Dendrogram: inconsistent size");
      if (m.height < prev - 1e-9 * (1.0 + std::abs(prev)))
        throw InvalidData("Dendrogram: decreasing merge heights");
      prev = std::max(prev, m.height);
    }
    if (merges_.back().size != n_)
      throw InvalidData("Dendrogram: final merge does not contain all leaves");
  }

  int n_;
  std::vector<Merge> merges_;
};

struct ClusterAssignment {
  std::vector<int> labels;  // one of 0..k-1 per observation
  int k = 0;
};

// D[i][j] = ||x_i - x_j||^2, exactly symmetric, zero diagonal.
inline Matrix pairwise_sq_euclidean(const DataMatrix& data) {
  data.validate();
  const Matrix& x = data.values;
  const int n = data.n_obs();
  Matrix s = Matrix::Zero(n, n);
  s.selfadjointView<Eigen::Lower>().rankUpdate(x);  // s = x * x^T
  const Vector sq = s.diagonal();
  Matrix d(n, n);
  for (int j = 0; j < n; ++j) {
    d(j, j) = 0.0;
    for (int i = j + 1; i < n; ++i) {
      const double v = std::max(0.0, sq(i) + sq(j) - 2.0 * s(i, j));
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return d;
}

namespace detail {

// (dist, min id, max id) ordering for merge candidates; implements the
// deterministic tie rule: equal linkage values resolve to the pair with the
// lexicographically smallest (min id, max id).
struct Candidate {
  double dist = 0.0;
  int a = -1;  // min id
  int b = -1;  // max id
  bool better_than(const Candidate& o) const {
    if (dist != o.dist) return dist < o.dist;
    if (a != o.a) return a < o.a;
    return b < o.b;
  }
};

inline double lance_williams(LinkageKind kind, double dax, double dbx,
                             double dab, int sa, int sb, int sx) {
  switch (kind) {
    case LinkageKind::Single:
      return std::min(dax, dbx);
    case LinkageKind::Complete:
      return std::max(dax, dbx);
    case LinkageKind::Average:
      return (sa * dax + sb * dbx) / static_cast<double>(sa + sb);
    case LinkageKind::Ward: {
      const double den = static_cast<double>(sa + sb + sx);
      return ((sa + sx) * dax + (sb + sx) * dbx - sx * dab) / den;
    }
  }
  return 0.0;
}

}  // namespace detail

// Greedy agglomeration: at each step the globally closest active pair is
// merged (ties resolved by node-id order) and the dissimilarity row of the
// new cluster is produced by the Lance-Williams recurrence. Nearest-neighbour
// candidates are cached per active cluster and repaired only when
// invalidated, which keeps the typical cost near O(N^2).
inline Dendrogram agglomerate(const DataMatrix& data, LinkageKind linkage,
                              Dissimilarity diss = Dissimilarity::SqEuclidean) {
  (void)diss;  // single choice for now
  const int n = data.n_obs();
  if (n < 2) throw TooFewObservations("agglomerate: need N >= 2");

  const int total = 2 * n - 1;
  Matrix d(total, total);
  d.topLeftCorner(n, n) = pairwise_sq_euclidean(data);

  std::vector<int> size(static_cast<std::size_t>(total), 1);
  std::vector<int> active;  // ascending node ids
  active.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) active.push_back(i);

  std::vector<detail::Candidate> best(static_cast<std::size_t>(total));
  auto rescan = [&](int x) {
    detail::Candidate c;
    c.dist = std::numeric_limits<double>::infinity();
    for (int y : active) {
      if (y == x) continue;
      detail::Candidate cand{d(x, y), std::min(x, y), std::max(x, y)};
      if (cand.better_than(c)) c = cand;
    }
    best[static_cast<std::size_t>(x)] = c;
  };
  for (int i : active) rescan(i);

  std::vector<Merge> merges;
  merges.reserve(static_cast<std::size_t>(n - 1));

  for (int step = 0; step < n - 1; ++step) {
    detail::Candidate pick;
    pick.dist = std::numeric_limits<double>::infinity();
    for (int x : active)
      if (best[static_cast<std::size_t>(x)].better_than(pick))
        pick = best[static_cast<std::size_t>(x)];

    const int a = pick.a, b = pick.b;
    const int c = n + step;
    const double dab = pick.dist;
    size[static_cast<std::size_t>(c)] =
        size[static_cast<std::size_t>(a)] + size[static_cast<std::size_t>(b)];
    merges.push_back(Merge{a, b, dab, size[static_cast<std::size_t>(c)]});
    if (step == n - 2) break;

    active.erase(std::remove_if(active.begin(), active.end(),
                                [&](int x) { return x == a || x == b; }),
                 active.end());

    for (int x : active) {
      const double v = detail::lance_williams(
          linkage, d(a, x), d(b, x), dab, size[static_cast<std::size_t>(a)],
          size[static_cast<std::size_t>(b)], size[static_cast<std::size_t>(x)]);
      d(c, x) = v;
      d(x, c) = v;
    }
    active.push_back(c);

    for (std::size_t i = 0; i + 1 < active.size(); ++i) {
      const int x = active[i];
      auto& bx = best[static_cast<std::size_t>(x)];
      if (bx.a == a || bx.b == a || bx.a == b || bx.b == b) {
        rescan(x);
      } else {
        detail::Candidate cand{d(x, c), std::min(x, c), std::max(x, c)};
        if (cand.better_than(bx)) bx = cand;
      }
    }
    rescan(c);
  }

  return Dendrogram(n, std::move(merges));
}

// Partition obtained by undoing the last k-1 merges. Cluster labels are
// assigned 0..k-1 in order of each cluster's smallest leaf id.
inline ClusterAssignment cut_k(const Dendrogram& dend, int k) {
  const int n = dend.n_leaves();
  if (k < 1 || k > n)
    throw InvalidK("cut_k: k=" + std::to_string(k) + " outside [1, N]");

  const std::vector<int> par = dend.parents();
  const int id_limit = 2 * n - k;  // merges 0..n-k-1 create ids n..2n-k-1
  std::vector<int> cluster_root(static_cast<std::size_t>(n));
  for (int leaf = 0; leaf < n; ++leaf) {
    int cur = leaf;
    while (par[static_cast<std::size_t>(cur)] != -1 &&
           par[static_cast<std::size_t>(cur)] < id_limit)
      cur = par[static_cast<std::size_t>(cur)];
    cluster_root[static_cast<std::size_t>(leaf)] = cur;
  }

  std::vector<int> order;  // roots ranked by smallest member leaf
  std::vector<int> label_of(static_cast<std::size_t>(2 * n - 1), -1);
  ClusterAssignment out;
  out.k = k;
  out.labels.resize(static_cast<std::size_t>(n));
  for (int leaf = 0; leaf < n; ++leaf) {
    const int root = cluster_root[static_cast<std::size_t>(leaf)];
    if (label_of[static_cast<std::size_t>(root)] == -1) {
      label_of[static_cast<std::size_t>(root)] = static_cast<int>(order.size());
      order.push_back(root);
    }
    out.labels[static_cast<std::size_t>(leaf)] = label_of[static_cast<std::size_t>(root)];
  }
  if (static_cast<int>(order.size()) != k)
    throw InvalidK("cut_k: internal cluster count mismatch");
  return out;
}

// The two leaf sets joined at an internal node (ascending leaf ids).
inline std::pair<std::vector<int>, std::vector<int>> node_split(
    const Dendrogram& dend, int node) {
  const Merge& m = dend.merge_at(node);  // throws NotInternal for leaves
  return {dend.leaves_under(m.left), dend.leaves_under(m.right)};
}

// Linkage value between two disjoint observation sets, computed directly
// from the definition (not via the recurrence).
inline double linkage_value_between(const DataMatrix& data,
                                    const std::vector<int>& left,
                                    const std::vector<int>& right,
                                    LinkageKind linkage) {
  data.validate();
  if (left.empty() || right.empty())
    throw InvalidData("linkage_value_between: empty side");
  const Matrix& x = data.values;
  const int n1 = static_cast<int>(left.size());
  const int n2 = static_cast<int>(right.size());

  if (linkage == LinkageKind::Ward) {
    Eigen::RowVectorXd m1 = Eigen::RowVectorXd::Zero(x.cols());
    Eigen::RowVectorXd m2 = Eigen::RowVectorXd::Zero(x.cols());
    for (int i : left) m1 += x.row(i);
    for (int j : right) m2 += x.row(j);
    m1 /= n1;
    m2 /= n2;
    return 2.0 * n1 * n2 / static_cast<double>(n1 + n2) * (m1 - m2).squaredNorm();
  }

  double acc = linkage == LinkageKind::Single
                   ? std::numeric_limits<double>::infinity()
                   : 0.0;
  for (int i : left) {
    for (int j : right) {
      const double v = (x.row(i) - x.row(j)).squaredNorm();
      switch (linkage) {
        case LinkageKind::Single: acc = std::min(acc, v); break;
        case LinkageKind::Complete: acc = std::max(acc, v); break;
        case LinkageKind::Average: acc += v; break;
        case LinkageKind::Ward: break;
      }
    }
  }
  if (linkage == LinkageKind::Average) acc /= static_cast<double>(n1) * n2;
  return acc;
}

}  // namespace shc
