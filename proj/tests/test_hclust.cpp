#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "shc/hclust.hpp"
#include "test_util.hpp"

using namespace shc;
using Catch::Approx;

namespace {

// Five points echoing the layout of a two-vs-three split: 0 and 1 are the
// closest pair, 2/3/4 sit together across a gap.
DataMatrix five_points() {
  DataMatrix d;
  d.values.resize(5, 2);
  d.values << 0.0, 0.0, 0.4, 0.0, 3.0, 0.0, 3.5, 0.4, 3.2, 0.8;
  return d;
}

constexpr LinkageKind kAllLinkages[] = {LinkageKind::Ward, LinkageKind::Single,
                                        LinkageKind::Complete,
                                        LinkageKind::Average};

// Recompute every merge height from the recorded member sets.
void check_heights_against_definition(const DataMatrix& data,
                                      const Dendrogram& dend, LinkageKind kind,
                                      double tol) {
  for (std::size_t j = 0; j < dend.merges().size(); ++j) {
    const Merge& m = dend.merges()[j];
    const auto left = dend.leaves_under(m.left);
    const auto right = dend.leaves_under(m.right);
    const double direct = testutil::naive_linkage(data.values, left, right, kind);
    REQUIRE(m.height == Approx(direct).margin(tol).epsilon(tol));
  }
}

}  // namespace

TEST_CASE("pairwise squared euclidean basics", "[hclust]") {
  DataMatrix d;
  d.values.resize(2, 2);
  d.values << 0.0, 0.0, 3.0, 4.0;
  const Matrix dist = pairwise_sq_euclidean(d);
  CHECK(dist(0, 1) == Approx(25.0));
  CHECK(dist(1, 0) == Approx(25.0));
  CHECK(dist(0, 0) == 0.0);

  DataMatrix same;
  same.values.resize(3, 4);
  same.values.setConstant(1.25);
  CHECK(pairwise_sq_euclidean(same).maxCoeff() == 0.0);
}

TEST_CASE("pairwise squared euclidean matches naive loops", "[hclust]") {
  std::mt19937_64 gen(11);
  const DataMatrix d = testutil::random_data(5, 3, gen);
  const Matrix fast = pairwise_sq_euclidean(d);
  const Matrix slow = testutil::naive_pairwise_sq(d.values);
  REQUIRE((fast - slow).cwiseAbs().maxCoeff() < 1e-12);
  REQUIRE((fast - fast.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("pairwise rejects non-finite input", "[hclust]") {
  DataMatrix d;
  d.values.resize(2, 2);
  d.values << 0.0, 1.0, std::numeric_limits<double>::quiet_NaN(), 0.0;
  CHECK_THROWS_AS(pairwise_sq_euclidean(d), InvalidData);
}

TEST_CASE("two singleton ward merge lands at squared distance", "[hclust]") {
  DataMatrix d;
  d.values.resize(2, 3);
  d.values << 1.0, 2.0, 3.0, 4.0, 6.0, 9.0;
  const Dendrogram dend = agglomerate(d, LinkageKind::Ward);
  REQUIRE(dend.merges().size() == 1);
  const double sq = (d.values.row(0) - d.values.row(1)).squaredNorm();
  CHECK(dend.merges()[0].height == Approx(sq));
  CHECK(dend.merges()[0].size == 2);
}

TEST_CASE("five point layout: closest pair first, 2-vs-3 at the root", "[hclust]") {
  const DataMatrix d = five_points();
  for (LinkageKind kind : kAllLinkages) {
    const Dendrogram dend = agglomerate(d, kind);
    CHECK(dend.merges()[0].left == 0);
    CHECK(dend.merges()[0].right == 1);
    const auto [left, right] = node_split(dend, dend.root());
    const auto& two = left.size() == 2 ? left : right;
    const auto& three = left.size() == 2 ? right : left;
    CHECK(two == std::vector<int>{0, 1});
    CHECK(three == std::vector<int>{2, 3, 4});
  }
}

TEST_CASE("average linkage heights equal brute-force recomputation", "[hclust]") {
  std::mt19937_64 gen(7);
  const DataMatrix d = testutil::random_data(8, 2, gen);
  const Dendrogram dend = agglomerate(d, LinkageKind::Average);
  check_heights_against_definition(d, dend, LinkageKind::Average, 1e-9);
}

TEST_CASE("lance-williams heights equal direct recomputation", "[hclust][oracle]") {
  std::mt19937_64 gen(1234);
  std::uniform_int_distribution<int> n_dist(4, 24);
  std::uniform_int_distribution<int> p_dist(1, 6);
  for (int rep = 0; rep < 100; ++rep) {
    const DataMatrix d = testutil::random_data(n_dist(gen), p_dist(gen), gen);
    const LinkageKind kind = kAllLinkages[rep % 4];
    const Dendrogram dend = agglomerate(d, kind);
    check_heights_against_definition(d, dend, kind, 1e-9);
  }
}

TEST_CASE("merge heights are nondecreasing for all four linkages", "[hclust]") {
  std::mt19937_64 gen(99);
  std::uniform_int_distribution<int> n_dist(2, 40);
  std::uniform_int_distribution<int> p_dist(1, 5);
  for (int rep = 0; rep < 100; ++rep) {
    const DataMatrix d = testutil::random_data(n_dist(gen), p_dist(gen), gen);
    for (LinkageKind kind : kAllLinkages) {
      const Dendrogram dend = agglomerate(d, kind);
      double prev = 0.0;
      for (const Merge& m : dend.merges()) {
        CHECK(m.height >= prev - 1e-12);
        prev = m.height;
      }
    }
  }
}

TEST_CASE("merge sequence is invariant to rotation and translation", "[hclust][oracle]") {
  std::mt19937_64 gen(42);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 12, p = 4;
    const DataMatrix d = testutil::random_data(n, p, gen);
    const Matrix q = testutil::random_orthogonal(p, gen);
    Eigen::RowVectorXd shift(p);
    for (int j = 0; j < p; ++j) shift(j) = 3.0 * (j + 1);

    DataMatrix moved;
    moved.values = (d.values * q).rowwise() + shift;
    for (LinkageKind kind : kAllLinkages) {
      const Dendrogram a = agglomerate(d, kind);
      const Dendrogram b = agglomerate(moved, kind);
      for (std::size_t j = 0; j < a.merges().size(); ++j) {
        CHECK(a.merges()[j].left == b.merges()[j].left);
        CHECK(a.merges()[j].right == b.merges()[j].right);
        CHECK(a.merges()[j].height ==
              Approx(b.merges()[j].height).margin(1e-8).epsilon(1e-8));
      }
    }
  }
}

TEST_CASE("permuting rows permutes leaf ids and keeps heights", "[hclust]") {
  std::mt19937_64 gen(5);
  const int n = 14;
  const DataMatrix d = testutil::random_data(n, 3, gen);

  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), gen);  // perm[new_row] = old_row
  DataMatrix shuffled;
  shuffled.values.resize(n, 3);
  for (int i = 0; i < n; ++i) shuffled.values.row(i) = d.values.row(perm[i]);
  std::vector<int> inverse(n);
  for (int i = 0; i < n; ++i) inverse[perm[static_cast<std::size_t>(i)]] = i;

  for (LinkageKind kind : kAllLinkages) {
    const Dendrogram a = agglomerate(d, kind);
    const Dendrogram b = agglomerate(shuffled, kind);
    for (std::size_t j = 0; j < a.merges().size(); ++j) {
      CHECK(a.merges()[j].height ==
            Approx(b.merges()[j].height).margin(1e-9).epsilon(1e-9));
      // Same leaf sets at each merge once ids are mapped through the
      // permutation.
      auto map_leaves = [&](std::vector<int> leaves) {
        for (int& l : leaves) l = inverse[static_cast<std::size_t>(l)];
        std::sort(leaves.begin(), leaves.end());
        return leaves;
      };
      const int ida = a.n_leaves() + static_cast<int>(j);
      const int idb = b.n_leaves() + static_cast<int>(j);
      CHECK(map_leaves(a.leaves_under(ida)) == b.leaves_under(idb));
    }
  }
}

TEST_CASE("equal linkage ties resolve to the smallest id pair", "[hclust]") {
  DataMatrix d;
  d.values.resize(4, 2);
  d.values << 0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0;  // unit square corners
  const Dendrogram dend = agglomerate(d, LinkageKind::Single);
  CHECK(dend.merges()[0].left == 0);
  CHECK(dend.merges()[0].right == 1);
  CHECK(dend.merges()[1].left == 2);
  CHECK(dend.merges()[1].right == 3);
  CHECK(dend.merges()[2].left == 4);
  CHECK(dend.merges()[2].right == 5);
  for (const Merge& m : dend.merges()) CHECK(m.height == 1.0);
}

TEST_CASE("cut_k edge cases and the five-point k=2 split", "[hclust]") {
  const DataMatrix d = five_points();
  const Dendrogram dend = agglomerate(d, LinkageKind::Average);

  const ClusterAssignment all = cut_k(dend, 1);
  CHECK(std::all_of(all.labels.begin(), all.labels.end(),
                    [](int l) { return l == 0; }));

  const ClusterAssignment singletons = cut_k(dend, 5);
  for (int i = 0; i < 5; ++i) CHECK(singletons.labels[static_cast<std::size_t>(i)] == i);

  const ClusterAssignment two = cut_k(dend, 2);
  CHECK(two.labels == std::vector<int>{0, 0, 1, 1, 1});

  CHECK_THROWS_AS(cut_k(dend, 0), InvalidK);
  CHECK_THROWS_AS(cut_k(dend, 6), InvalidK);
}

TEST_CASE("node_split covers the tree and rejects leaves", "[hclust]") {
  const DataMatrix d = five_points();
  const Dendrogram dend = agglomerate(d, LinkageKind::Ward);
  CHECK_THROWS_AS(node_split(dend, 2), NotInternal);

  // first merge joins two singletons
  const auto [l0, r0] = node_split(dend, dend.n_leaves());
  CHECK(l0.size() == 1);
  CHECK(r0.size() == 1);

  std::mt19937_64 gen(3);
  const DataMatrix big = testutil::random_data(17, 3, gen);
  const Dendrogram t = agglomerate(big, LinkageKind::Complete);
  for (int node = t.n_leaves(); node < t.n_nodes(); ++node) {
    const auto [left, right] = node_split(t, node);
    std::vector<int> both = left;
    both.insert(both.end(), right.begin(), right.end());
    std::sort(both.begin(), both.end());
    CHECK(std::adjacent_find(both.begin(), both.end()) == both.end());
    CHECK(both == t.leaves_under(node));
  }
}

TEST_CASE("agglomerate input validation", "[hclust]") {
  DataMatrix one;
  one.values.resize(1, 2);
  one.values << 0.0, 0.0;
  CHECK_THROWS_AS(agglomerate(one, LinkageKind::Ward), TooFewObservations);
}
