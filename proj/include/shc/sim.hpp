#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "shc/data.hpp"
#include "shc/engine.hpp"
#include "shc/error.hpp"
#include "shc/parallel.hpp"
#include "shc/rng.hpp"

// Generators and replicate runners for the Gaussian-mixture study designs:
// a single spiked-covariance component (null), two components delta apart,
// three on a line or equilateral triangle, and four on a square, regular
// tetrahedron, delta x 1.5*delta rectangle, or stretched tetrahedron.

namespace shc {

enum class DesignKind {
  SpikeNull,
  TwoCluster,
  LineThree,
  TriangleThree,
  SquareFour,
  TetrahedronFour,
  RectangleFour,
  StretchedTetraFour
};

inline const char* to_string(DesignKind k) {
  switch (k) {
    case DesignKind::SpikeNull: return "spike";
    case DesignKind::TwoCluster: return "two";
    case DesignKind::LineThree: return "line3";
    case DesignKind::TriangleThree: return "triangle3";
    case DesignKind::SquareFour: return "square4";
    case DesignKind::TetrahedronFour: return "tetra4";
    case DesignKind::RectangleFour: return "rect4";
    case DesignKind::StretchedTetraFour: return "stretchtetra4";
  }
  return "?";
}

struct SpikeParams {
  int w = 1;        // spiked coordinates
  double v = 100.0; // spike variance, >= 1
};

struct MixtureDesign {
  DesignKind kind = DesignKind::TwoCluster;
  int p = 2;
  int n_per_component = 50;
  double delta = 0.0;
  std::optional<SpikeParams> spike;  // SpikeNull only
  std::vector<double> sigmas;        // per-component variances; empty = all 1

  int n_components() const {
    switch (kind) {
      case DesignKind::SpikeNull: return 1;
      case DesignKind::TwoCluster: return 2;
      case DesignKind::LineThree:
      case DesignKind::TriangleThree: return 3;
      default: return 4;
    }
  }

  int true_k() const { return n_components(); }

  int embedding_dim() const {
    switch (kind) {
      case DesignKind::SpikeNull: return 1;
      case DesignKind::TwoCluster:
      case DesignKind::LineThree: return 1;
      case DesignKind::TriangleThree:
      case DesignKind::SquareFour:
      case DesignKind::RectangleFour: return 2;
      default: return 3;
    }
  }

  void validate() const {
    if (p < 1 || n_per_component < 1)
      throw InvalidDesign("MixtureDesign: p and n_per_component must be >= 1");
    if (delta < 0.0) throw InvalidDesign("MixtureDesign: delta must be >= 0");
    if (p < embedding_dim())
      throw InvalidDesign("MixtureDesign: p smaller than the embedding dimension");
    if (kind == DesignKind::SpikeNull) {
      if (!spike) throw InvalidDesign("MixtureDesign: SpikeNull requires spike");
      if (spike->w < 1 || spike->w > p || spike->v < 1.0)
        throw InvalidDesign("MixtureDesign: need 1 <= w <= p and v >= 1");
    }
    if (!sigmas.empty() &&
        static_cast<int>(sigmas.size()) != n_components())
      throw InvalidDesign("MixtureDesign: sigmas length != number of components");
    for (double s : sigmas)
      if (!(s > 0.0)) throw InvalidDesign("MixtureDesign: sigmas must be > 0");
  }
};

// Component means embedded in the leading coordinates of R^p. The stretched
// tetrahedron keeps an equilateral base of side delta and lifts the apex so
// the three apex edges equal 1.5*delta.
inline std::vector<Vector> component_means(const MixtureDesign& design) {
  design.validate();
  const int p = design.p;
  const double d = design.delta;
  auto at = [&](std::initializer_list<double> coords) {
    Vector v = Vector::Zero(p);
    int i = 0;
    for (double c : coords) v(i++) = c;
    return v;
  };

  switch (design.kind) {
    case DesignKind::SpikeNull:
      return {Vector::Zero(p)};
    case DesignKind::TwoCluster:
      return {at({0.0}), at({d})};
    case DesignKind::LineThree:
      return {at({0.0}), at({d}), at({2.0 * d})};
    case DesignKind::TriangleThree:
      return {at({0.0, 0.0}), at({d, 0.0}),
              at({0.5 * d, 0.5 * std::sqrt(3.0) * d})};
    case DesignKind::SquareFour:
      return {at({0.0, 0.0}), at({d, 0.0}), at({d, d}), at({0.0, d})};
    case DesignKind::TetrahedronFour:
      return {at({0.0, 0.0, 0.0}), at({d, 0.0, 0.0}),
              at({0.5 * d, 0.5 * std::sqrt(3.0) * d, 0.0}),
              at({0.5 * d, std::sqrt(3.0) / 6.0 * d,
                  std::sqrt(2.0 / 3.0) * d})};
    case DesignKind::RectangleFour:
      return {at({0.0, 0.0}), at({d, 0.0}), at({d, 1.5 * d}),
              at({0.0, 1.5 * d})};
    case DesignKind::StretchedTetraFour: {
      const double apex_h = d * std::sqrt(2.25 - 1.0 / 3.0);
      return {at({0.0, 0.0, 0.0}), at({d, 0.0, 0.0}),
              at({0.5 * d, 0.5 * std::sqrt(3.0) * d, 0.0}),
              at({0.5 * d, std::sqrt(3.0) / 6.0 * d, apex_h})};
    }
  }
  return {};
}

// Draws n_per_component observations per component: N(mu_k, sigma_k^2 I_p),
// or the spiked diagonal covariance diag{v,..,v,1,..,1} for SpikeNull.
// Rows are filled in component-block order from a single stream.
inline std::pair<DataMatrix, std::vector<int>> generate(
    const MixtureDesign& design, std::uint64_t seed) {
  const std::vector<Vector> means = component_means(design);
  const int k = static_cast<int>(means.size());
  const int per = design.n_per_component;
  const int n = k * per;
  const int p = design.p;

  Vector sd_spike;
  if (design.kind == DesignKind::SpikeNull) {
    sd_spike = Vector::Ones(p);
    sd_spike.head(design.spike->w).setConstant(std::sqrt(design.spike->v));
  }

  rng::Stream stream(seed);
  DataMatrix out;
  out.values.resize(n, p);
  std::vector<int> labels(static_cast<std::size_t>(n));
  int row = 0;
  for (int c = 0; c < k; ++c) {
    const double sigma =
        design.sigmas.empty() ? 1.0 : std::sqrt(design.sigmas[static_cast<std::size_t>(c)]);
    for (int i = 0; i < per; ++i, ++row) {
      labels[static_cast<std::size_t>(row)] = c;
      for (int j = 0; j < p; ++j) {
        const double s =
            design.kind == DesignKind::SpikeNull ? sd_spike(j) : sigma;
        out.values(row, j) = means[static_cast<std::size_t>(c)](j) + s * stream.normal();
      }
    }
  }
  return {std::move(out), std::move(labels)};
}

// Spectrum of the best-fit Gaussian to a two-component spherical mixture
// with n and m draws:
//   lambda_1 = nm/(n+m) * ((n+m)^-1 ||mu1-mu2||^2 + s1^2/m + s2^2/n)
//   lambda_k = nm/(n+m) * (s1^2/m + s2^2/n)            for k >= 2.
inline Vector theoretical_mixture_spectrum(int n, int m, const Vector& mu1,
                                           const Vector& mu2, double s1_sq,
                                           double s2_sq, int p) {
  if (n < 1 || m < 1) throw InvalidDesign("theoretical_mixture_spectrum: n, m >= 1");
  if (mu1.size() != mu2.size())
    throw InvalidDesign("theoretical_mixture_spectrum: mean length mismatch");
  if (p < 1) throw InvalidDesign("theoretical_mixture_spectrum: p >= 1");
  const double nm = static_cast<double>(n) * m / (n + m);
  const double noise = s1_sq / m + s2_sq / n;
  const double mu_sq = (mu1 - mu2).squaredNorm();
  Vector out = Vector::Constant(p, nm * noise);
  out(0) = nm * (mu_sq / (n + m) + noise);
  return out;
}

struct ReplicateOutcome {
  int k_hat = 1;
  double root_p_empirical = 1.0;
  double root_p_gaussian = 1.0;
  double wall_time_sec = 0.0;
  std::uint64_t seed = 0;
};

struct StudySummary {
  int count_correct_k = 0;
  double mean_p = 0.0;     // mean root p-value (the kind driving decisions)
  double median_time = 0.0;
};

struct StudyResult {
  MixtureDesign design;
  ShcVariant variant = ShcVariant::Shc2TwoMeans;
  int n_replicates = 0;
  std::vector<ReplicateOutcome> outcomes;
  StudySummary summary;
};

inline StudySummary summarize(const MixtureDesign& design,
                              const std::vector<ReplicateOutcome>& outcomes,
                              bool gaussian_p) {
  StudySummary s;
  if (outcomes.empty()) return s;
  std::vector<double> times;
  times.reserve(outcomes.size());
  for (const auto& o : outcomes) {
    if (o.k_hat == design.true_k()) ++s.count_correct_k;
    s.mean_p += gaussian_p ? o.root_p_gaussian : o.root_p_empirical;
    times.push_back(o.wall_time_sec);
  }
  s.mean_p /= static_cast<double>(outcomes.size());
  std::sort(times.begin(), times.end());
  const std::size_t mid = times.size() / 2;
  s.median_time = times.size() % 2 == 1
                      ? times[mid]
                      : 0.5 * (times[mid - 1] + times[mid]);
  return s;
}

// n_replicates independent generate + run_shc passes with derived seeds.
// Replicates run in parallel; each replicate's engine runs single threaded,
// and seeds are derived per replicate, so results are schedule independent.
inline StudyResult run_study(const MixtureDesign& design, ShcVariant variant,
                             int n_replicates, const ShcConfig& config) {
  design.validate();
  config.validate();
  if (n_replicates < 1) throw InvalidConfig("run_study: need >= 1 replicates");

  StudyResult result;
  result.design = design;
  result.variant = variant;
  result.n_replicates = n_replicates;
  result.outcomes.resize(static_cast<std::size_t>(n_replicates));

  parallel_for(
      n_replicates,
      [&](int rep) {
        const std::uint64_t rep_seed =
            rng::chain(config.seed, static_cast<std::uint64_t>(rep));
        const auto t0 = std::chrono::steady_clock::now();
        auto [data, labels] = generate(design, rng::chain(rep_seed, 1));
        ShcConfig cfg = config;
        cfg.variant = variant;
        cfg.seed = rng::chain(rep_seed, 2);
        cfg.threads = 1;
        const ShcReport report = run_shc(data, cfg);
        const auto t1 = std::chrono::steady_clock::now();

        ReplicateOutcome& o = result.outcomes[static_cast<std::size_t>(rep)];
        o.k_hat = report.k_hat;
        const NodeTestResult& root =
            report.results.at(report.dendrogram.root());
        o.root_p_empirical = root.p_empirical;
        o.root_p_gaussian = root.p_gaussian;
        o.wall_time_sec = std::chrono::duration<double>(t1 - t0).count();
        o.seed = rep_seed;
      },
      config.threads);

  result.summary = summarize(design, result.outcomes, config.use_gaussian_p);
  return result;
}

namespace detail {

inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace detail

// CSV with one row per study:
// design,p,delta,variant,n_reps,count_correct,mean_p,median_time_sec
inline void emit_table(const std::vector<StudyResult>& results,
                       const std::string& path, bool include_timing = true) {
  if (results.empty()) throw InvalidConfig("emit_table: no results");
  std::ostringstream out;
  out << "design,p,delta,variant,n_reps,count_correct,mean_p,median_time_sec\n";
  for (const auto& r : results) {
    out << to_string(r.design.kind) << ',' << r.design.p << ','
        << detail::format_double(r.design.delta) << ',' << to_string(r.variant)
        << ',' << r.n_replicates << ',' << r.summary.count_correct_k << ','
        << detail::format_double(r.summary.mean_p) << ','
        << detail::format_double(include_timing ? r.summary.median_time : 0.0)
        << '\n';
  }
  if (path == "-") {
    std::fputs(out.str().c_str(), stdout);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("emit_table: cannot write " + path);
  f << out.str();
}

struct TableRow {
  std::string design;
  int p = 0;
  double delta = 0.0;
  std::string variant;
  int n_reps = 0;
  int count_correct = 0;
  double mean_p = 0.0;
  double median_time_sec = 0.0;
};

inline std::vector<TableRow> read_table(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("read_table: cannot open " + path);
  std::string line;
  if (!std::getline(f, line)) throw ParseError("read_table: empty file");
  std::vector<TableRow> rows;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    TableRow r;
    auto next = [&]() {
      if (!std::getline(ls, cell, ','))
        throw ParseError("read_table: short row '" + line + "'");
      return cell;
    };
    r.design = next();
    r.p = std::stoi(next());
    r.delta = std::stod(next());
    r.variant = next();
    r.n_reps = std::stoi(next());
    r.count_correct = std::stoi(next());
    r.mean_p = std::stod(next());
    r.median_time_sec = std::stod(next());
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace shc
