#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "shc/engine.hpp"
#include "shc/error.hpp"

// ShcReport serialization: a schema-versioned JSON document that round-trips
// the full report, a Newick tree with p-value annotations at tested nodes,
// and an SVG dendrogram that distinguishes significant, tested, and untested
// branches (significant red, tested black, untested blue) and labels every
// tested node with its p-value and alpha* cutoff.

namespace shc {

enum class ReportFormat { Json, Newick, Svg };

inline constexpr int kReportSchemaVersion = 1;

namespace detail {

inline nlohmann::ordered_json finite_or_null(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

inline std::string leaf_name(const ShcReport& report, int leaf) {
  if (report.leaf_labels)
    return (*report.leaf_labels)[static_cast<std::size_t>(leaf)];
  return "obs" + std::to_string(leaf);
}

inline std::string newick_escape(std::string s) {
  for (char& c : s)
    if (c == ' ' || c == ',' || c == ':' || c == ';' || c == '(' || c == ')' ||
        c == '[' || c == ']')
      c = '_';
  return s;
}

inline std::string format_p(double v) {
  std::ostringstream ss;
  ss.precision(4);
  ss << v;
  return ss.str();
}

}  // namespace detail

inline nlohmann::ordered_json report_to_json(const ShcReport& report) {
  using json = nlohmann::ordered_json;
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["n_leaves"] = report.dendrogram.n_leaves();

  const ShcConfig& cfg = report.config;
  j["config"] = {{"variant", to_string(cfg.variant)},
                 {"linkage", to_string(cfg.linkage)},
                 {"eigen_method", to_string(cfg.eigen_method)},
                 {"n_sim", cfg.n_sim},
                 {"alpha", cfg.alpha},
                 {"n_min", cfg.n_min},
                 {"seed", cfg.seed},
                 {"use_gaussian_p", cfg.use_gaussian_p}};

  json merges = json::array();
  for (const Merge& m : report.dendrogram.merges())
    merges.push_back({{"left", m.left},
                      {"right", m.right},
                      {"height", m.height},
                      {"size", m.size}});
  j["merges"] = std::move(merges);

  if (report.leaf_labels) j["leaf_labels"] = *report.leaf_labels;

  json results = json::array();
  for (const auto& [node, r] : report.results) {
    json jr;
    jr["node"] = node;
    jr["n"] = r.n_j;
    jr["tested"] = r.tested;
    jr["rejected"] = r.rejected;
    jr["alpha_star"] = r.alpha_star;
    jr["observed_kind"] = r.observed.kind == ClusterIndexKind::TwoMeansCI
                              ? "two_means_ci"
                              : "linkage";
    jr["observed"] = detail::finite_or_null(r.observed.value);
    jr["p_empirical"] = detail::finite_or_null(r.p_empirical);
    jr["p_gaussian"] = detail::finite_or_null(r.p_gaussian);
    jr["degenerate_nulls"] = r.degenerate_nulls;
    jr["null_indices"] = r.null_indices;
    results.push_back(std::move(jr));
  }
  j["results"] = std::move(results);
  j["significant"] = report.significant;
  j["k_hat"] = report.k_hat;
  return j;
}

inline ShcReport report_from_json(const nlohmann::ordered_json& j) {
  if (!j.contains("schema_version") ||
      j["schema_version"].get<int>() != kReportSchemaVersion)
    throw ParseError("report: unsupported schema_version");

  const int n = j.at("n_leaves").get<int>();
  std::vector<Merge> merges;
  for (const auto& jm : j.at("merges"))
    merges.push_back(Merge{jm.at("left").get<int>(), jm.at("right").get<int>(),
                           jm.at("height").get<double>(),
                           jm.at("size").get<int>()});

  ShcConfig cfg;
  const auto& jc = j.at("config");
  const std::string variant = jc.at("variant").get<std::string>();
  cfg.variant = variant == "shc1"     ? ShcVariant::Shc1
                : variant == "shc2-l" ? ShcVariant::Shc2Linkage
                                      : ShcVariant::Shc2TwoMeans;
  const std::string linkage = jc.at("linkage").get<std::string>();
  cfg.linkage = linkage == "single"     ? LinkageKind::Single
                : linkage == "complete" ? LinkageKind::Complete
                : linkage == "average"  ? LinkageKind::Average
                                        : LinkageKind::Ward;
  const std::string eigen = jc.at("eigen_method").get<std::string>();
  cfg.eigen_method = eigen == "hard"     ? EigenMethod::Hard
                     : eigen == "sample" ? EigenMethod::Sample
                                         : EigenMethod::Soft;
  cfg.n_sim = jc.at("n_sim").get<int>();
  cfg.alpha = jc.at("alpha").get<double>();
  cfg.n_min = jc.at("n_min").get<int>();
  cfg.seed = jc.at("seed").get<std::uint64_t>();
  cfg.use_gaussian_p = jc.at("use_gaussian_p").get<bool>();

  ShcReport report{Dendrogram(n, std::move(merges)), {}, {}, 1, cfg, {}};
  if (j.contains("leaf_labels"))
    report.leaf_labels = j["leaf_labels"].get<std::vector<std::string>>();

  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& jr : j.at("results")) {
    NodeTestResult r;
    r.node = jr.at("node").get<int>();
    r.n_j = jr.at("n").get<int>();
    r.tested = jr.at("tested").get<bool>();
    r.rejected = jr.at("rejected").get<bool>();
    r.alpha_star = jr.at("alpha_star").get<double>();
    r.observed.kind = jr.at("observed_kind").get<std::string>() == "linkage"
                          ? ClusterIndexKind::LinkageValue
                          : ClusterIndexKind::TwoMeansCI;
    r.observed.value = jr.at("observed").is_null() ? nan : jr.at("observed").get<double>();
    r.p_empirical =
        jr.at("p_empirical").is_null() ? nan : jr.at("p_empirical").get<double>();
    r.p_gaussian =
        jr.at("p_gaussian").is_null() ? nan : jr.at("p_gaussian").get<double>();
    r.degenerate_nulls = jr.at("degenerate_nulls").get<bool>();
    r.null_indices = jr.at("null_indices").get<std::vector<double>>();
    report.results.emplace(r.node, std::move(r));
  }
  report.significant = j.at("significant").get<std::vector<int>>();
  report.k_hat = j.at("k_hat").get<int>();
  return report;
}

inline ShcReport read_report_json(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open file: " + path);
  nlohmann::ordered_json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return report_from_json(j);
}

namespace detail {

inline void newick_node(const ShcReport& report, int node, std::ostream& out,
                        double parent_height) {
  const Dendrogram& tree = report.dendrogram;
  if (tree.is_leaf(node)) {
    out << newick_escape(leaf_name(report, node)) << ':'
        << (parent_height - 0.0);
    return;
  }
  const Merge& m = tree.merge_at(node);
  out << '(';
  newick_node(report, m.left, out, m.height);
  out << ',';
  newick_node(report, m.right, out, m.height);
  out << ')';
  if (auto it = report.results.find(node);
      it != report.results.end() && it->second.tested) {
    const NodeTestResult& r = it->second;
    const double p =
        report.config.use_gaussian_p ? r.p_gaussian : r.p_empirical;
    out << "[p=" << format_p(p) << ",alpha_star=" << format_p(r.alpha_star)
        << "]";
  }
  if (node != tree.root()) out << ':' << (parent_height - m.height);
}

}  // namespace detail

inline std::string report_to_newick(const ShcReport& report) {
  std::ostringstream out;
  out.precision(10);
  detail::newick_node(report, report.dendrogram.root(), out, 0.0);
  out << ";\n";
  return out.str();
}

// Dendrogram rendering. Leaves are laid out left to right by tree order;
// branch height maps linearly to the vertical axis.
inline std::string report_to_svg(const ShcReport& report) {
  const Dendrogram& tree = report.dendrogram;
  const int n = tree.n_leaves();
  const double width = std::max(640.0, 8.0 * n + 160.0);
  const double height = 480.0;
  const double ml = 60.0, mr = 20.0, mt = 30.0, mb = 40.0;
  const double max_h = std::max(tree.merges().back().height, 1e-300);

  // Leaf x order: iterative in-order walk.
  std::vector<double> x(static_cast<std::size_t>(tree.n_nodes()), 0.0);
  std::vector<double> y(static_cast<std::size_t>(tree.n_nodes()), 0.0);
  {
    int slot = 0;
    std::vector<int> stack{tree.root()};
    while (!stack.empty()) {
      const int node = stack.back();
      stack.pop_back();
      if (tree.is_leaf(node)) {
        x[static_cast<std::size_t>(node)] =
            ml + (width - ml - mr) * (n == 1 ? 0.5 : (slot + 0.5) / n);
        ++slot;
        continue;
      }
      const Merge& m = tree.merge_at(node);
      stack.push_back(m.right);  // left subtree first
      stack.push_back(m.left);
    }
  }
  auto y_of = [&](double h) {
    return height - mb - (height - mt - mb) * (h / max_h);
  };
  for (int node = 0; node < tree.n_nodes(); ++node)
    y[static_cast<std::size_t>(node)] = y_of(tree.height_of(node));
  // x of an internal node is the midpoint of its children.
  for (std::size_t j = 0; j < tree.merges().size(); ++j) {
    const Merge& m = tree.merges()[j];
    const int id = n + static_cast<int>(j);
    x[static_cast<std::size_t>(id)] =
        0.5 * (x[static_cast<std::size_t>(m.left)] + x[static_cast<std::size_t>(m.right)]);
  }

  std::ostringstream svg;
  svg.precision(6);
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\""
      << width << "\" height=\"" << height << "\" viewBox=\"0 0 " << width
      << ' ' << height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  auto node_class = [&](int node) -> const char* {
    const auto it = report.results.find(node);
    if (it == report.results.end() || !it->second.tested)
      return "#1f77b4";  // untested: blue
    return it->second.rejected ? "#d62728" : "#000000";
  };

  for (std::size_t j = 0; j < tree.merges().size(); ++j) {
    const Merge& m = tree.merges()[j];
    const int id = n + static_cast<int>(j);
    const char* color = node_class(id);
    const auto it = report.results.find(id);
    const bool untested = it == report.results.end() || !it->second.tested;
    svg << "<path fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"";
    if (untested) svg << " stroke-dasharray=\"4 2\"";
    svg << " d=\"M " << x[static_cast<std::size_t>(m.left)] << ' '
        << y[static_cast<std::size_t>(m.left)] << " V "
        << y[static_cast<std::size_t>(id)] << " H "
        << x[static_cast<std::size_t>(m.right)] << " V "
        << y[static_cast<std::size_t>(m.right)] << "\"/>\n";
  }

  for (const auto& [node, r] : report.results) {
    if (!r.tested) continue;
    const double p = report.config.use_gaussian_p ? r.p_gaussian : r.p_empirical;
    svg << "<text x=\"" << x[static_cast<std::size_t>(node)] + 4.0 << "\" y=\""
        << y[static_cast<std::size_t>(node)] - 4.0
        << "\" font-family=\"sans-serif\" font-size=\"10\" fill=\""
        << (r.rejected ? "#d62728" : "#000000") << "\">p="
        << detail::format_p(p) << ", a*=" << detail::format_p(r.alpha_star)
        << "</text>\n";
  }

  svg << "</svg>\n";
  return svg.str();
}

inline void write_report(const ShcReport& report, ReportFormat format,
                         const std::string& path) {
  std::string payload;
  switch (format) {
    case ReportFormat::Json:
      payload = report_to_json(report).dump(2);
      payload.push_back('\n');
      break;
    case ReportFormat::Newick:
      payload = report_to_newick(report);
      break;
    case ReportFormat::Svg:
      payload = report_to_svg(report);
      break;
  }
  if (path == "-") {
    std::fputs(payload.c_str(), stdout);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write file: " + path);
  f << payload;
}

}  // namespace shc
