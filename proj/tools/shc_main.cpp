// shc: significance testing for hierarchical clustering.
//
//   shc test <matrix>        run the SHC procedure and emit reports
//   shc preprocess <matrix>  expression preprocessing pipeline
//   shc simulate ...         mixture power/level studies, CSV summaries
//
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "shc/shc.hpp"

namespace {

shc::ShcVariant parse_variant(const std::string& s) {
  if (s == "shc1") return shc::ShcVariant::Shc1;
  if (s == "shc2-l") return shc::ShcVariant::Shc2Linkage;
  if (s == "shc2-2") return shc::ShcVariant::Shc2TwoMeans;
  throw CLI::ValidationError("--variant", "unknown variant: " + s);
}

shc::LinkageKind parse_linkage(const std::string& s) {
  if (s == "ward") return shc::LinkageKind::Ward;
  if (s == "single") return shc::LinkageKind::Single;
  if (s == "complete") return shc::LinkageKind::Complete;
  if (s == "average") return shc::LinkageKind::Average;
  throw CLI::ValidationError("--linkage", "unknown linkage: " + s);
}

shc::EigenMethod parse_eigen(const std::string& s) {
  if (s == "hard") return shc::EigenMethod::Hard;
  if (s == "soft") return shc::EigenMethod::Soft;
  if (s == "sample") return shc::EigenMethod::Sample;
  throw CLI::ValidationError("--eigen", "unknown eigen method: " + s);
}

shc::DesignKind parse_design(const std::string& s) {
  static const std::map<std::string, shc::DesignKind> names = {
      {"spike", shc::DesignKind::SpikeNull},
      {"two", shc::DesignKind::TwoCluster},
      {"line3", shc::DesignKind::LineThree},
      {"triangle3", shc::DesignKind::TriangleThree},
      {"square4", shc::DesignKind::SquareFour},
      {"tetra4", shc::DesignKind::TetrahedronFour},
      {"rect4", shc::DesignKind::RectangleFour},
      {"stretchtetra4", shc::DesignKind::StretchedTetraFour}};
  const auto it = names.find(s);
  if (it == names.end())
    throw CLI::ValidationError("--design", "unknown design: " + s);
  return it->second;
}

struct TestArgs {
  std::string matrix;
  std::string variant = "shc2-2";
  std::string linkage = "ward";
  std::string eigen = "soft";
  std::string rows_are = "observations";
  double alpha = 0.05;
  int n_sim = 100;
  int n_min = 10;
  std::uint64_t seed = 0;
  bool gaussian_p = false;
  std::string out = "-";
  std::string svg;
  std::string newick;
};

int run_test(const TestArgs& a) {
  shc::DataMatrix data;
  if (a.rows_are == "genes") {
    data = shc::to_observations(shc::read_expression(a.matrix));
  } else if (a.rows_are == "observations") {
    data = shc::read_observations(a.matrix);
  } else {
    throw CLI::ValidationError("--rows-are",
                               "expected observations|genes, got " + a.rows_are);
  }

  shc::ShcConfig cfg;
  cfg.variant = parse_variant(a.variant);
  cfg.linkage = parse_linkage(a.linkage);
  cfg.eigen_method = parse_eigen(a.eigen);
  cfg.alpha = a.alpha;
  cfg.n_sim = a.n_sim;
  cfg.n_min = a.n_min;
  cfg.seed = a.seed;
  cfg.use_gaussian_p = a.gaussian_p;

  const shc::ShcReport report = shc::run_shc(data, cfg);

  std::cerr << "N=" << report.dendrogram.n_leaves() << " K_hat=" << report.k_hat
            << " significant_nodes=" << report.significant.size() << '\n';
  shc::write_report(report, shc::ReportFormat::Json, a.out);
  if (!a.svg.empty()) shc::write_report(report, shc::ReportFormat::Svg, a.svg);
  if (!a.newick.empty())
    shc::write_report(report, shc::ReportFormat::Newick, a.newick);
  return 0;
}

struct PreprocessArgs {
  std::string matrix;
  bool uq = false;
  bool replace_zeros = false;
  int top_genes = 0;
  bool mad_before_log = false;
  std::string out = "-";
};

int run_preprocess(const PreprocessArgs& a) {
  shc::ExpressionMatrix expr = shc::read_expression(a.matrix);
  shc::PreprocessConfig cfg;
  cfg.uq_normalize = a.uq;
  cfg.replace_zeros = a.replace_zeros;
  if (a.top_genes > 0) cfg.top_genes = a.top_genes;
  cfg.mad_before_log = a.mad_before_log;
  shc::write_expression(shc::preprocess(expr, cfg), a.out);
  return 0;
}

struct SimulateArgs {
  std::string design;
  int p = 2;
  double delta = 0.0;
  int n_per_k = 50;
  std::string variant = "shc2-2";
  int replicates = 10;
  std::uint64_t seed = 0;
  int n_sim = 100;
  double alpha = 0.05;
  int n_min = 10;
  std::string eigen = "soft";
  std::string linkage = "ward";
  int spike_w = 1;
  double spike_v = 100.0;
  bool gaussian_p = false;
  bool no_timing = false;
  std::string out = "-";
};

int run_simulate(const SimulateArgs& a) {
  shc::MixtureDesign design;
  design.kind = parse_design(a.design);
  design.p = a.p;
  design.delta = a.delta;
  design.n_per_component = a.n_per_k;
  if (design.kind == shc::DesignKind::SpikeNull)
    design.spike = shc::SpikeParams{a.spike_w, a.spike_v};

  shc::ShcConfig cfg;
  cfg.n_sim = a.n_sim;
  cfg.alpha = a.alpha;
  cfg.n_min = a.n_min;
  cfg.eigen_method = parse_eigen(a.eigen);
  cfg.linkage = parse_linkage(a.linkage);
  cfg.seed = a.seed;
  cfg.use_gaussian_p = a.gaussian_p;

  const shc::StudyResult result =
      shc::run_study(design, parse_variant(a.variant), a.replicates, cfg);
  shc::emit_table({result}, a.out, !a.no_timing);
  std::cerr << "design=" << a.design << " correct=" << result.summary.count_correct_k
            << "/" << a.replicates << " mean_p=" << result.summary.mean_p << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Statistical significance for hierarchical clustering"};
  app.require_subcommand(1);

  TestArgs ta;
  CLI::App* test = app.add_subcommand("test", "Run SHC on a data matrix");
  test->add_option("matrix", ta.matrix, "Input matrix (.csv or .tsv)")->required();
  test->add_option("--variant", ta.variant, "shc1|shc2-l|shc2-2");
  test->add_option("--linkage", ta.linkage, "ward|single|complete|average");
  test->add_option("--alpha", ta.alpha, "FWER level");
  test->add_option("--n-sim", ta.n_sim, "Monte Carlo simulations per node");
  test->add_option("--n-min", ta.n_min, "Minimum subtree size tested");
  test->add_option("--eigen", ta.eigen, "soft|hard|sample");
  test->add_option("--seed", ta.seed, "RNG seed");
  test->add_flag("--gaussian-p", ta.gaussian_p,
                 "Drive rejections by the Gaussian-fit p-value");
  test->add_option("--out", ta.out, "JSON report path ('-' = stdout)");
  test->add_option("--svg", ta.svg, "Also write an SVG dendrogram");
  test->add_option("--newick", ta.newick, "Also write a Newick tree");
  test->add_option("--rows-are", ta.rows_are, "observations|genes");

  PreprocessArgs pa;
  CLI::App* pre = app.add_subcommand("preprocess", "Expression preprocessing");
  pre->add_option("matrix", pa.matrix, "Expression matrix (genes x samples)")
      ->required();
  pre->add_flag("--uq", pa.uq, "Upper-quartile normalization");
  pre->add_flag("--replace-zeros", pa.replace_zeros,
                "Replace zeros by the smallest nonzero value");
  pre->add_option("--top-genes", pa.top_genes, "Keep the g most variable genes");
  pre->add_flag("--mad-before-log", pa.mad_before_log,
                "Apply the MAD filter before the log transform");
  pre->add_option("--out", pa.out, "Output path ('-' = stdout)");

  SimulateArgs sa;
  CLI::App* sim = app.add_subcommand("simulate", "Mixture simulation studies");
  sim->add_option("--design", sa.design,
                  "spike|two|line3|triangle3|square4|tetra4|rect4|stretchtetra4")
      ->required();
  sim->add_option("--p", sa.p, "Dimension")->required();
  sim->add_option("--delta", sa.delta, "Component separation");
  sim->add_option("--n-per-k", sa.n_per_k, "Observations per component");
  sim->add_option("--variant", sa.variant, "shc1|shc2-l|shc2-2");
  sim->add_option("--replicates", sa.replicates, "Independent replicates");
  sim->add_option("--seed", sa.seed, "RNG seed");
  sim->add_option("--n-sim", sa.n_sim, "Monte Carlo simulations per node");
  sim->add_option("--alpha", sa.alpha, "FWER level");
  sim->add_option("--n-min", sa.n_min, "Minimum subtree size tested");
  sim->add_option("--eigen", sa.eigen, "soft|hard|sample");
  sim->add_option("--linkage", sa.linkage, "ward|single|complete|average");
  sim->add_option("--spike-w", sa.spike_w, "Spiked coordinates (spike design)");
  sim->add_option("--spike-v", sa.spike_v, "Spike variance (spike design)");
  sim->add_flag("--gaussian-p", sa.gaussian_p,
                "Drive rejections by the Gaussian-fit p-value");
  sim->add_flag("--no-timing", sa.no_timing,
                "Write 0 in the timing column (byte-stable output)");
  sim->add_option("--out", sa.out, "CSV path ('-' = stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*test) return run_test(ta);
    if (*pre) return run_preprocess(pa);
    if (*sim) return run_simulate(sa);
  } catch (const CLI::Error& e) {
    std::cerr << e.what() << '\n';
    return 1;
  } catch (const shc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
