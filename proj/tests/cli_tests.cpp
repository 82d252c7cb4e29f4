// End-to-end checks of the shc command line tool. argv[1] must be the path
// to the built binary. Exits nonzero on the first failure.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "shc/matrix_io.hpp"
#include "shc/sim.hpp"

namespace fs = std::filesystem;

namespace {

int failures = 0;

void expect(bool ok, const std::string& what) {
  if (!ok) {
    ++failures;
    std::cerr << "FAIL: " << what << '\n';
  }
}

int run(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  if (status == -1) return -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: shc_cli_tests <path-to-shc>\n";
    return 2;
  }
  const std::string bin = fs::absolute(argv[1]).string();
  const fs::path dir = fs::temp_directory_path() / "shc_cli_tests";
  fs::remove_all(dir);
  fs::create_directories(dir);

  // toy input: three separated groups of 8 in the plane
  {
    shc::MixtureDesign design;
    design.kind = shc::DesignKind::LineThree;
    design.p = 2;
    design.n_per_component = 8;
    design.delta = 10.0;
    auto [data, labels] = shc::generate(design, 5);
    shc::write_observations(data, (dir / "toy.csv").string());
  }

  const std::string base = "cd " + dir.string() + " && ";
  const std::string quiet = " 2>/dev/null";

  // determinism: identical JSON across runs and worker counts
  {
    const std::string args =
        " test toy.csv --seed 1 --n-sim 40 --n-min 5 --out {} --svg {}.svg --newick {}.nwk";
    auto cmd = [&](const std::string& out, const std::string& env) {
      std::string a = args;
      while (a.find("{}") != std::string::npos)
        a.replace(a.find("{}"), 2, out);
      return base + env + "\"" + bin + "\"" + a + quiet;
    };
    expect(run(cmd("a.json", "")) == 0, "shc test run 1");
    expect(run(cmd("b.json", "")) == 0, "shc test run 2");
    expect(run(cmd("c.json", "SHC_THREADS=2 ")) == 0, "shc test run 3 (2 threads)");
    const std::string a = slurp(dir / "a.json");
    expect(!a.empty(), "report written");
    expect(a == slurp(dir / "b.json"), "repeat run JSON byte-identical");
    expect(a == slurp(dir / "c.json"), "2-thread run JSON byte-identical");
    expect(slurp(dir / "a.json.svg") == slurp(dir / "c.json.svg"),
           "SVG byte-identical across worker counts");
    expect(slurp(dir / "a.json.nwk") == slurp(dir / "c.json.nwk"),
           "Newick byte-identical across worker counts");
  }

  // simulate: deterministic CSV (timing zeroed) and full recovery at p=2
  {
    // n_min = 25 leaves the 20-observation leaf groups untested, so a
    // correct run yields exactly K = 3.
    const std::string args =
        " simulate --design triangle3 --p 2 --delta 12 --n-per-k 20 "
        "--variant shc2-2 --replicates 4 --n-sim 60 --n-min 25 --seed 3 "
        "--no-timing --out ";
    expect(run(base + "\"" + bin + "\"" + args + "t1.csv" + quiet) == 0,
           "shc simulate run 1");
    expect(run(base + "SHC_THREADS=2 \"" + bin + "\"" + args + "t2.csv" + quiet) == 0,
           "shc simulate run 2 (2 threads)");
    const std::string t1 = slurp(dir / "t1.csv");
    expect(t1 == slurp(dir / "t2.csv"), "simulate CSV byte-identical");

    const auto rows = shc::read_table((dir / "t1.csv").string());
    expect(rows.size() == 1, "simulate CSV has one row");
    expect(rows[0].count_correct == 4, "triangle3 p=2 delta=8 recovers K=3 in 4/4");
    expect(rows[0].median_time_sec == 0.0, "--no-timing zeroes the timing column");
  }

  // exit codes
  expect(run(base + "\"" + bin + "\" test missing_file.csv" + quiet + " 2>err.txt") == 2,
         "missing file exits 2");
  expect(slurp(dir / "err.txt").find("missing_file.csv") != std::string::npos,
         "missing-file message names the path");
  expect(run(base + "\"" + bin + "\" test toy.csv --frobnicate" + quiet) == 1,
         "unknown flag exits 1");
  expect(run(base + "\"" + bin + "\"" + quiet) == 1, "no subcommand exits 1");

  // preprocess round trip
  {
    std::ofstream f(dir / "expr.tsv");
    f << "gene\ts1\ts2\ts3\n"
      << "g1\t0\t8\t16\n"
      << "g2\t4\t4\t4\n"
      << "g3\t2\t32\t64\n"
      << "g4\t1\t2\t4\n";
    f.close();
    const int rc = run(base + "\"" + bin +
                       "\" preprocess expr.tsv --replace-zeros --top-genes 2 "
                       "--out pp.tsv" + quiet);
    expect(rc == 0, "shc preprocess runs");
    const shc::ExpressionMatrix out = shc::read_expression((dir / "pp.tsv").string());
    expect(out.n_genes() == 2, "preprocess keeps top 2 genes");
    expect(out.n_samples() == 3, "preprocess keeps samples");
  }

  // rows-are genes: expression ingestion transposes to samples-as-rows
  {
    std::ofstream f(dir / "genes.tsv");
    f << "gene\ts1\ts2\ts3\ts4\ts5\ts6\n"
      << "g1\t1\t2\t1.5\t9\t8\t9.5\n"
      << "g2\t0.5\t1\t0.8\t7\t7.5\t8\n"
      << "g3\t2\t2.2\t1.9\t0.3\t0.1\t0.4\n";
    f.close();
    const int rc = run(base + "\"" + bin +
                       "\" test genes.tsv --rows-are genes --n-min 3 --n-sim 20 "
                       "--seed 2 --out g.json" + quiet);
    expect(rc == 0, "shc test --rows-are genes runs");
    expect(slurp(dir / "g.json").find("\"n_leaves\": 6") != std::string::npos,
           "genes mode clusters the 6 samples");
  }

  if (failures == 0) {
    std::cout << "cli tests: all passed\n";
    fs::remove_all(dir);
    return 0;
  }
  std::cerr << "cli tests: " << failures << " failure(s); artifacts in " << dir
            << '\n';
  return 1;
}
