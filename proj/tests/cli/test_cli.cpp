// End-to-end checks of the command-line tool. The binary path arrives via
// the KNNGATE_BIN environment variable (set by CTest).

#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "knngate/memory.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code;
  std::string output;  // stdout and stderr combined
};

std::string binary_path() {
  const char* path = std::getenv("KNNGATE_BIN");
  REQUIRE(path != nullptr);
  return path;
}

RunResult run(const std::string& args) {
  const std::string command = binary_path() + " " + args + " 2>&1";
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string output;
  std::array<char, 4096> buffer;
  std::size_t read = 0;
  while ((read = fread(buffer.data(), 1, buffer.size(), pipe)) > 0) {
    output.append(buffer.data(), read);
  }
  const int status = pclose(pipe);
  return RunResult{WEXITSTATUS(status), output};
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir =
      fs::temp_directory_path() /
      ("knngate_cli_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spit(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

const char* kTrustConfig = R"(schema_version = 1

[scenario]
d = 1
labels = 2
input_law = ball
radius = 1.0
weights = 0.5 ; -0.5
offsets = 0, 0
q0 = bayes
deformation = shift
shift = 0.5
rho = 0.0
spurious = uniform

[sweep]
experiment = trust_limit
n_grid = 200, 1000
k_beta = 0.5
reps = 4
master_seed = 31
queries = 1.5 ; 0.2
)";

}  // namespace

TEST_CASE("gate evaluates a query and is byte-deterministic") {
  const fs::path dir = fresh_dir("gate");
  const fs::path store_path = dir / "memory.knnm";
  // Five points on the line: three label-1 near 0, two label-2 near 1.
  knngate::save_store_file(
      knngate::MemoryStore({0.0, 0.1, 0.2, 0.9, 1.0}, 1, {1, 1, 1, 2, 2}, 2),
      store_path.string());

  const std::string args = "gate --memory " + store_path.string() +
                           " --query 0.05 --p-true 0.8,0.2 --q0 uniform"
                           " --k 3 --zeta 0.5 --mode hard";
  const RunResult first = run(args);
  CHECK(first.exit_code == 0);
  CHECK(first.output.find("\"lambda\"") != std::string::npos);
  CHECK(first.output.find("\"regime\"") != std::string::npos);
  CHECK(first.output.find("\"delta_h\"") != std::string::npos);

  const RunResult second = run(args);
  CHECK(second.output == first.output);

  // Soft mode runs too.
  const RunResult soft = run("gate --memory " + store_path.string() +
                             " --query 0.05 --p-true 0.8,0.2 --q0 uniform"
                             " --k 3 --mode soft");
  CHECK(soft.exit_code == 0);
  fs::remove_all(dir);
}

TEST_CASE("gate rejects k larger than the store") {
  const fs::path dir = fresh_dir("gate_bad");
  const fs::path store_path = dir / "memory.knnm";
  knngate::save_store_file(
      knngate::MemoryStore({0.0, 1.0}, 1, {1, 2}, 2), store_path.string());
  const RunResult result = run("gate --memory " + store_path.string() +
                               " --query 0.0 --p-true uniform --q0 uniform"
                               " --k 5");
  CHECK(result.exit_code == 2);
  CHECK(result.output.find("1 <= k <= n") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("simulate writes reports and reruns identically") {
  const fs::path dir = fresh_dir("simulate");
  spit(dir / "sweep.cfg", kTrustConfig);

  const RunResult first = run("simulate --config " +
                              (dir / "sweep.cfg").string() + " --out " +
                              (dir / "out1").string());
  CHECK(first.exit_code == 0);
  CHECK(fs::exists(dir / "out1" / "report.csv"));
  CHECK(fs::exists(dir / "out1" / "report.json"));
  CHECK(fs::exists(dir / "out1" / "manifest.json"));

  const RunResult second = run("simulate --config " +
                               (dir / "sweep.cfg").string() + " --out " +
                               (dir / "out2").string() + " --threads 3");
  CHECK(second.exit_code == 0);
  CHECK(slurp(dir / "out1" / "report.csv") ==
        slurp(dir / "out2" / "report.csv"));
  CHECK(slurp(dir / "out1" / "report.json") ==
        slurp(dir / "out2" / "report.json"));

  // Seed override changes the results.
  const RunResult reseeded = run("simulate --config " +
                                 (dir / "sweep.cfg").string() + " --out " +
                                 (dir / "out3").string() + " --seed 99");
  CHECK(reseeded.exit_code == 0);
  CHECK(slurp(dir / "out1" / "report.csv") !=
        slurp(dir / "out3" / "report.csv"));

  // The manifest embeds a reusable config: re-running from it reproduces the
  // outputs byte for byte.
  const nlohmann::json manifest =
      nlohmann::json::parse(slurp(dir / "out1" / "manifest.json"));
  CHECK(manifest["experiment"] == "trust_limit");
  spit(dir / "from_manifest.cfg",
       manifest["resolved_config"].get<std::string>());
  const RunResult replayed = run("simulate --config " +
                                 (dir / "from_manifest.cfg").string() +
                                 " --out " + (dir / "out_replayed").string());
  CHECK(replayed.exit_code == 0);
  CHECK(slurp(dir / "out1" / "report.csv") ==
        slurp(dir / "out_replayed" / "report.csv"));

  // csv-only format.
  const RunResult csv_only = run("simulate --config " +
                                 (dir / "sweep.cfg").string() + " --out " +
                                 (dir / "out4").string() + " --format csv");
  CHECK(csv_only.exit_code == 0);
  CHECK(fs::exists(dir / "out4" / "report.csv"));
  CHECK(!fs::exists(dir / "out4" / "report.json"));
  fs::remove_all(dir);
}

TEST_CASE("simulate reports config mistakes with exit code 2") {
  const fs::path dir = fresh_dir("simulate_bad");
  std::string broken = kTrustConfig;
  const std::size_t at = broken.find("master_seed = 31\n");
  broken.erase(at, std::string("master_seed = 31\n").size());
  spit(dir / "broken.cfg", broken);
  const RunResult result = run("simulate --config " +
                               (dir / "broken.cfg").string() + " --out " +
                               (dir / "out").string());
  CHECK(result.exit_code == 2);
  CHECK(result.output.find("master_seed") != std::string::npos);

  const RunResult missing = run("simulate --config " +
                                (dir / "nonexistent.cfg").string() +
                                " --out " + (dir / "out").string());
  CHECK(missing.exit_code == 3);
  fs::remove_all(dir);
}

TEST_CASE("plot renders the report and rejects unknown metrics") {
  const fs::path dir = fresh_dir("plot");
  spit(dir / "sweep.cfg", kTrustConfig);
  REQUIRE(run("simulate --config " + (dir / "sweep.cfg").string() +
              " --out " + (dir / "out").string())
              .exit_code == 0);

  const RunResult plotted = run("plot --report " +
                                (dir / "out" / "report.csv").string() +
                                " --out " + (dir / "chart.svg").string());
  CHECK(plotted.exit_code == 0);
  const std::string svg = slurp(dir / "chart.svg");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("stroke-dasharray") != std::string::npos);  // target line

  const RunResult bad_metric =
      run("plot --report " + (dir / "out" / "report.csv").string() +
          " --out " + (dir / "chart2.svg").string() + " --metric nonsense");
  CHECK(bad_metric.exit_code == 2);
  CHECK(bad_metric.output.find("nonsense") != std::string::npos);

  spit(dir / "empty.csv", "experiment,n\n");
  const RunResult empty = run("plot --report " + (dir / "empty.csv").string() +
                              " --out " + (dir / "chart3.svg").string());
  CHECK(empty.exit_code == 3);
  fs::remove_all(dir);
}
