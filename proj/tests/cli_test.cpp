// Spawns the installed binary end-to-end: every subcommand, the size-suffix
// grammar, overwrite protection, and the fit|predict composition contract.

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

#include "stackkit/characterize.hpp"
#include "stackkit/predict.hpp"
#include "stackkit/stackdist.hpp"
#include "stackkit/trace.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int status = -1;
  std::string out;
};

RunResult run_cli(const std::string& args) {
  std::string command = std::string(STACKKIT_CLI_PATH) + " " + args + " 2>/dev/null";
  RunResult r;
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0)
    r.out.append(buf.data(), n);
  int rc = pclose(pipe);
  r.status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("stackkit_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

}  // namespace

TEST_CASE("generate writes valid deterministic traces") {
  TempDir dir;
  auto t1 = dir.file("a.bin");
  auto t2 = dir.file("b.bin");
  auto r1 = run_cli("generate --pattern uniform --lines 128 --accesses 10000 "
                    "--seed 7 --out " + t1);
  CHECK(r1.status == 0);
  auto r2 = run_cli("generate --pattern uniform --lines 128 --accesses 10000 "
                    "--seed 7 --out " + t2);
  CHECK(r2.status == 0);
  CHECK(slurp(t1) == slurp(t2));

  auto seq = stackkit::read_trace_file(t1);
  CHECK(seq.addresses.size() == 10000);

  // refuses to overwrite without --force
  auto r3 = run_cli("generate --pattern cyclic --lines 4 --accesses 16 --out " + t1);
  CHECK(r3.status != 0);
  auto r4 = run_cli("generate --pattern cyclic --lines 4 --accesses 16 --force --out " + t1);
  CHECK(r4.status == 0);
  CHECK(stackkit::read_trace_file(t1).addresses.size() == 16);
}

TEST_CASE("distances emits the pinned CSV shape") {
  TempDir dir;
  auto trace = dir.file("t.txt");
  {
    std::ofstream out(trace);
    out << "# A B C A at line granularity 64\n0\n64\n128\n0\n";
  }
  auto r = run_cli("distances " + trace + " --line-size 64");
  CHECK(r.status == 0);
  CHECK(r.out == "# line_size=64 interval=1 kind=d window=0:4\n2\n");
}

TEST_CASE("full pipeline: generate, distances, fit, predict, simulate") {
  TempDir dir;
  auto trace = dir.file("t.bin");
  auto csv = dir.file("s.csv");
  auto model = dir.file("m.json");

  CHECK(run_cli("generate --pattern cyclic --lines 1024 --accesses 200000 "
                "--line-size 64 --out " + trace).status == 0);
  CHECK(run_cli("distances " + trace + " --line-size 64 --out " + csv).status == 0);
  CHECK(run_cli("fit " + csv + " --min-cache 4K --out " + model).status == 0);

  auto json_text = slurp(model);
  CHECK(json_text.size() < 1024);
  auto c = stackkit::characterization_from_json(json_text);
  REQUIRE(c.discrete.atoms.size() == 1);
  CHECK(c.discrete.atoms[0].value == 1023);

  // same flags and seed give byte-identical JSON
  auto model2 = dir.file("m2.json");
  CHECK(run_cli("fit " + csv + " --min-cache 4K --out " + model2).status == 0);
  CHECK(slurp(model) == slurp(model2));

  // 512 lines sit below the 1023-line atom, 1024 lines above it
  auto below = run_cli("predict " + model + " --cache-size 32K");
  CHECK(below.status == 0);
  CHECK(below.out == "1\n");
  auto above = run_cli("predict " + model + " --cache-size 64K");
  CHECK(above.status == 0);
  CHECK(above.out == "0\n");

  auto sim = run_cli("simulate " + trace + " --cache-size 64K --line-size 64");
  CHECK(sim.status == 0);
  CHECK(sim.out.find("capacity_misses=0") != std::string::npos);
  auto sim_small = run_cli("simulate " + trace + " --cache-size 32K --line-size 64");
  CHECK(sim_small.out.find("hits=0") != std::string::npos);

  // library composition matches the CLI end-to-end
  auto lib_samples = [&] {
    std::ifstream in(csv);
    return stackkit::read_samples_csv(in);
  }();
  stackkit::AnalysisConfig config;
  config.min_cache_size = 4096;
  config.line_size = 64;
  auto lib_c = stackkit::characterize(lib_samples, 0.0, config);
  CHECK(stackkit::to_canonical_json(lib_c) + "\n" == json_text);

  // a trace regenerated from the model realizes the model's distances
  auto trace2 = dir.file("t2.bin");
  auto csv2 = dir.file("s2.csv");
  CHECK(run_cli("generate --pattern from-model --model " + model +
                " --accesses 30000 --seed 9 --out " + trace2).status == 0);
  CHECK(run_cli("distances " + trace2 + " --line-size 64 --out " + csv2).status == 0);
  auto regenerated = [&] {
    std::ifstream in(csv2);
    return stackkit::read_samples_csv(in);
  }();
  REQUIRE(!regenerated.samples.empty());
  for (double v : regenerated.samples) CHECK(v == 1023.0);
}

TEST_CASE("predict sweep emits non-increasing csv") {
  TempDir dir;
  auto model = dir.file("m.json");
  {
    std::ofstream out(model);
    out << R"({"cold_fraction":0.0,"continuous":{"family":"uniform","params":)"
        << R"({"a":0.0,"b":100.0},"weight":1.0},"discrete":{"atoms":[],)"
        << R"("weight":0.0},"fit_error":0.0,"kind":"data","line_size":64,)"
        << R"("refinement_rounds":0,"sample_count":100,"sampling_interval":1,)"
        << R"("seed":0,"threshold_lines":1,"version":1})";
  }
  auto r = run_cli("predict " + model + " --sweep 64:8K");
  CHECK(r.status == 0);
  std::stringstream lines(r.out);
  std::string header;
  std::getline(lines, header);
  CHECK(header == "cache_size,miss_ratio");
  double prev = 2.0;
  std::string row;
  int rows = 0;
  while (std::getline(lines, row)) {
    auto comma = row.find(',');
    REQUIRE(comma != std::string::npos);
    double ratio = std::stod(row.substr(comma + 1));
    CHECK(ratio <= prev);
    prev = ratio;
    ++rows;
  }
  CHECK(rows == 8);
}

TEST_CASE("outline emits ranks, optionally with a model column") {
  TempDir dir;
  auto csv = dir.file("s.csv");
  {
    std::ofstream out(csv);
    out << "# line_size=64 interval=1 kind=d window=0:3\n3\n1\n2\n";
  }
  auto r = run_cli("outline " + csv);
  CHECK(r.status == 0);
  CHECK(r.out == "rank,distance\n1,3\n2,2\n3,1\n");

  auto model = dir.file("m.json");
  {
    std::ofstream out(model);
    out << R"({"cold_fraction":0.0,"continuous":null,"discrete":{"atoms":)"
        << R"([[7,1.0]],"weight":1.0},"fit_error":0.0,"kind":"data",)"
        << R"("line_size":64,"refinement_rounds":0,"sample_count":3,)"
        << R"("sampling_interval":1,"seed":0,"threshold_lines":1,"version":1})";
  }
  auto with_model = run_cli("outline " + csv + " --model " + model);
  CHECK(with_model.status == 0);
  CHECK(with_model.out ==
        "rank,distance,model_distance\n1,3,7\n2,2,7\n3,1,7\n");
}

TEST_CASE("compare reports the divergence scalar") {
  TempDir dir;
  auto write_uniform_model = [&](const std::string& name, double b) {
    auto path = dir.file(name);
    std::ofstream out(path);
    out << R"({"cold_fraction":0.0,"continuous":{"family":"uniform","params":)"
        << R"({"a":0.0,"b":)" << b
        << R"(},"weight":1.0},"discrete":{"atoms":[],"weight":0.0},)"
        << R"("fit_error":0.0,"kind":"data","line_size":64,)"
        << R"("refinement_rounds":0,"sample_count":100,"sampling_interval":1,)"
        << R"("seed":0,"threshold_lines":1,"version":1})";
    return path;
  };
  auto a = write_uniform_model("a.json", 100.0);
  auto b = write_uniform_model("b.json", 200.0);

  auto self = run_cli("compare " + a + " " + a + " --sweep 64:16K");
  CHECK(self.status == 0);
  CHECK(self.out == "0\n");

  auto csv = dir.file("diff.csv");
  auto r = run_cli("compare " + a + " " + b + " --sweep 64:16K --out " + csv);
  CHECK(r.status == 0);
  CHECK(std::stod(r.out) > 0.3);
  CHECK(slurp(csv).starts_with("cache_size,miss_ratio_a,miss_ratio_b,abs_diff\n"));
}

TEST_CASE("size suffixes and failure diagnostics") {
  TempDir dir;
  // bad trace path: nonzero exit
  CHECK(run_cli("distances " + dir.file("missing.bin")).status != 0);
  // malformed samples
  auto bad = dir.file("bad.csv");
  {
    std::ofstream out(bad);
    out << "no header\n5\n";
  }
  CHECK(run_cli("fit " + bad).status != 0);
  // unknown family
  auto csv = dir.file("ok.csv");
  {
    std::ofstream out(csv);
    out << "# line_size=64 interval=1 kind=d window=0:2\n5\n6\n";
  }
  CHECK(run_cli("fit " + csv + " --families cauchy").status != 0);
  // 1M == 1048576 bytes
  auto model = dir.file("m.json");
  CHECK(run_cli("fit " + csv + " --min-cache 128 --out " + model).status == 0);
  auto r = run_cli("predict " + model + " --cache-size 1M");
  CHECK(r.status == 0);
  CHECK(r.out == "0\n");
}
