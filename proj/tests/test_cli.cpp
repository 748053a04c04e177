#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

struct Run {
  int status = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(UAVSTOP_CLI) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe);
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path = fs::temp_directory_path() / ("uavstop_cli_" + std::to_string(::getpid()));
  TempDir() { fs::create_directories(path); }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name, const std::string& content = {}) const {
    const auto p = path / name;
    if (!content.empty()) std::ofstream(p) << content;
    return p.string();
  }
};

}  // namespace

TEST_CASE("evaluate prints exact values") {
  const auto r = run("evaluate --policy always-max --format tabular");
  CHECK(r.status == 0);
  CHECK(r.out.find("always-max\tsurvival_prob\t0.19864885") != std::string::npos);

  const auto all = run("evaluate");
  CHECK(all.status == 0);
  for (const char* name : {"dp:", "closed-heuristic:", "open-heuristic:", "always-max:"})
    CHECK(all.out.find(name) != std::string::npos);
}

TEST_CASE("solve reports departures from the myopic rule") {
  TempDir tmp;
  const auto table = tmp.file("dp.tsv");
  CHECK(run("solve --format tabular --out " + table).status == 0);
  const auto text = slurp(table);
  CHECK(text.rfind("junction\trounds\tsigma\tstop\tfly\tvalue\taction\theuristic\n", 0) == 0);
  const auto r = run("solve");
  CHECK(r.status == 0);
  CHECK(r.out.find("optimal expected value") != std::string::npos);
}

TEST_CASE("simulate is reproducible for a seed") {
  const auto a = run("simulate --policy closed-heuristic -n 2000 --seed 4 --format tabular");
  const auto b = run("simulate --policy closed-heuristic -n 2000 --seed 4 --format tabular --threads 3");
  const auto c = run("simulate --policy closed-heuristic -n 2000 --seed 5 --format tabular");
  CHECK(a.status == 0);
  CHECK(a.out == b.out);
  CHECK(a.out != c.out);
}

TEST_CASE("synth and analyze") {
  TempDir tmp;
  const auto pop = tmp.file("pop.txt", "seed = 9\nagent = optimizer closed 100\n");
  const auto s1 = tmp.file("s1.jsonl"), s2 = tmp.file("s2.jsonl"), s3 = tmp.file("s3.jsonl");
  REQUIRE(run("synth --population " + pop + " --out " + s1).status == 0);
  REQUIRE(run("synth --population " + pop + " --out " + s2).status == 0);
  REQUIRE(run("synth --population " + pop + " --seed 10 --out " + s3).status == 0);
  CHECK(slurp(s1) == slurp(s2));
  CHECK(slurp(s1) != slurp(s3));

  const auto tsv = tmp.file("report.tsv");
  REQUIRE(run("analyze --in " + s1 + " --format tabular --out " + tsv).status == 0);
  const auto report = slurp(tsv);
  for (const char* c : {"rather_overconfident", "strongly_overconfident", "rather_underconfident",
                        "strongly_underconfident", "mixed"})
    CHECK(report.find(std::string("categories\t") + c + "\tclosed\t0\n") != std::string::npos);
  // every session with an observable junction is optimal
  const auto optimal = report.find("categories\toptimal\tclosed\t");
  const auto excluded = report.find("categories\texcluded\tclosed\t");
  REQUIRE(optimal != std::string::npos);
  REQUIRE(excluded != std::string::npos);
  const int n_opt = std::stoi(report.substr(optimal + 26)), n_ex = std::stoi(report.substr(excluded + 27));
  CHECK(n_opt + n_ex == 100);
  CHECK(n_opt >= 90);
}

TEST_CASE("bad configuration exits with 2") {
  TempDir tmp;
  CHECK(run("solve --config " + tmp.file("a.cfg", "drone_value = 400\nbogus = 1\n")).status == 2);
  CHECK(run("solve --config " + tmp.file("b.cfg", "crash_prob = 1.5\n")).status == 2);
  CHECK(run("solve --config " + tmp.file("c.cfg", "max_rounds = eight\n")).status == 2);
  CHECK(run("solve --config " + tmp.file("d.cfg", "rho_increments = 5,10\n")).status == 2);
  CHECK(run("solve --config /nonexistent/file.cfg").status == 2);
  CHECK(run("evaluate --policy sideways").status == 2);
  CHECK(run("evaluate --policy agent:hot_hand --treatment open").status == 2);
  CHECK(run("evaluate --format xml").status == 2);
  CHECK(run("frobnicate").status == 2);
  CHECK(run("synth --population " + tmp.file("p.txt", "agent = optimizer closed many\n")).status == 2);
  CHECK(run("analyze --in " + tmp.file("bad.jsonl", "{\"schema\": 1}\n")).status == 2);
}

TEST_CASE("configuration changes the model") {
  TempDir tmp;
  const auto cfg = tmp.file("safe.cfg", "# no crashes\ncrash_prob = 0\nincrease_prob = 1\n");
  const auto r = run("evaluate --policy always-max --format tabular --config " + cfg);
  CHECK(r.status == 0);
  CHECK(r.out.find("always-max\tsurvival_prob\t1.000000000") != std::string::npos);
  CHECK(r.out.find("always-max\texpected_value\t1400.000000000") != std::string::npos);
}
