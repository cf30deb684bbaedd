#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const fs::path& scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "sombrero_cli_tests";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

RunResult run_cli(const std::string& args) {
  const fs::path out = scratch() / "stdout.txt";
  const std::string cmd = std::string("\"") + SOMBRERO_CLI_PATH + "\" " +
                          args + " > " + out.string() + " 2> " +
                          (scratch() / "stderr.txt").string();
  const int rc = std::system(cmd.c_str());
  RunResult res;
  res.code = (rc == -1) ? -1 : WEXITSTATUS(rc);
  res.out = slurp(out);
  return res;
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_CASE("usage errors exit with code 1") {
  CHECK(run_cli("").code == 1);
  CHECK(run_cli("frobnicate").code == 1);
  CHECK(run_cli("validate --a 0.5").code == 1);        // missing --g
  CHECK(run_cli("validate --g 3 --a 0.5").code == 1);  // no k and no (N, l)
}

TEST_CASE("validate reports the window and the verdict in the exit code") {
  const auto ok = run_cli("validate --g 3 --N 5 --l 0 --a 1.2");
  REQUIRE(ok.code == 0);
  const auto j = nlohmann::json::parse(ok.out);
  CHECK(j["hierarchy_valid"].get<bool>());
  CHECK(j["k"].get<double>() == Catch::Approx(2.0));
  CHECK(j["a_min"].get<double>() == Catch::Approx(1.0).margin(5e-3));
  CHECK(j["a_max"].get<double>() == Catch::Approx(1.23).margin(5e-3));

  const auto bad = run_cli("validate --g 1 --N 3 --l 2 --a 0.5");
  REQUIRE(bad.code == 2);
  const auto jb = nlohmann::json::parse(bad.out);
  CHECK_FALSE(jb["hierarchy_valid"].get<bool>());
  CHECK(jb["g_min"].get<double>() == Catch::Approx(7.0));
}

TEST_CASE("solve writes a converged descending sequence") {
  const auto prefix = (scratch() / "runA").string();
  const auto r = run_cli(
      "solve --g 3 --N 5 --l 0 --a 1.2 --bc A --format json --out " + prefix);
  REQUIRE(r.code == 0);

  const auto j = nlohmann::json::parse(slurp(prefix + ".json"));
  CHECK(j["schema_version"].get<int>() == 1);
  CHECK(j["converged"].get<bool>());
  CHECK(j["bc"].get<std::string>() == "far");
  CHECK(j["E_final"].get<double>() == Catch::Approx(4.46682536).margin(1e-5));
  const auto energies = j["energies"].get<std::vector<double>>();
  REQUIRE(energies.size() >= 8);
  for (size_t m = 1; m < energies.size(); ++m)
    CHECK(energies[m] < energies[m - 1]);
}

TEST_CASE("solve exits 2 when the origin normalization collapses") {
  const auto prefix = (scratch() / "runB").string();
  const auto r = run_cli("solve --g 3 --N 3 --l 3 --a 2.1 --bc B --out " +
                         prefix);
  CHECK(r.code == 2);
  // partial outputs still appear
  CHECK(fs::exists(prefix + "_iterations.csv"));
  CHECK(fs::exists(prefix + "_wave.csv"));
}

TEST_CASE("reduced profile vanishes at the origin for nonzero l") {
  const auto prefix = (scratch() / "runR").string();
  const auto r = run_cli(
      "solve --g 3 --N 3 --l 1 --a 1.2 --bc A --emit-R --out " + prefix);
  REQUIRE(r.code == 0);

  const auto wave = slurp(prefix + "_wave.csv");
  std::istringstream lines(wave);
  std::string header, first;
  std::getline(lines, header);
  std::getline(lines, first);
  CHECK(header == "r,f,psi,R");
  CHECK(first.substr(0, 2) == "0,");
  CHECK(first.substr(first.rfind(',') + 1) == "0");
}

TEST_CASE("solve output is deterministic") {
  const auto p1 = (scratch() / "det1").string();
  const auto p2 = (scratch() / "det2").string();
  const std::string args = "solve --g 3 --N 5 --l 0 --a 1.2 --bc A --out ";
  REQUIRE(run_cli(args + p1).code == 0);
  REQUIRE(run_cli(args + p2).code == 0);
  CHECK(slurp(p1 + "_iterations.csv") == slurp(p2 + "_iterations.csv"));
  CHECK(slurp(p1 + "_wave.csv") == slurp(p2 + "_wave.csv"));
  CHECK(!slurp(p1 + "_iterations.csv").empty());
}

TEST_CASE("table regeneration flags the known reference deviations") {
  const auto prefix = (scratch() / "table").string();
  const auto r = run_cli("table1 --out " + prefix);
  CHECK(r.code == 2);

  const auto csv = slurp(prefix + ".csv");
  CHECK(count_lines(csv) == 33);  // header + 8 rows x 4 columns

  int misses = 0;
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);  // header
  while (std::getline(lines, line))
    if (line.size() > 3 && line.substr(line.size() - 3) == ",no") ++misses;
  CHECK(misses == 2);
}

TEST_CASE("prototype run holds its bounds and rejects weak coupling") {
  const auto prefix = (scratch() / "proto").string();
  const auto ok = run_cli("proto1d --g 10 --out " + prefix);
  CHECK(ok.code == 0);

  const auto csv = slurp(prefix + ".csv");
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "n,shift,gap,bound,margin,f0_increment,f0_bound");
  int rows = 0;
  while (std::getline(lines, line)) {
    // margin column must stay positive
    std::istringstream cells(line);
    std::string cell;
    for (int c = 0; c < 5; ++c) std::getline(cells, cell, ',');
    CHECK(std::stod(cell) > 0.0);
    ++rows;
  }
  CHECK(rows == 6);

  CHECK(run_cli("proto1d --g 1.5 --out " + prefix).code == 1);
}

TEST_CASE("sweep fans out and writes one file per pair") {
  const auto prefix = (scratch() / "sw").string();
  const auto r =
      run_cli("sweep --g 3 --bc A --pairs 1:0.6,2:1.2 --out " + prefix);
  REQUIRE(r.code == 0);

  for (const char* suffix : {"_k1.json", "_k2.json"}) {
    const auto j = nlohmann::json::parse(slurp(prefix + suffix));
    CHECK(j["converged"].get<bool>());
  }

  CHECK(run_cli("sweep --g 3 --pairs nonsense --out " + prefix).code == 1);
}
