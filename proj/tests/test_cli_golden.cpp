#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
  const char* p = std::getenv("MODLAB_CLI");
  REQUIRE_MESSAGE(p != nullptr, "MODLAB_CLI must point at the built binary");
  return p;
}

struct RunResult {
  int exit_code;
  std::string out;
};

RunResult run(const std::string& args) {
  fs::path dir = fs::temp_directory_path() / "modlab_cli_test";
  fs::create_directories(dir);
  fs::path log = dir / "run.log";
  std::string cmd = "cd " + dir.string() + " && " + cli_path() + " " + args + " > " +
                    log.string() + " 2>&1";
  int rc = std::system(cmd.c_str());
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WEXITSTATUS(rc), ss.str()};
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

fs::path work(const std::string& name) {
  return fs::temp_directory_path() / "modlab_cli_test" / name;
}

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("catalog --list: six entries, exit 0") {
  RunResult r = run("catalog --list --output catalog.csv");
  CHECK(r.exit_code == 0);
  auto lines = lines_of(work("catalog.csv"));
  REQUIRE(lines.size() >= 3);
  CHECK(lines[0].rfind("# config ", 0) == 0);
  CHECK(lines[1] == "# schema catalog-v1");
  CHECK(lines[2] == "name,dimension,parameters,limit_set");
  CHECK(lines.size() == 3 + 6);
  CHECK(r.out.find("twisting") != std::string::npos);
  CHECK(r.out.find("counterexample_alpha") != std::string::npos);
}

TEST_CASE("criteria divergence from direct flags") {
  RunResult r = run("criteria --kind divergence --q \"pow(log(e/t),2)\" --n 2 --p 2 "
                    "--output div.csv");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("CONVERGES") != std::string::npos);
  auto lines = lines_of(work("div.csv"));
  REQUIRE(lines.size() > 3);
  CHECK(lines[1] == "# schema criteria-divergence-v1");
  CHECK(lines[2] == "eps,partial_integral,verdict,fitted_exponent");
  CHECK(lines[3].find("CONVERGES") != std::string::npos);
}

TEST_CASE("modulus run: golden header and small-grid accuracy") {
  RunResult r = run("modulus --r1 1 --r2 2.718281828459045 --grid 64 --curves 100 "
                    "--output mod.csv");
  CHECK(r.exit_code == 0);
  auto lines = lines_of(work("mod.csv"));
  REQUIRE(lines.size() == 4);
  CHECK(lines[1] == "# schema modulus-v1");
  CHECK(lines[2] == "n,p,curves,grid,seed,estimate,reference,rel_err,iterations,converged");
  // rel_err is the 8th column.
  std::stringstream row(lines[3]);
  std::string cell;
  std::vector<std::string> cells;
  while (std::getline(row, cell, ',')) cells.push_back(cell);
  REQUIRE(cells.size() == 10);
  CHECK(std::stod(cells[7]) < 0.05);
  CHECK(cells[9] == "1");
}

TEST_CASE("verify-ring and probe-limit schemas") {
  RunResult v = run("verify-ring --map identity --r1 1 --r2 2 --samples 100 --grid 64 "
                    "--output ring.csv");
  CHECK(v.exit_code == 0);
  auto rl = lines_of(work("ring.csv"));
  REQUIRE(rl.size() == 4);
  CHECK(rl[1] == "# schema verify-ring-v1");
  CHECK(rl[2] == "n,p,r1,r2,lhs,rhs,ratio,holds");
  CHECK(rl[3].back() == '1');  // inequality holds

  RunResult p = run("probe-limit --map radial_power --radii 1e-2,1e-4,1e-6,1e-8 "
                    "--output probe.csv");
  CHECK(p.exit_code == 0);
  auto pl = lines_of(work("probe.csv"));
  CHECK(pl[1] == "# schema probe-limit-v1");
  CHECK(pl[2] == "radius,separation,extrapolated,confirmed");

  RunResult d = run("dilatation --map radial_power --samples 5 --output dil.csv");
  CHECK(d.exit_code == 0);
  auto dl = lines_of(work("dil.csv"));
  CHECK(dl[1] == "# schema dilatation-v1");
  CHECK(dl[2] ==
        "index,x0,x1,x2,inner_num,outer_num,inner_exact,outer_exact,rel_err_inner");
}

TEST_CASE("config errors: exit 2 with JSON pointer on stderr") {
  std::ofstream(work("bad.json")) << "{\"foo\": 1}";
  RunResult r = run("modulus --config bad.json");
  CHECK(r.exit_code == 2);
  CHECK(r.out.find("\"type\":\"ConfigError\"") != std::string::npos);
  CHECK(r.out.find("\"/foo\"") != std::string::npos);

  std::ofstream(work("p1.json")) << "{\"p\": 1}";
  RunResult r2 = run("modulus --config p1.json");
  CHECK(r2.exit_code == 2);
  CHECK(r2.out.find("\"/p\"") != std::string::npos);
}

TEST_CASE("same seed reruns are byte-identical") {
  std::string args = "modulus --r1 1 --r2 2 --grid 48 --curves 80 --jitter 0.1 --seed 9 ";
  CHECK(run(args + "--output rep1.csv").exit_code == 0);
  CHECK(run(args + "--output rep2.csv").exit_code == 0);
  std::string a = file_bytes(work("rep1.csv"));
  std::string b = file_bytes(work("rep2.csv"));
  // The embedded configs differ only in the output path; compare from the
  // schema line on.
  a = a.substr(a.find("# schema"));
  b = b.substr(b.find("# schema"));
  CHECK(a == b);
  CHECK_FALSE(a.empty());
}

TEST_CASE("config round trip: rerunning a resolved config reproduces the run") {
  CHECK(run("modulus --r1 1 --r2 2 --grid 48 --curves 80 --format json "
            "--output first.json").exit_code == 0);
  // Extract the resolved config and feed it back in.
  std::string doc = file_bytes(work("first.json"));
  auto pos = doc.find("\"config\": ");
  REQUIRE(pos != std::string::npos);
  // The config object ends at the matching brace; reuse the JSON parser via
  // the CLI by writing the whole artifact's config through a tiny scan.
  int depth = 0;
  std::size_t start = doc.find('{', pos);
  std::size_t end = start;
  for (std::size_t i = start; i < doc.size(); ++i) {
    if (doc[i] == '{') ++depth;
    if (doc[i] == '}' && --depth == 0) { end = i + 1; break; }
  }
  std::ofstream(work("echo.json")) << doc.substr(start, end - start);
  CHECK(run("modulus --config echo.json --format json --output second.json").exit_code == 0);
  std::string a = file_bytes(work("first.json"));
  std::string b = file_bytes(work("second.json"));
  a = a.substr(a.find("\"rows\""));
  b = b.substr(b.find("\"rows\""));
  CHECK(a == b);
}
