#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

// End-to-end tests that shell out to the built binary (path in QQSPHERE_BIN).

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path work_dir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() /
                 ("qqsphere-cli-test-" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

RunResult run(const std::string& args) {
  const char* bin = std::getenv("QQSPHERE_BIN");
  REQUIRE_MESSAGE(bin != nullptr, "QQSPHERE_BIN must point at the CLI binary");
  fs::path of = work_dir() / "stdout.txt", ef = work_dir() / "stderr.txt";
  std::string cmd = std::string(bin) + " " + args + " > " + of.string() + " 2> " +
                    ef.string();
  int rc = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  r.out = slurp(of);
  r.err = slurp(ef);
  return r;
}

std::string path_of(const std::string& name) { return (work_dir() / name).string(); }

int count_lines(const std::string& s) {
  int n = 0;
  for (char c : s)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_CASE("gen writes the benchmark problem") {
  RunResult r = run("gen --kind figure1 --beta 0.25 --out " + path_of("p025.json"));
  CHECK(r.exit_code == 0);
  json p = json::parse(slurp(work_dir() / "p025.json"));
  CHECK(p["n"] == 3);
  CHECK(p["beta"] == 0.25);
  CHECK(p["field"] == "real");
  CHECK(p["A"]["re"] == json::parse("[[1,0,1],[0,1,0],[1,0,1]]"));
}

TEST_CASE("gen rejects an unknown kind") {
  RunResult r = run("gen --kind frobnicate --beta 1");
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("BadKind") != std::string::npos);
  CHECK(count_lines(r.err) == 1);
}

TEST_CASE("count-critical reproduces the benchmark counts and is byte-stable") {
  run("gen --kind figure1 --beta 0.25 --out " + path_of("p025.json"));
  RunResult a = run("count-critical " + path_of("p025.json") + " --starts 300 --seed 1");
  CHECK(a.exit_code == 0);
  REQUIRE(!a.out.empty());
  CHECK(a.out.back() == '\n');
  std::istringstream lines(a.out);
  std::string line, last;
  int n_lines = 0;
  while (std::getline(lines, line)) {
    ++n_lines;
    last = line;
    json e = json::parse(line);  // every line is a standalone JSON document
    if (n_lines <= 6) CHECK(e.contains("z"));
  }
  json summary = json::parse(last);
  CHECK(summary["n_stationary"] == 6);
  CHECK(summary["n_minima"] == 2);
  CHECK(summary["n_starts"] == 300);
  CHECK(n_lines == 7);  // 6 catalog entries + summary

  RunResult b = run("count-critical " + path_of("p025.json") + " --starts 300 --seed 1");
  CHECK(b.out == a.out);
}

TEST_CASE("solve emits a stationary point and respects the seed") {
  run("gen --kind figure1 --beta 0.25 --out " + path_of("p025.json"));
  RunResult a = run("solve " + path_of("p025.json") + " --seed 3");
  CHECK(a.exit_code == 0);
  json res = json::parse(a.out);
  CHECK(res["grad_norm"].get<double>() <= 1e-10);
  CHECK(res["f"].get<double>() >= 0.0625 - 1e-12);
  RunResult b = run("solve " + path_of("p025.json") + " --seed 3");
  CHECK(b.out == a.out);
  RunResult c = run("solve " + path_of("p025.json") + " --seed 4");
  CHECK(c.exit_code == 0);  // different seed still valid (may hit another basin)
}

TEST_CASE("certify labels a known minimum") {
  run("gen --kind figure1 --beta 0.25 --out " + path_of("p025.json"));
  // global minimizer of the benchmark problem at beta = 0.25
  std::ofstream(path_of("zmin.json"))
      << "{\"re\": [-0.70710678118654757, 0, 0.70710678118654757]}\n";
  RunResult r = run("certify " + path_of("p025.json") + " " + path_of("zmin.json"));
  CHECK(r.exit_code == 0);
  json cert = json::parse(r.out);
  CHECK(cert["label"] == "strict-local-min");
  CHECK(cert["global"] == "certified");
  CHECK(cert["fourth_order_necessary"] == "necessary-pass");
  CHECK(cert["mu_min"].get<double>() > 0.0);
}

TEST_CASE("certify flags a non-stationary point") {
  run("gen --kind figure1 --beta 0.25 --out " + path_of("p025.json"));
  std::ofstream(path_of("znot.json")) << "{\"re\": [0.6, 0.8, 0]}\n";
  RunResult r = run("certify " + path_of("p025.json") + " " + path_of("znot.json"));
  CHECK(r.exit_code == 0);
  json cert = json::parse(r.out);
  CHECK(cert["label"] == "not-stationary");
  CHECK(cert["fourth_order_necessary"] == "not-applicable");
}

TEST_CASE("diag enumerates classes on a diagonal problem") {
  run("gen --kind diagonal-uniform --n 4 --beta 1 --seed 7 --out " + path_of("d.json"));
  RunResult r = run("diag " + path_of("d.json"));
  CHECK(r.exit_code == 0);
  std::istringstream lines(r.out);
  std::string line;
  int n_lines = 0;
  bool saw_full_support = false;
  while (std::getline(lines, line)) {
    ++n_lines;
    json e = json::parse(line);
    double sum = 0.0;
    for (double u : e["u"]) sum += u;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    if (e["support"].size() == 4) saw_full_support = true;
  }
  CHECK(n_lines >= 1);
  CHECK(saw_full_support);
}

TEST_CASE("diag rejects a non-diagonal problem") {
  run("gen --kind figure1 --beta 0.25 --out " + path_of("p025.json"));
  RunResult r = run("diag " + path_of("p025.json"));
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("NotDiagonal") != std::string::npos);
  CHECK(r.out.empty());
}

TEST_CASE("rankone solves the balanced instance exactly") {
  std::ofstream(path_of("a.json")) << "{\"re\": [1, 1, 1, 1]}\n";
  RunResult r = run("rankone " + path_of("a.json") + " --beta 0.8");
  CHECK(r.exit_code == 0);
  json res = json::parse(r.out);
  CHECK(res["mode"] == "orthogonal");
  CHECK(res["f_star"].get<double>() == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(res["certificate"]["grad_norm"].get<double>() <= 1e-10);
}

TEST_CASE("classify emits a region label with thresholds") {
  run("gen --kind figure1 --beta 0.25 --out " + path_of("p025.json"));
  std::ofstream(path_of("e1.json")) << "{\"re\": [1, 0, 0]}\n";
  RunResult r = run("classify " + path_of("p025.json") + " " + path_of("e1.json") +
                    " --gamma 1");
  CHECK(r.exit_code == 0);
  json res = json::parse(r.out);
  CHECK((res["label"]["regime"] == "large-beta" || res["label"]["regime"] == "small-beta"));
  CHECK((res["label"]["r1"].get<bool>() || res["label"]["r2"].get<bool>() ||
         res["label"]["r3"].get<bool>()));
  CHECK(res["thresholds"]["beta_large"].get<double>() ==
        doctest::Approx(48.0 * std::sqrt(27.0)).epsilon(1e-12));
}

TEST_CASE("kl estimates the Morse exponent at a strict minimum") {
  run("gen --kind figure1 --beta 0.25 --out " + path_of("p025.json"));
  std::ofstream(path_of("zmin.json"))
      << "{\"re\": [-0.70710678118654757, 0, 0.70710678118654757]}\n";
  RunResult r = run("kl " + path_of("p025.json") + " " + path_of("zmin.json") +
                    " --seed 5");
  CHECK(r.exit_code == 0);
  json res = json::parse(r.out);
  double theta = res["theta_hat"].get<double>();
  CHECK(theta > 0.4);
  CHECK(theta < 0.6);
  CHECK(res["n_samples"].get<int>() >= 100);
}

TEST_CASE("kl rejects a non-stationary point") {
  run("gen --kind figure1 --beta 0.25 --out " + path_of("p025.json"));
  std::ofstream(path_of("znot.json")) << "{\"re\": [0.6, 0.8, 0]}\n";
  RunResult r = run("kl " + path_of("p025.json") + " " + path_of("znot.json"));
  CHECK(r.exit_code == 4);
  CHECK(r.err.find("NotStationary") != std::string::npos);
}

TEST_CASE("counterexample writes a problem/point pair") {
  RunResult r = run("counterexample --n 5 --C 1 --eps 0.25 --out " + path_of("cex"));
  CHECK(r.exit_code == 0);
  json p = json::parse(slurp(work_dir() / "cex.problem.json"));
  json z = json::parse(slurp(work_dir() / "cex.point.json"));
  CHECK(p["n"] == 5);
  CHECK(z["re"].size() == 5);
  RunResult c = run("certify " + path_of("cex.problem.json") + " " +
                    path_of("cex.point.json"));
  json cert = json::parse(c.out);
  CHECK(cert["grad_norm"].get<double>() <= 1e-10);
  CHECK(std::abs(cert["mu_min"].get<double>()) <= 1e-8);
}

TEST_CASE("perturb reports a bound-respecting trial") {
  run("gen --kind diagonal-uniform --n 8 --beta 1 --seed 11 --out " + path_of("d8.json"));
  RunResult r = run("perturb " + path_of("d8.json") + " --sigma 0.01 --seed 2");
  CHECK(r.exit_code == 0);
  json t = json::parse(r.out);
  CHECK(t["lhs"].get<double>() <= t["rhs"].get<double>());
  CHECK(t["sigma"] == 0.01);
}

TEST_CASE("landscape-grid produces the advertised CSV") {
  run("gen --kind figure1 --beta 3.25 --out " + path_of("p325.json"));
  RunResult r = run("landscape-grid " + path_of("p325.json") + " --res 40x20 --out " +
                    path_of("grid.csv"));
  CHECK(r.exit_code == 0);
  std::string csv = slurp(work_dir() / "grid.csv");
  CHECK(csv.rfind("phi,theta,f\n", 0) == 0);
  CHECK(count_lines(csv) == 40 * 20 + 1);
  // default resolution 400x200 gives 80000 data rows
  RunResult d = run("landscape-grid " + path_of("p325.json") + " --out " +
                    path_of("grid_full.csv"));
  CHECK(d.exit_code == 0);
  CHECK(count_lines(slurp(work_dir() / "grid_full.csv")) == 80001);
}

TEST_CASE("landscape-grid rejects unsupported problems and resolutions") {
  run("gen --kind dense-hermitian --n 3 --beta 1 --out " + path_of("ph.json"));
  RunResult r = run("landscape-grid " + path_of("ph.json"));
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("GridUnsupported") != std::string::npos);
  run("gen --kind figure1 --beta 0.25 --out " + path_of("p025.json"));
  RunResult b = run("landscape-grid " + path_of("p025.json") + " --res nonsense");
  CHECK(b.exit_code == 2);
  CHECK(b.err.find("BadResolution") != std::string::npos);
}

TEST_CASE("error contract: unknown flags, missing files, schema flag") {
  RunResult r = run("solve nowhere.json --bogus-flag");
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("BadInvocation") != std::string::npos);
  CHECK(count_lines(r.err) == 1);

  RunResult m = run("solve " + path_of("does-not-exist.json"));
  CHECK(m.exit_code == 2);
  CHECK(m.err.find("FileNotFound") != std::string::npos);

  RunResult s = run("--print-schema");
  CHECK(s.exit_code == 0);
  json schema = json::parse(s.out);
  CHECK(schema["schema_version"] == "1.0");
  CHECK(schema["documents"].contains("problem"));

  RunResult none = run("");
  CHECK(none.exit_code == 2);
}

TEST_CASE("malformed problem documents exit 2") {
  std::ofstream(path_of("bad.json")) << "{\"n\": 2, \"beta\": -1}";
  RunResult r = run("solve " + path_of("bad.json"));
  CHECK(r.exit_code == 2);
  CHECK(count_lines(r.err) == 1);
}
