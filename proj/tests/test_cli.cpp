#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "sundman/errors.hpp"
#include "sundman/parse.hpp"
#include "sundman/report.hpp"

using namespace sundman;
using namespace sundman::expr;
using nlohmann::json;

namespace {

const std::string kBin = SUNDMAN_BIN;
const std::string kProblems = PROBLEMS_DIR;
const std::string kGolden = GOLDEN_DIR;

struct Invocation {
  int code = -1;
  std::string out, err;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Invocation run(const std::string& args) {
  static int counter = 0;
  std::string err_path = "cli_stderr_" + std::to_string(counter++) + ".txt";
  std::string cmd = kBin + " " + args + " 2>" + err_path;
  Invocation r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(err_path);
  std::remove(err_path.c_str());
  return r;
}

std::string problem(const std::string& name) { return kProblems + "/" + name + ".json"; }

// numbers compare with a tolerance (platform libm differences), everything else exactly
void compare(const json& want, const json& got, const std::string& where) {
  CAPTURE(where);
  if (want.is_number() && got.is_number()) {
    double a = want.get<double>(), b = got.get<double>();
    CHECK(std::fabs(a - b) <= 1e-6 * std::max({1.0, std::fabs(a), std::fabs(b)}));
    return;
  }
  REQUIRE(want.type() == got.type());
  if (want.is_object()) {
    CHECK(want.size() == got.size());
    for (const auto& [k, v] : want.items()) {
      if (!got.contains(k)) {
        FAIL_CHECK("missing key " << where << "/" << k);
        continue;
      }
      compare(v, got[k], where + "/" + k);
    }
  } else if (want.is_array()) {
    REQUIRE(want.size() == got.size());
    for (std::size_t i = 0; i < want.size(); ++i) compare(want[i], got[i], where + "/" + std::to_string(i));
  } else {
    CHECK(want == got);
  }
}

// SUNDMAN_UPDATE_GOLDEN=1 rewrites the files instead of comparing
void golden(const std::string& file, const std::string& args) {
  Invocation r = run(args);
  json got = json::parse(r.out);
  std::string path = kGolden + "/" + file;
  if (std::getenv("SUNDMAN_UPDATE_GOLDEN")) {
    std::ofstream(path) << got.dump(2) << "\n";
    return;
  }
  compare(json::parse(slurp(path)), got, file);
}

void check_round_trip(const json& report) {
  ParseOptions opt;
  opt.constants = report_constants(report);
  auto exprs = report_expressions(report);
  CHECK(exprs.size() >= 3);
  for (const auto& [ptr, text] : exprs) {
    CAPTURE(ptr);
    CAPTURE(text);
    Expr e = parse(text, opt);
    CHECK(to_string(e) == text);
  }
}

}  // namespace

TEST_CASE("oscillator end to end") {
  Invocation r = run("all -i " + problem("oscillator"));
  CHECK(r.code == 0);
  CHECK(r.err.empty());
  json j = json::parse(r.out);
  CHECK(j["schema_version"] == kSchemaVersion);
  CHECK(j["solution"]["text"] == "erfi(y/sqrt(2)) = C1*x + C2");
  CHECK(j["classification"]["case"] == "Case1");
  CHECK(j["transform"]["point_transformation"] == true);
  CHECK(j["verification"]["pass"] == true);
  check_round_trip(j);
}

TEST_CASE("tangent equation end to end") {
  Invocation r = run("all -i " + problem("tangent"));
  CHECK(r.code == 0);
  json j = json::parse(r.out);
  CHECK(j["classification"]["case"] == "Case2");
  CHECK(j["transform"]["point_transformation"] == false);
  CHECK(j["solution"]["degenerate_text"] == "x*sin(y) = c1");
  CHECK(j["verification"]["max_ode_residual"].get<double>() <= 1e-8);
  check_round_trip(j);
}

TEST_CASE("negative control exits 2") {
  Invocation r = run("classify -i " + problem("quadratic-force"));
  CHECK(r.code == 2);
  json j = json::parse(r.out);
  CHECK(j["classification"]["case"] == "NotSLinearizable");
  CHECK(j["classification"]["failing"] == "S2");
  CHECK(std::fabs(j["classification"]["evidence"]["worst_residual"].get<double>() - 2) <= 1e-9);
  json err = json::parse(r.err);
  CHECK(err["error"]["kind"] == "NotSLinearizable");
  CHECK(err["error"]["stage"] == "classify");
}

TEST_CASE("stage prefixes") {
  const char* stages[] = {"classify", "criterion", "integral", "transform", "solve", "verify"};
  for (std::size_t i = 0; i < 6; ++i) {
    CAPTURE(stages[i]);
    Invocation r = run(std::string(stages[i]) + " -i " + problem("oscillator"));
    CHECK(r.code == 0);
    json j = json::parse(r.out);
    CHECK(j["stages"].size() == i + 1);
    CHECK(j["stages"].back()["stage"] == stages[i]);
    CHECK(j.contains("solution") == (i >= 4));
    CHECK(j.contains("verification") == (i == 5));
  }
}

TEST_CASE("geodesic command") {
  Invocation r = run("geodesic --profile sphere");
  CHECK(r.code == 0);
  json j = json::parse(r.out);
  CHECK(j["geodesic"]["curvature"].get<double>() == doctest::Approx(1.0));
  CHECK(j["solution"]["text"] == "cos(y) = C1*sin(x)*sin(y) + C2*sin(y)*cos(x)");
  check_round_trip(j);

  r = run("geodesic --profile plane --param b=0");
  CHECK(r.code == 0);
  j = json::parse(r.out);
  CHECK(j["geodesic"]["curvature"].get<double>() == doctest::Approx(0.0));
  CHECK(j["solution"]["text"] == "1 = C1*y*sin(x) + C2*y*cos(x)");

  r = run("geodesic --profile plane");
  j = json::parse(r.out);
  CHECK(j["constants"] == json::array({"C1", "C2", "b"}));
  check_round_trip(j);

  r = run("geodesic --profile pseudosphere");
  j = json::parse(r.out);
  CHECK(j["geodesic"]["curvature"].get<double>() == doctest::Approx(-1.0));
  CHECK(j["solution"]["text"] == "exp(-2*y) + x^2 = C1*x + 2*C2");
}

TEST_CASE("input errors exit 1 with a JSON error") {
  Invocation r = run("all -i " + problem("no-such-problem"));
  CHECK(r.code == 1);
  CHECK(json::parse(r.err)["error"]["kind"] == "InvalidInput");
  r = run("geodesic --profile torus");
  CHECK(r.code == 1);
  r = run("geodesic --profile sphere --f 'sin(y)'");
  CHECK(r.code == 1);
  r = run("all");
  CHECK(r.code == 1);
  r = run("all -i " + problem("oscillator") + " --tol -1");
  CHECK(r.code == 1);

  CHECK_THROWS_AS(problem_from_json(json{{"F", "0"}, {"F1", "0"}}), InvalidInput);
  CHECK_THROWS_AS(problem_from_json(json{{"F", "0"}, {"F1", "0"}, {"F2", "0"}, {"box", {{"x", {2, 1}}}}}),
                  InvalidInput);
  CHECK_THROWS_AS(problem_from_json(json{{"F", "0"}, {"F1", "0"}, {"F2", "0"}, {"options", {{"tol", 0}}}}),
                  InvalidInput);
  CHECK_THROWS_AS(prepare(problem_from_json(json{{"F", "z"}, {"F1", "0"}, {"F2", "0"}})), InvalidInput);
  CHECK_THROWS_AS(prepare(problem_from_json(json{{"F", "0"}, {"F1", "0"}, {"F2", "0"}, {"options", {{"eta", {"cube"}}}}})),
                  InvalidInput);
}

TEST_CASE("problem files round-trip") {
  ProblemFile p = load_problem(problem("tangent"));
  ProblemFile q = problem_from_json(to_json(p));
  CHECK(to_json(q) == to_json(p));
  CHECK(q.init.has_value());
  CHECK(q.box.at("y").lo == 0.2);
}

TEST_CASE("reports are deterministic") {
  for (const char* name : {"oscillator", "tangent", "geodesic-plane"}) {
    CAPTURE(name);
    Invocation a = run(std::string("all -i ") + problem(name));
    Invocation b = run(std::string("all -i ") + problem(name));
    CHECK(a.out == b.out);
  }
  // a different seed changes the sample points but not the symbolic answer
  json a = json::parse(run("all -i " + problem("tangent")).out);
  json b = json::parse(run("all -i " + problem("tangent") + " --seed 7").out);
  CHECK(a["solution"] == b["solution"]);
  CHECK(a["classification"]["s_functions"]["S1"]["worst_point"] !=
        b["classification"]["s_functions"]["S1"]["worst_point"]);
}

TEST_CASE("timing is opt-in") {
  json j = json::parse(run("classify -i " + problem("oscillator")).out);
  CHECK_FALSE(j["stages"][0].contains("seconds"));
  j = json::parse(run("classify --timing -i " + problem("oscillator")).out);
  CHECK(j["stages"][0].contains("seconds"));
}

TEST_CASE("corpus mode") {
  Invocation r = run("corpus --dir " + kProblems + " -j 4");
  CHECK(r.code == 0);
  json j = json::parse(r.out);
  REQUIRE(j["results"].size() == 9);
  for (const auto& row : j["results"]) {
    CAPTURE(row.dump());
    int want = row["file"] == "quadratic-force.json" ? 2 : 0;
    CHECK(row["exit_code"] == want);
  }
}

TEST_CASE("golden reports") {
  golden("oscillator.all.json", "all -i " + problem("oscillator"));
  golden("tangent.all.json", "all -i " + problem("tangent"));
  golden("quadratic-force.classify.json", "classify -i " + problem("quadratic-force"));
  golden("sphere.geodesic.json", "geodesic --profile sphere");
  golden("pseudosphere.geodesic.json", "geodesic --profile pseudosphere");
}
