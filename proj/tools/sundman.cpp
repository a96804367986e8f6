#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <thread>

#include "sundman/errors.hpp"
#include "sundman/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sundman;

namespace {

constexpr int kInputError = 1;

struct Common {
  std::string output;
  bool timing = false;
  std::string format = "json";
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-o,--output", c.output, "write the report here instead of stdout");
  cmd->add_flag("--timing", c.timing, "include per-stage wall-clock seconds");
  cmd->add_option("--format", c.format, "json or text")->check(CLI::IsMember({"json", "text"}));
}

void emit(const json& report, const Common& c) {
  std::string body = c.format == "text" ? report_text(report) : report.dump(2) + "\n";
  if (c.output.empty()) {
    std::cout << body;
    return;
  }
  std::ofstream out(c.output);
  if (!out) throw InvalidInput("cannot write " + c.output);
  out << body;
}

// exit codes 2 and 3 also get an error object on stderr
void report_failure(const json& report) {
  for (const auto& s : report["stages"]) {
    if (s["status"] == "ok" || s["status"] == "skipped") continue;
    json err = {{"kind", s.value("error_kind", "StageFailure")},
                {"stage", s["stage"]},
                {"message", s.value("message", "")}};
    std::cerr << json{{"error", err}}.dump() << "\n";
    return;
  }
}

int finish(const json& report, const Common& c) {
  emit(report, c);
  int code = report["exit_code"].get<int>();
  if (code != 0) report_failure(report);
  return code;
}

json run_problem(const ProblemFile& problem, const std::string& command, bool timing) {
  PreparedProblem prep = prepare(problem);
  Stage last = command == "all" ? Stage::Verify : stage_from_string(command);
  json r = report_json(run_pipeline(prep.ode, prep.options, last, prep.verify), command, timing);
  if (!problem.name.empty()) r["name"] = problem.name;
  return r;
}

std::map<std::string, double> parse_params(const std::vector<std::string>& raw) {
  std::map<std::string, double> out;
  for (const auto& kv : raw) {
    auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw InvalidInput("--param expects name=value, got '" + kv + "'");
    try {
      std::size_t used = 0;
      std::string val = kv.substr(eq + 1);
      out[kv.substr(0, eq)] = std::stod(val, &used);
      if (used != val.size()) throw std::invalid_argument(val);
    } catch (const std::logic_error&) {
      throw InvalidInput("--param " + kv + ": value is not a number");
    }
  }
  return out;
}

// one report per file; files are independent, so they run on a small pool
int run_corpus(const std::string& dir, const std::string& out_dir, unsigned jobs, bool timing) {
  if (!fs::is_directory(dir)) throw InvalidInput(dir + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (!out_dir.empty()) fs::create_directories(out_dir);

  std::vector<json> rows(files.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < files.size();) {
      json row = {{"file", files[i].filename().string()}};
      try {
        json r = run_problem(load_problem(files[i].string()), "all", timing);
        row["status"] = r["status"];
        row["exit_code"] = r["exit_code"];
        if (r.contains("solution")) row["solution"] = r["solution"]["text"];
        if (!out_dir.empty()) {
          std::ofstream out(fs::path(out_dir) / (files[i].stem().string() + ".report.json"));
          out << r.dump(2) << "\n";
        }
      } catch (const std::exception& e) {
        row["status"] = "input-error";
        row["exit_code"] = kInputError;
        row["error"] = error_json(e)["error"];
      }
      rows[i] = row;
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(files.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  int code = 0;
  for (const auto& r : rows) {
    int c = r["exit_code"].get<int>();
    if (c == kInputError) code = kInputError;
    else if (c == 3 && code == 0) code = 3;
  }
  std::cout << json{{"schema_version", kSchemaVersion}, {"dir", dir}, {"results", rows}}.dump(2) << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"S-linearization of y'' + F2 y'^2 + F1 y' + F = 0 by generalized Sundman transformations"};
  app.require_subcommand(1);

  const std::vector<std::pair<std::string, std::string>> stage_cmds = {
      {"classify", "S-functions and case classification"},
      {"criterion", "... plus the auxiliary function g"},
      {"integral", "... plus the first integral A y' + B"},
      {"transform", "... plus the invariant I and psi, phi"},
      {"solve", "... plus the solution family"},
      {"verify", "... plus numeric verification"},
      {"all", "the full pipeline"}};
  std::string input;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  Common common;
  for (const auto& [name, help] : stage_cmds) {
    auto* cmd = app.add_subcommand(name, help);
    cmd->add_option("-i,--input", input, "problem file (JSON)")->required();
    cmd->add_option("--seed", seed, "sampling seed (overrides the file)");
    cmd->add_option("--tol", tol, "identity-test tolerance (overrides the file)")->check(CLI::PositiveNumber);
    add_common(cmd, common);
  }

  auto* geo = app.add_subcommand("geodesic", "geodesics on a surface of revolution");
  std::string profile, f_text;
  std::vector<std::string> raw_params;
  auto* prof_opt = geo->add_option("--profile", profile, "catalog profile name");
  auto* f_opt = geo->add_option("--f", f_text, "custom radius function f(y)");
  prof_opt->excludes(f_opt);
  geo->add_option("--param", raw_params, "bind a profile constant, e.g. b=0");
  add_common(geo, common);

  auto* corpus = app.add_subcommand("corpus", "run every problem file in a directory");
  std::string dir, out_dir;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  bool corpus_timing = false;
  corpus->add_option("--dir", dir, "directory of problem files")->required();
  corpus->add_option("--out-dir", out_dir, "write <name>.report.json files here");
  corpus->add_option("-j,--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  corpus->add_flag("--timing", corpus_timing, "include per-stage timings in written reports");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kInputError;
  }

  try {
    if (geo->parsed()) {
      if (profile.empty() == f_text.empty()) throw InvalidInput("give exactly one of --profile or --f");
      auto params = parse_params(raw_params);
      Profile p = profile.empty() ? profile_from_expr(f_text, params) : profile_by_name(profile, params);
      return finish(geodesic_report_json(analyze_geodesics(p), common.timing), common);
    }
    if (corpus->parsed()) return run_corpus(dir, out_dir, jobs, corpus_timing);
    for (const auto* cmd : app.get_subcommands()) {
      ProblemFile problem = load_problem(input);
      if (seed) problem.seed = *seed;
      if (tol) problem.tol = *tol;
      return finish(run_problem(problem, cmd->get_name(), common.timing), common);
    }
  } catch (const std::exception& e) {
    std::cerr << error_json(e).dump() << "\n";
    return kInputError;
  }
  return kInputError;
}
