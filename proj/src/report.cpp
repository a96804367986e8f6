#include "sundman/report.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "sundman/errors.hpp"
#include "sundman/parse.hpp"

namespace sundman {

using nlohmann::json;
using namespace expr;

namespace {

const std::set<std::string> kExprKeys = {"F",   "F1", "F2", "S1", "S2",  "S3",  "S4",     "g",   "h",
                                         "H",   "k",  "q",  "P",  "fq",  "A",   "B",      "I",   "psi",
                                         "phi", "mu", "lhs", "rhs", "degenerate_rhs", "f", "kappa", "height", "expr"};

constexpr std::size_t label_width = 12;

[[noreturn]] void bad(const std::string& field, const std::string& why) {
  throw InvalidInput("problem field '" + field + "': " + why);
}

template <class T>
T get(const json& j, const std::string& key, const std::string& path) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    bad(path, "missing or of the wrong type");
  }
}

double positive(const json& j, const std::string& key, const std::string& path) {
  double v = get<double>(j, key, path);
  if (!(v > 0) || !std::isfinite(v)) bad(path, "must be a positive number");
  return v;
}

std::string str(const Expr& e) { return to_string(e); }

json zero_json(const ZeroTest& z) {
  json pt = json::object();
  for (const auto& [k, v] : z.worst_point.values) pt[k] = v;
  return {{"zero", z.zero},           {"worst_residual", z.worst_residual}, {"worst_scaled", z.worst_scaled},
          {"worst_point", pt},        {"evaluated", z.evaluated},           {"singular", z.singular}};
}

json s_entry(const Expr& e, const ZeroTest& z) {
  json j = zero_json(z);
  j["expr"] = str(e);
  return j;
}

json fi_json(const FirstIntegral& fi) {
  return {{"A", str(fi.A)},
          {"B", str(fi.B)},
          {"provenance", fi.provenance},
          {"closed_form", fi.closed_form},
          {"inner_closed", fi.inner_closed}};
}

json opt_double(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json state_json(const StatePoint& s) { return json::array({s.x, s.y, s.yp}); }

void collect_constants(const Expr& e, std::set<std::string>& out) {
  for (const auto& c : arbitrary_constants(e)) out.insert(c);
}

std::string overall_status(const PipelineRun& run) {
  if (run.not_linearizable()) return "not-linearizable";
  return run.ok() ? "ok" : "failed";
}

void walk(const json& j, const std::string& ptr, std::map<std::string, std::string>& out) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      std::string p = ptr + "/" + k;
      if (v.is_string() && kExprKeys.count(k)) out[p] = v.get<std::string>();
      else walk(v, p, out);
    }
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) walk(j[i], ptr + "/" + std::to_string(i), out);
  }
}

}  // namespace

ProblemFile problem_from_json(const json& j) {
  if (!j.is_object()) throw InvalidInput("problem file must be a JSON object");
  if (j.contains("schema_version") && j["schema_version"] != kSchemaVersion)
    bad("schema_version", "unsupported version " + j["schema_version"].dump());
  ProblemFile p;
  if (j.contains("name")) p.name = get<std::string>(j, "name", "name");
  p.F = get<std::string>(j, "F", "F");
  p.F1 = get<std::string>(j, "F1", "F1");
  p.F2 = get<std::string>(j, "F2", "F2");
  if (j.contains("constants"))
    for (const auto& c : get<std::vector<std::string>>(j, "constants", "constants")) p.constants.insert(c);
  if (j.contains("box")) {
    const json& b = j["box"];
    if (!b.is_object()) bad("box", "must map variable names to [lo, hi]");
    for (const auto& [var, iv] : b.items()) {
      if (!iv.is_array() || iv.size() != 2 || !iv[0].is_number() || !iv[1].is_number())
        bad("box." + var, "must be [lo, hi]");
      double lo = iv[0].get<double>(), hi = iv[1].get<double>();
      if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) bad("box." + var, "needs finite lo < hi");
      p.box[var] = {lo, hi};
    }
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) bad("seed", "must be a non-negative integer");
    p.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("options")) {
    const json& o = j["options"];
    if (!o.is_object()) bad("options", "must be an object");
    if (o.contains("tol")) p.tol = positive(o, "tol", "options.tol");
    if (o.contains("samples")) {
      int n = get<int>(o, "samples", "options.samples");
      if (n < 8) bad("options.samples", "must be at least 8");
      p.samples = n;
    }
    if (o.contains("drift_tol")) p.verify_tol.drift = positive(o, "drift_tol", "options.drift_tol");
    if (o.contains("family_tol")) p.verify_tol.family = positive(o, "family_tol", "options.family_tol");
    if (o.contains("linearity_tol")) p.verify_tol.linearity = positive(o, "linearity_tol", "options.linearity_tol");
    if (o.contains("g_ansatz")) p.g_ansatz = get<std::vector<std::string>>(o, "g_ansatz", "options.g_ansatz");
    if (o.contains("eta")) p.eta = get<std::vector<std::string>>(o, "eta", "options.eta");
  }
  if (j.contains("trajectory")) {
    const json& t = j["trajectory"];
    if (!t.is_object()) bad("trajectory", "must be an object");
    if (t.contains("init")) {
      auto v = get<std::vector<double>>(t, "init", "trajectory.init");
      if (v.size() != 3) bad("trajectory.init", "must be [x0, y0, yp0]");
      p.init = StatePoint{v[0], v[1], v[2]};
    }
    if (t.contains("step")) {
      p.step = positive(t, "step", "trajectory.step");
      if (p.step > 0.01) bad("trajectory.step", "must not exceed 0.01");
    }
    if (t.contains("steps")) {
      p.steps = get<int>(t, "steps", "trajectory.steps");
      if (p.steps < 2) bad("trajectory.steps", "must be at least 2");
    }
  }
  return p;
}

json to_json(const ProblemFile& p) {
  json j = {{"schema_version", kSchemaVersion}, {"F", p.F}, {"F1", p.F1}, {"F2", p.F2}};
  if (!p.name.empty()) j["name"] = p.name;
  if (!p.constants.empty()) j["constants"] = p.constants;
  if (!p.box.empty()) {
    json b = json::object();
    for (const auto& [v, iv] : p.box) b[v] = {iv.lo, iv.hi};
    j["box"] = b;
  }
  if (p.seed) j["seed"] = *p.seed;
  json o = {{"drift_tol", p.verify_tol.drift},
            {"family_tol", p.verify_tol.family},
            {"linearity_tol", p.verify_tol.linearity}};
  if (p.tol) o["tol"] = *p.tol;
  if (p.samples) o["samples"] = *p.samples;
  if (!p.g_ansatz.empty()) o["g_ansatz"] = p.g_ansatz;
  if (!p.eta.empty()) o["eta"] = p.eta;
  j["options"] = o;
  json t = {{"step", p.step}, {"steps", p.steps}};
  if (p.init) t["init"] = state_json(*p.init);
  j["trajectory"] = t;
  return j;
}

ProblemFile load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidInput(path + ": " + e.what());
  }
  return problem_from_json(j);
}

PreparedProblem prepare(const ProblemFile& p) {
  ParseOptions popt;
  popt.constants = p.constants;
  auto coefficient = [&](const std::string& text, const std::string& field) {
    try {
      Expr e = parse(text, popt);
      for (const auto& v : free_variables(e))
        if (v != "x" && v != "y") bad(field, "unexpected variable '" + v + "'");
      return e;
    } catch (const InvalidInput&) {
      throw;
    } catch (const Error& e) {
      bad(field, e.what());
    }
  };
  PreparedProblem out;
  out.ode = {coefficient(p.F, "F"), coefficient(p.F1, "F1"), coefficient(p.F2, "F2")};
  SampleBox& box = out.options.box;
  for (const auto& [v, iv] : p.box) box.set(v, iv.lo, iv.hi);
  if (p.seed) box.seed = *p.seed;
  if (p.tol) box.tol = *p.tol;
  if (p.samples) box.samples = *p.samples;
  for (std::size_t i = 0; i < p.g_ansatz.size(); ++i) {
    std::string field = "options.g_ansatz[" + std::to_string(i) + "]";
    Expr g = coefficient(p.g_ansatz[i], field);
    if (depends_on(g, "y")) bad(field, "must depend on x only");
    out.options.g_ansatz.push_back(g);
  }
  if (!p.eta.empty()) {
    out.options.eta_catalog.clear();
    for (const auto& name : p.eta) {
      try {
        out.options.eta_catalog.push_back(eta_from_string(name));
      } catch (const std::invalid_argument& e) {
        bad("options.eta", e.what());
      }
    }
  }
  out.verify.init = p.init;
  out.verify.step = p.step;
  out.verify.steps = p.steps;
  out.verify.tol = p.verify_tol;
  return out;
}

json report_json(const PipelineRun& run, const std::string& command, bool timing) {
  json r;
  r["schema_version"] = kSchemaVersion;
  r["command"] = command;
  r["status"] = overall_status(run);
  r["exit_code"] = exit_code(run);
  r["ode"] = {{"F", str(run.ode.F)}, {"F1", str(run.ode.F1)}, {"F2", str(run.ode.F2)}};

  std::set<std::string> constants;
  for (const Expr* e : {&run.ode.F, &run.ode.F1, &run.ode.F2}) collect_constants(*e, constants);

  if (run.cls) {
    const auto& c = *run.cls;
    json s = {{"S1", s_entry(c.s.S1, c.s.s1_test)}, {"S2", s_entry(c.s.S2, c.s.s2_test)}};
    if (c.s.S3) s["S3"] = s_entry(*c.s.S3, *c.s.s3_test);
    if (c.s.S4) s["S4"] = s_entry(*c.s.S4, *c.s.s4_test);
    json cj = {{"case", to_string(c.kind)}, {"s_functions", s}};
    if (c.kind == Case::NotSLinearizable) {
      cj["failing"] = c.failing;
      cj["evidence"] = zero_json(c.evidence);
    }
    r["classification"] = cj;
  }
  if (run.aux) {
    const auto& a = *run.aux;
    json aj = {{"g", str(a.g)}, {"h", str(a.h)}, {"H", str(a.H)}, {"provenance", a.provenance}};
    if (a.k) aj["k"] = str(*a.k);
    if (a.q) aj["q"] = str(*a.q);
    if (a.P) aj["P"] = str(*a.P);
    if (a.fq) aj["fq"] = str(*a.fq);
    r["criterion"] = aj;
  }
  if (run.fi) r["first_integral"] = fi_json(*run.fi);
  if (run.fi_mr || !run.mr_error.empty()) {
    json m = run.fi_mr ? fi_json(*run.fi_mr) : json::object();
    if (run.affine)
      m["affine"] = {{"c1", run.affine->c1},
                     {"c2", run.affine->c2},
                     {"max_rel_error", run.affine->max_rel_error},
                     {"points", run.affine->points},
                     {"ok", run.affine->ok}};
    if (!run.mr_error.empty()) m["error"] = run.mr_error;
    r["cross_check"] = m;
  }
  if (run.reduction) r["reduction"] = {{"I", str(run.reduction->I)}, {"method", run.reduction->method}};
  if (run.transform) {
    const auto& t = *run.transform;
    r["transform"] = {{"I", str(t.I)},
                      {"eta", to_string(t.eta)},
                      {"psi", str(t.psi)},
                      {"phi", str(t.phi)},
                      {"point_transformation", t.point_transformation},
                      {"phi_alt_agrees", t.phi_alt_agrees ? json(*t.phi_alt_agrees) : json(nullptr)}};
  }
  if (run.family) {
    const auto& f = *run.family;
    json fj = {{"text", f.text},
               {"lhs", str(f.lhs)},
               {"rhs", str(f.rhs)},
               {"psi", str(f.psi)},
               {"mu_implicit", f.mu_implicit}};
    if (f.mu) fj["mu"] = str(*f.mu);
    if (f.degenerate_rhs) {
      fj["degenerate_rhs"] = str(*f.degenerate_rhs);
      fj["degenerate_text"] = f.degenerate_text;
    }
    for (const Expr* e : {&f.lhs, &f.rhs}) collect_constants(*e, constants);
    if (f.degenerate_rhs) collect_constants(*f.degenerate_rhs, constants);
    r["solution"] = fj;
  }
  if (run.verification) {
    const auto& v = *run.verification;
    r["verification"] = {
        {"max_drift", opt_double(v.max_drift)},
        {"max_ode_residual", opt_double(v.max_ode_residual)},
        {"max_utt", opt_double(v.max_utt)},
        {"drift_pass", v.drift_pass},
        {"residual_pass", v.residual_pass},
        {"utt_pass", v.utt_pass},
        {"pass", v.pass()},
        {"tolerances", {{"drift", v.tol.drift}, {"family", v.tol.family}, {"linearity", v.tol.linearity}}},
    };
  }
  if (run.trajectory_init)
    r["trajectory"] = {{"init", state_json(*run.trajectory_init)}, {"samples", run.trajectory_samples}};

  json stages = json::array();
  for (const auto& s : run.stages) {
    json sj = {{"stage", s.stage}, {"status", s.status}};
    if (!s.error_kind.empty()) sj["error_kind"] = s.error_kind;
    if (!s.message.empty()) sj["message"] = s.message;
    if (timing) sj["seconds"] = s.seconds;
    stages.push_back(sj);
  }
  r["stages"] = stages;
  r["constants"] = constants;
  return r;
}

json geodesic_report_json(const GeodesicResult& g, bool timing) {
  json r = report_json(g.run, "geodesic", timing);
  const Profile& p = g.profile;
  json box = json::object();
  for (const auto& [v, iv] : p.box.intervals) box[v] = {iv.lo, iv.hi};
  json gj = {{"profile", p.name},
             {"f", str(p.f)},
             {"box", box},
             {"curvature", opt_double(g.curvature)},
             {"expected_curvature", opt_double(p.expected_curvature)},
             {"kappa", str(g.kappa)},
             {"kappa_constant", g.kappa_constant},
             {"reduction_holds", g.reduction_holds},
             {"unit_speed", g.unit_speed}};
  if (p.height) gj["height"] = str(*p.height);
  r["geodesic"] = gj;
  std::set<std::string> constants = r["constants"].get<std::set<std::string>>();
  collect_constants(p.f, constants);
  r["constants"] = constants;
  return r;
}

std::string report_text(const json& r) {
  std::ostringstream os;
  auto line = [&](const char* label, const json& v) {
    os << label << std::string(label_width - std::string(label).size(), ' ')
       << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
  };
  if (r.contains("geodesic")) {
    const json& g = r["geodesic"];
    line("profile", g["profile"].get<std::string>() + " (f = " + g["f"].get<std::string>() + ")");
    line("curvature", g["curvature"]);
    line("kappa", g["kappa"]);
  }
  line("equation", "y'' + (" + r["ode"]["F2"].get<std::string>() + ")*y'^2 + (" +
                       r["ode"]["F1"].get<std::string>() + ")*y' + " + r["ode"]["F"].get<std::string>() + " = 0");
  if (r.contains("classification")) {
    const json& c = r["classification"];
    line("case", c["case"]);
    if (c.contains("failing"))
      line("evidence", c["failing"].get<std::string>() + " reaches " + c["evidence"]["worst_residual"].dump());
  }
  if (r.contains("criterion")) line("g", r["criterion"]["g"]);
  if (r.contains("first_integral")) {
    line("A", r["first_integral"]["A"]);
    line("B", r["first_integral"]["B"]);
  }
  if (r.contains("reduction")) line("I", r["reduction"]["I"]);
  if (r.contains("transform")) {
    line("psi", r["transform"]["psi"]);
    line("phi", r["transform"]["phi"]);
    line("point", r["transform"]["point_transformation"]);
  }
  if (r.contains("solution")) {
    line("solution", r["solution"]["text"]);
    if (r["solution"].contains("degenerate_text")) line("degenerate", r["solution"]["degenerate_text"]);
  }
  if (r.contains("verification")) {
    const json& v = r["verification"];
    line("drift", v["max_drift"]);
    line("residual", v["max_ode_residual"]);
    line("u_tt", v["max_utt"]);
  }
  for (const auto& s : r["stages"]) {
    if (s["status"] == "ok") continue;
    std::string msg = s["stage"].get<std::string>() + ": " + s["status"].get<std::string>();
    if (s.contains("message")) msg += " (" + s["message"].get<std::string>() + ")";
    line("stage", msg);
  }
  line("status", r["status"]);
  return os.str();
}

int exit_code(const PipelineRun& run) {
  if (run.not_linearizable()) return 2;
  return run.ok() ? 0 : 3;
}

json error_json(const std::exception& e) {
  json err = {{"kind", "InvalidInput"}, {"message", e.what()}};
  if (const auto* se = dynamic_cast<const Error*>(&e)) err["kind"] = se->kind();
  if (const auto* se = dynamic_cast<const SyntaxError*>(&e)) {
    err["offset"] = se->offset();
    err["expected"] = se->expected();
  }
  if (const auto* sf = dynamic_cast<const StageFailure*>(&e)) {
    err["stage"] = sf->stage();
    err["cause"] = sf->cause_kind();
  }
  return {{"error", err}};
}

std::map<std::string, std::string> report_expressions(const json& report) {
  std::map<std::string, std::string> out;
  walk(report, "", out);
  return out;
}

std::set<std::string> report_constants(const json& report) {
  std::set<std::string> out;
  if (report.contains("constants")) out = report["constants"].get<std::set<std::string>>();
  return out;
}

}  // namespace sundman
