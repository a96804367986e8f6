// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "sundman/diff.hpp"
#include "sundman/errors.hpp"
#include "sundman/geodesics.hpp"
#include "sundman/parse.hpp"
#include "sundman/report.hpp"
#include "sundman/simplify.hpp"

using namespace sundman;
using namespace sundman::expr;

namespace {

const std::string kProblems = PROBLEMS_DIR;

// Collects failed checks with a reason; a criterion passes when none failed.
struct Ledger {
  std::vector<std::string> failures;
  std::ostringstream notes;
  void require(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  void below(double v, double tol, const std::string& what) {
    std::ostringstream os;
    os << what << " = " << v << " (limit " << tol << ")";
    require(std::isfinite(v) && v <= tol, os.str());
  }
};

Expr P(const std::string& s) { return parse(s); }

bool same(const Expr& a, const Expr& b, const SampleBox& box) {
  try {
    return is_identically_zero(a - b, box);
  } catch (const Error&) {
    return false;
  }
}

struct Entry {
  std::string name;
  OdeQuad ode;
  PipelineOptions options;
  VerifyOptions verify;
  bool expect_linearizable = true;  // forward-construction oracle, where known
};

Entry from_problem(const std::string& file) {
  ProblemFile pf = load_problem(kProblems + "/" + file + ".json");
  PreparedProblem pp = prepare(pf);
  return {file, pp.ode, pp.options, pp.verify, true};
}

Entry from_profile(const Profile& p, const std::string& label) {
  Entry e{label, geodesic_ode(p), {}, {}, true};
  e.options.box = p.box;
  e.verify.init = p.init;
  return e;
}

// Forward oracle: pick psi = Y(y) X1(x) + X2(x) and phi = Phi(x); the ODE
// obtained from w = A y' + B with A = psi_y/phi, B = psi_x/phi is
// S-linearizable by construction.
Entry constructed(std::mt19937& rng, int index) {
  const char* Ys[] = {"exp(y)", "y^3 + 3*y", "sinh(y)", "y + exp(y)", "y^2"};
  const char* X1s[] = {"x", "exp(x)", "1 + x^2", "cosh(x)"};
  const char* X2s[] = {"0", "x^2", "sin(x)", "x"};
  const char* Phis[] = {"1", "x", "exp(x)", "1/x", "x^2"};
  auto pick = [&](const auto& arr) { return arr[rng() % std::size(arr)]; };
  std::string Y = pick(Ys), X1 = pick(X1s), X2 = pick(X2s), Phi = pick(Phis);
  Expr psi = P("(" + Y + ")*(" + X1 + ") + " + X2);
  Expr phi = P(Phi);
  Expr A = simplify(differentiate(psi, "y") / phi);
  Expr B = simplify(differentiate(psi, "x") / phi);
  Entry e;
  e.name = "constructed-" + std::to_string(index) + " [psi = " + to_string(psi) + ", phi = " + Phi + "]";
  e.ode.F2 = simplify(differentiate(A, "y") / A);
  e.ode.F1 = simplify((differentiate(B, "y") + differentiate(A, "x")) / A);
  e.ode.F = simplify(differentiate(B, "x") / A);
  e.options.box.set("x", 0.5, 1.5).set("y", 0.5, 1.5);
  e.verify.init = StatePoint{0.6, 1.0, 0.2};
  return e;
}

// criterion side of the equivalence, run without trusting the S-function
// verdict: both case-specific routes plus the ansatz scan.
bool g_search(const Entry& e, const Classification& cls) {
  for (Case k : {Case::Case1, Case::Case2}) {
    Classification forced = cls;
    forced.kind = k;
    try {
      AuxiliaryData aux = solve_auxiliary_g(e.ode, forced, e.options);
      if (is_identically_zero(criterion_residual(e.ode, aux.g, e.options.box), e.options.box)) return true;
    } catch (const Error&) {
    }
  }
  return scan_g_catalog(e.ode, e.options).has_value();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

void verified(Ledger& L, const PipelineRun& run, const std::string& who) {
  if (!run.verification) {
    L.require(false, who + ": no verification ran");
    return;
  }
  const auto& v = *run.verification;
  L.below(v.max_drift.value_or(INFINITY), 1e-6, who + " drift");
  L.below(v.max_ode_residual.value_or(INFINITY), 1e-8, who + " family residual");
}

void criterion1(Ledger& L) {
  Entry e = from_problem("oscillator");
  const SampleBox& box = e.options.box;
  PipelineRun run = run_pipeline(e.ode, e.options, Stage::Verify, e.verify);
  L.require(run.ok(), "pipeline failed");
  if (!run.ok()) return;
  L.require(run.cls->kind == Case::Case1, "case is " + to_string(run.cls->kind));
  L.require(same(run.aux->g, P("ln(x)"), box), "g = " + to_string(run.aux->g));
  L.require(same(run.fi->A, P("x*exp(y^2/2)"), box), "A = " + to_string(run.fi->A));
  L.require(same(run.fi->B, P("-int(exp(y^2/2), y)"), box), "B = " + to_string(run.fi->B));
  L.require(same(run.reduction->I, P("x^-1*int(exp(y^2/2), y)"), box), "I = " + to_string(run.reduction->I));
  L.require(same(run.transform->phi, P("1/x^2"), box), "phi = " + to_string(run.transform->phi));
  L.require(run.family->text == "erfi(y/sqrt(2)) = C1*x + C2", "solution " + run.family->text);
  double mis = locus_family_mismatch(run.family->lhs - run.family->rhs, P("erfi(y/sqrt(2)) - c1*x - c2"), box);
  L.below(mis, 1e-9, "locus mismatch");
  verified(L, run, "oscillator");
  L.notes << "solution " << run.family->text << ", drift " << fmt(*run.verification->max_drift) << ", residual "
          << fmt(*run.verification->max_ode_residual);
}

void criterion2(Ledger& L) {
  Entry e = from_problem("tangent");
  const SampleBox& box = e.options.box;
  PipelineRun run = run_pipeline(e.ode, e.options, Stage::Verify, e.verify);
  L.require(run.ok(), "pipeline failed");
  if (!run.ok()) return;
  L.require(run.cls->kind == Case::Case2, "case is " + to_string(run.cls->kind));
  L.require(same(run.aux->g, Expr(0), box), "g = " + to_string(run.aux->g));
  L.require(same(run.fi->A, P("cos(y)/y"), box), "A = " + to_string(run.fi->A));
  L.require(same(run.fi->B, P("sin(y)/(x*y)"), box), "B = " + to_string(run.fi->B));
  L.require(same(run.reduction->I, P("x*sin(y)"), box), "I = " + to_string(run.reduction->I));
  L.require(!run.transform->point_transformation, "point transformation reported");
  L.require(run.family->degenerate_text == "x*sin(y) = c1", "degenerate " + run.family->degenerate_text);
  // independent check of the printed degenerate locus
  SolutionFamily printed;
  printed.lhs = P("x*sin(y)");
  printed.rhs = P("c1");
  double res = solution_family_residual(e.ode, printed, box);
  L.below(res, 1e-8, "x*sin(y) = c1 residual");
  verified(L, run, "tangent");
  L.notes << "degenerate " << run.family->degenerate_text << ", residual " << fmt(res);
}

void criterion3(Ledger& L) {
  struct Want {
    const char* profile;
    double b;
    const char* g;
    const char* family;  // reference form, lower-case constants
    bool unit_kappa;     // criterion reduces to g'' + g'^2 + 1
  };
  const Want table[] = {
      {"cone", 0, "ln(sin(x))", "c1*y*sin(x) + c2*y*cos(x) - 1", true},
      {"plane", 1, "ln(sin(x))", "c1*(1 + y)*sin(x) + c2*(1 + y)*cos(x) - 1", true},
      {"sphere", 0, "ln(sin(x))", "c1*sin(y)*sin(x) + c2*sin(y)*cos(x) - cos(y)", true},
      {"conic", 0, "ln(sin(x))", "c1*sinh(y)*sin(x) + c2*sinh(y)*cos(x) - cosh(y)", true},
      {"hyperboloid", 0, "ln(sinh(x))", "c1*cosh(y)*sinh(x) - c2*cosh(y)*cosh(x) - sinh(y)", false},
      {"pseudosphere", 0, "ln(x)", "exp(-2*y) + x^2 - c1*x - 2*c2", false},
  };
  Expr probe = P("x^3 + sin(x)");
  Expr probe_1 = differentiate(probe, "x");
  int done = 0;
  for (const auto& w : table) {
    std::string who = std::string(w.profile) + (w.b != 0 ? " (b = 1)" : "");
    Profile p = profile_by_name(w.profile, {{"b", w.b}});
    const SampleBox& box = p.box;
    GeodesicResult r = analyze_geodesics(p);
    if (w.unit_kappa) {
      Expr target = -(differentiate(probe_1, "x") + probe_1 * probe_1 + Expr(1));
      L.require(same(criterion_residual(r.ode, probe, box), target, box), who + ": criterion is not g''+g'^2+1");
    }
    if (!r.run.ok()) {
      L.require(false, who + ": " + r.run.failure()->stage + " failed: " + r.run.failure()->message);
      continue;
    }
    L.require(same(r.run.aux->g, P(w.g), box), who + ": g = " + to_string(r.run.aux->g));
    double mis = locus_family_mismatch(r.run.family->lhs - r.run.family->rhs, P(w.family), box);
    L.below(mis, 1e-9, who + " locus mismatch");
    verified(L, r.run, who);
    ++done;
  }
  L.notes << done << "/6 profiles verified";
}

std::vector<Entry> corpus() {
  std::vector<Entry> out{from_problem("oscillator"), from_problem("tangent")};
  for (const auto& name : profile_names())
    out.push_back(from_profile(profile_by_name(name, {{"b", 1}}), "geodesic-" + name));
  Entry neg = from_problem("quadratic-force");
  neg.expect_linearizable = false;
  out.push_back(neg);
  std::mt19937 rng(20240611u);
  for (int i = 1; i <= 3; ++i) out.push_back(constructed(rng, i));
  return out;
}

struct CorpusRun {
  Entry entry;
  PipelineRun run;
};

std::vector<CorpusRun> run_corpus() {
  std::vector<CorpusRun> out;
  for (auto& e : corpus()) out.push_back({e, run_pipeline(e.ode, e.options, Stage::Verify, e.verify)});
  return out;
}

void criterion4(Ledger& L, const std::vector<CorpusRun>& runs) {
  int agree = 0;
  for (const auto& [e, run] : runs) {
    bool linearizable = run.cls && run.cls->kind != Case::NotSLinearizable;
    bool found = run.cls && g_search(e, *run.cls);
    L.require(linearizable == found, e.name + ": S-functions say " + (linearizable ? "yes" : "no") +
                                         ", g-search says " + (found ? "yes" : "no"));
    L.require(linearizable == e.expect_linearizable, e.name + ": construction oracle disagrees");
    agree += linearizable == found;
  }
  L.require(runs.size() >= 12, "corpus too small");
  L.notes << agree << "/" << runs.size() << " agree";
}

void criterion5(Ledger& L, const std::vector<CorpusRun>& runs) {
  int fits = 0;
  for (const auto& [e, run] : runs) {
    if (!e.expect_linearizable) continue;
    if (!run.affine) {
      L.require(false, e.name + ": no cross-check (" + run.mr_error + ")");
      continue;
    }
    L.require(run.affine->ok && run.affine->points == 62, e.name + ": affine fit failed");
    L.below(run.affine->max_rel_error, 1e-7, e.name + " affine error");
    ++fits;
  }
  L.notes << fits << " entries, w_mr = c1 w + c2 on 62 points";
}

void criterion6(Ledger& L, const std::vector<CorpusRun>& runs) {
  double worst = 0;
  int checked = 0;
  for (const auto& [e, run] : runs) {
    if (!e.expect_linearizable) continue;
    if (!run.verification || !run.verification->max_utt) {
      L.require(false, e.name + ": no linearity check (" +
                           (run.failure() ? run.failure()->message : std::string("not run")) + ")");
      continue;
    }
    L.below(*run.verification->max_utt, 1e-4, e.name + " |u_tt|");
    L.require(run.trajectory_samples >= 100, e.name + ": trajectory shorter than 100 samples");
    worst = std::max(worst, *run.verification->max_utt);
    ++checked;
  }
  // order check: at step 1e-3 the drift already sits at roundoff, so compare
  // the two coarsest admissible steps over the same x-range
  Entry osc = from_problem("oscillator");
  const auto& osc_run = runs.front().run;
  L.require(osc_run.ok(), "oscillator run failed");
  if (osc_run.ok()) {
    StatePoint init = *osc.verify.init;
    double d1 = first_integral_drift(*osc_run.fi, integrate_ode(osc.ode, init, 0.01, 50));
    double d2 = first_integral_drift(*osc_run.fi, integrate_ode(osc.ode, init, 0.005, 100));
    L.require(d1 >= 12 * d2, "halving the step reduced drift only " + fmt(d1 / d2) + "x");
    L.notes << checked << " transforms, max |u_tt| " << fmt(worst) << "; drift " << fmt(d1) << " -> " << fmt(d2)
            << " (" << fmt(d1 / d2) << "x)";
  }
}

void criterion7(Ledger& L) {
  Entry e = from_problem("quadratic-force");
  Classification cls = classify(e.ode, e.options.box);
  L.require(cls.kind == Case::NotSLinearizable, "classified " + to_string(cls.kind));
  L.require(cls.failing == "S2", "failing function " + cls.failing);
  double worst = 0;
  int points = 0;
  for (const auto& pt : e.options.box.draw({"x", "y"})) {
    worst = std::max(worst, std::fabs(evaluate(cls.s.S2, pt) - 2));
    ++points;
  }
  L.below(worst, 1e-9, "|S2 - 2|");
  L.notes << "S2 = " << to_string(cls.s.S2) << ", max |S2 - 2| = " << fmt(worst) << " over " << points
          << " points";
}

}  // namespace

int main() {
  auto t0 = std::chrono::steady_clock::now();
  std::vector<CorpusRun> runs;
  std::string corpus_error;
  try {
    runs = run_corpus();
  } catch (const std::exception& e) {
    corpus_error = e.what();
  }

  std::vector<std::pair<std::string, std::function<void(Ledger&)>>> criteria = {
      {"oscillator end-to-end", criterion1},
      {"tangent equation end-to-end", criterion2},
      {"geodesic suite", criterion3},
      {"criterion equivalence", [&](Ledger& L) { criterion4(L, runs); }},
      {"first-integral cross-construction", [&](Ledger& L) { criterion5(L, runs); }},
      {"linearity along trajectories", [&](Ledger& L) { criterion6(L, runs); }},
      {"negative control", criterion7},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Ledger L;
    try {
      if (i >= 3 && i <= 5 && !corpus_error.empty()) throw std::runtime_error("corpus: " + corpus_error);
      criteria[i].second(L);
    } catch (const std::exception& e) {
      L.failures.push_back(std::string("exception: ") + e.what());
    }
    bool ok = L.failures.empty();
    failed += !ok;
    std::cout << "criterion " << i + 1 << ": " << (ok ? "PASS" : "FAIL") << "  " << criteria[i].first << " -- "
              << L.notes.str() << "\n";
    for (const auto& f : L.failures) std::cout << "    " << f << "\n";
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << "total " << fmt(secs) << " s\n";
  return failed ? 1 : 0;
}
