#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sundman/calculus.hpp"
#include "sundman/expr.hpp"
#include "sundman/identity.hpp"

namespace sundman {

/// y'' + F2 y'^2 + F1 y' + F = 0
struct OdeQuad {
  expr::Expr F, F1, F2;
};

struct SFunctions {
  expr::Expr S1, S2;
  std::optional<expr::Expr> S3, S4;  // only when S1 is not identically zero
  ZeroTest s1_test, s2_test;
  std::optional<ZeroTest> s3_test, s4_test;
};

enum class Case { Case1, Case2, NotSLinearizable };
std::string to_string(Case c);

struct Classification {
  Case kind = Case::NotSLinearizable;
  SFunctions s;
  std::string failing;  // "S2", "S3" or "S4" when not linearizable
  ZeroTest evidence;    // zero test of the failing function
};

struct AuxiliaryData {
  expr::Expr g, h;
  std::optional<expr::Expr> k, q, P, fq;
  std::string provenance;  // alt1-q-equation | alt2-integration | ansatz-scan
  expr::Expr H;            // the antiderivative of F2 in y used for h = H + g
};

struct FirstIntegral {
  expr::Expr A, B;
  std::string provenance;  // theorem4 | muriel-romero
  bool closed_form = true;
  bool inner_closed = true;  // the inner x-integral of the B construction closed
};

enum class Eta { Identity, Reciprocal, Ln, Square };
std::string to_string(Eta e);
Eta eta_from_string(const std::string& s);
expr::Expr apply_eta(Eta e, const expr::Expr& I, const SampleBox& box);

struct Reduction {
  expr::Expr I;
  std::string method;  // separable | exact | integrating-factor-x | integrating-factor-y
};

struct SundmanTransform {
  expr::Expr I;
  Eta eta = Eta::Identity;
  expr::Expr psi, phi;
  bool point_transformation = false;
  std::optional<bool> phi_alt_agrees;  // phi == psi_x / B where B is nonzero
};

struct SolutionFamily {
  expr::Expr lhs;  // normalized psi
  expr::Expr rhs;  // C1*D + C2*D*mu, or c1 + c2*mu(x) with mu implicit
  std::optional<expr::Expr> mu;
  bool mu_implicit = false;
  std::optional<expr::Expr> degenerate_rhs;  // c1 when the c2 = 0 member is reported
  std::string text;                          // "lhs = rhs"
  std::string degenerate_text;
  expr::Expr psi;  // psi = c1 + c2 mu before presentation
};

struct PipelineOptions {
  SampleBox box;
  std::vector<expr::Expr> g_ansatz;  // extra g(x) candidates for the scan
  std::vector<Eta> eta_catalog{Eta::Identity, Eta::Reciprocal, Eta::Ln, Eta::Square};
};

SFunctions compute_s_functions(const OdeQuad& ode, const SampleBox& box);
Classification classify(const OdeQuad& ode, const SampleBox& box);

/// Left-hand side of the g-criterion F1_x + F1 h_x - h_x^2 - h_xx - F_y - F F2
/// with h = int F2 dy + g.
expr::Expr criterion_residual(const OdeQuad& ode, const expr::Expr& g, const SampleBox& box = {});

/// Default ansatz catalog for g(x) (plus options.g_ansatz). Returns the first
/// g whose criterion residual vanishes.
std::optional<expr::Expr> scan_g_catalog(const OdeQuad& ode, const PipelineOptions& options);

AuxiliaryData solve_auxiliary_g(const OdeQuad& ode, const Classification& cls, const PipelineOptions& options);

FirstIntegral build_first_integral(const OdeQuad& ode, const AuxiliaryData& aux, const SampleBox& box);
FirstIntegral build_first_integral_mr(const OdeQuad& ode, const Classification& cls, const AuxiliaryData& aux,
                                      const SampleBox& box);

struct AffineFit {
  double c1 = 0, c2 = 0;
  double max_rel_error = 0;
  int points = 0;
  bool ok = false;
};

/// Fits w2 = c1 w1 + c2 (w = A y' + B) on two points of the (x, y, y') box and
/// checks the remaining points to relative tolerance `tol`.
AffineFit fit_affine(const FirstIntegral& w1, const FirstIntegral& w2, const SampleBox& box, double tol = 1e-7);

Reduction reduce_first_order(const FirstIntegral& fi, const SampleBox& box);

SundmanTransform build_transform(const FirstIntegral& fi, const expr::Expr& I, const PipelineOptions& options);

SolutionFamily general_solution(const SundmanTransform& st, const SampleBox& box);

/// A_x - A h_x, A_y - A F2, B_x - A F, B_y - A (F1 - h_x)
std::vector<expr::Expr> pde_system_residuals(const OdeQuad& ode, const FirstIntegral& fi, const AuxiliaryData& aux);

}  // namespace sundman
