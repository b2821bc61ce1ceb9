#pragma once

// Conformal rescaling g_hat = u^2 g in dimension four, the subcritical
// functionals F_s and their minimization with continuation s -> 4.

#include <optional>
#include <string>
#include <vector>

#include "conformal4/discretization.hpp"

namespace conformal4 {

// u^{-3} (-6 lap u + sigma_g u) at every node. Throws DomainError unless u > 0.
Field sigma_transform(const Discretization& disc, const Field& u);
double sigma_transform_at(const Discretization& disc, const Field& u, std::size_t node);

// (int sigma_g u^2 + 6 |grad u|^2) / (int |u|^s)^{2/s}. Throws DomainError for
// u = 0 and PreconditionError for s outside (2, 4].
double functional_Fs(const Discretization& disc, const Field& u, double s);

// -6 lap u + sigma_g u - mu u^{s-1}.
Field euler_lagrange_defect(const Discretization& disc, const Field& u, double s, double mu);

// Scaled so that it compares across manifolds: L2(dv) norm of the defect over
// max(1, |mu|), evaluated at the normalized u.
double euler_lagrange_residual(const Discretization& disc, const Field& u, double s, double mu);

double s_norm(const Discretization& disc, const Field& u, double s);

// Minimum of sigma_transform over the nodes. On a warped line the factor is
// first refined by Newton's method in 100-digit arithmetic: where u is tiny,
// -6 lap u + sigma_g u cancels to about u^{s-2} relative, far below double
// rounding, so the sign there is only meaningful for a polished solution.
struct SigmaCertificate {
  double min_sigma_hat = 0.0;
  bool polished = false;
  int newton_iterations = 0;
  // max |-6 lap u + sigma_g u - mu u^{s-1}| / (mu u^{s-1}) after polishing
  double relative_defect = 0.0;
};

SigmaCertificate certify_sigma_hat(const Discretization& disc, const Field& u, double s, double mu);

struct SolverOptions {
  double tolerance = 1e-9;
  int max_iterations = 50000;
  // Constant shift c of the preconditioner (-6 lap + c)^{-1}; 0 uses the
  // node-wise potential max(sigma_g, 0) + 1 instead.
  double shift = 0.0;
};

struct SubcriticalSolve {
  double s = 0.0;
  double mu = 0.0;  // F_s at the returned minimizer
  Field u;          // normalized: int u^s dv = 1
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  bool monotone = true;  // F_s never increased on an accepted step
  double max_u = 0.0;
  // (volume of {u >= max u / 2})^{1/4}, a concentration length.
  double half_max_radius = 0.0;
  std::vector<double> history;  // F_s after each accepted step
};

// Positive start with a mild asymmetric bump; constants are critical points of
// F_s, so starting exactly at one would stall on non-minimizing plateaus.
Field default_initial_factor(const Discretization& disc);

// Preconditioned projected descent with Barzilai-Borwein steps. Steps are
// accepted only if they keep u positive and do not increase F_s.
SubcriticalSolve minimize_subcritical(const Discretization& disc, double s, const Field& init,
                                      const SolverOptions& options = {});

inline const std::vector<double> kDefaultSchedule{3.0, 3.5, 3.8, 3.9, 3.95, 3.99};

struct ContinuationResult {
  std::vector<SubcriticalSolve> steps;
  bool converged = false;
  bool blowup = false;
  // mu at the last exponent; empty after a blow-up.
  std::optional<double> y_estimate;
  std::string status;
  // F_4 of the last minimizer, an upper bound for the discrete Yamabe-type value.
  double critical_quotient = 0.0;
  // Minimum over nodes of sigma_transform of the last minimizer.
  double min_sigma_hat = 0.0;
  SigmaCertificate sigma_certificate;
  bool mu_nondecreasing = true;
  // mu_{s_k} <= F_{s_k}(u_{k-1}) at every step.
  bool semicontinuity_holds = true;
};

// Warm-started solves along the schedule. A blow-up is reported when max u
// grows past 1e3 times its first value while the half-max radius shrinks 10x.
ContinuationResult continuation_to_critical(const Discretization& disc,
                                            const std::vector<double>& schedule = kDefaultSchedule,
                                            const SolverOptions& options = {},
                                            const std::optional<Field>& init = std::nullopt);

struct YamabeConfig {
  std::vector<double> schedule = kDefaultSchedule;
  SolverOptions solver;
  int resolution = 0;  // 0 keeps the command-line resolution
};

YamabeConfig parse_yamabe_config(const std::string& json_text);

// Columns: step,s,F_s,residual,max_u.
std::string continuation_csv(const ContinuationResult& result);

}  // namespace conformal4
