#include "conformal4/yamabe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <json.hpp>

#include "conformal4/errors.hpp"

namespace conformal4 {

namespace {

void require_exponent(double s, bool allow_critical) {
  const bool ok = s > 2.0 && (allow_critical ? s <= 4.0 : s < 4.0);
  if (!ok) {
    std::ostringstream os;
    os << "exponent s must lie in (2, 4" << (allow_critical ? "]" : ")") << ", got " << s;
    throw PreconditionError(os.str());
  }
}

void require_positive(const Field& u) {
  for (Eigen::Index i = 0; i < u.size(); ++i)
    if (!(u[i] > 0.0)) throw DomainError("conformal factor must be positive, node " + std::to_string(i));
}

Field pow_field(const Field& u, double p) { return u.array().abs().pow(p).matrix(); }

double energy(const Discretization& disc, const Field& u) {
  return disc.integral(disc.sigma().cwiseProduct(u).cwiseProduct(u)) + 6.0 * disc.dirichlet_energy(u);
}

double half_max_radius(const Discretization& disc, const Field& u) {
  const double half = 0.5 * u.maxCoeff();
  double v = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i)
    if (u[i] >= half) v += disc.measure()[i];
  return std::pow(v, 0.25);
}

// F_s(v) - F_s(u) for normalized u, with the energy and norm increments
// formed from the difference d = v - u so that they keep relative accuracy
// when the change is far below the size of F_s itself.
double functional_increment(const Discretization& disc, const Field& u, const Field& d, double s, double e_u) {
  const Field au = disc.sigma().cwiseProduct(u) - 6.0 * disc.laplacian(u);
  const double de = 2.0 * disc.integral(au.cwiseProduct(d)) + disc.integral(disc.sigma().cwiseProduct(d).cwiseProduct(d)) +
                    6.0 * disc.dirichlet_energy(d);
  Field dn(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i)
    dn[i] = std::pow(u[i], s) * std::expm1(s * std::log1p(d[i] / u[i]));
  const double dnorm = disc.integral(dn);
  return de * std::exp(-(2.0 / s) * std::log1p(dnorm)) + e_u * std::expm1(-(2.0 / s) * std::log1p(dnorm));
}

using Wide = boost::multiprecision::cpp_bin_float_100;

// Solves a (cyclic) tridiagonal system: lower[i] couples i to i-1, upper[i]
// couples i to i+1, with lower[0] and upper[n-1] the wrap-around entries.
std::vector<Wide> solve_cyclic_tridiagonal(std::vector<Wide> lower, std::vector<Wide> diag, std::vector<Wide> upper,
                                           std::vector<Wide> rhs) {
  const std::size_t n = diag.size();
  auto thomas = [n](std::vector<Wide> a, std::vector<Wide> b, std::vector<Wide> c, std::vector<Wide> d) {
    for (std::size_t i = 1; i < n; ++i) {
      const Wide w = a[i] / b[i - 1];
      b[i] -= w * c[i - 1];
      d[i] -= w * d[i - 1];
    }
    std::vector<Wide> x(n);
    x[n - 1] = d[n - 1] / b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = (d[i] - c[i] * x[i + 1]) / b[i];
    return x;
  };
  const Wide alpha = upper[n - 1], beta = lower[0];
  if (alpha == 0 && beta == 0) return thomas(lower, diag, upper, rhs);
  // Sherman-Morrison with the corner entries as a rank-one update.
  const Wide gamma = -diag[0];
  diag[0] -= gamma;
  diag[n - 1] -= alpha * beta / gamma;
  std::vector<Wide> e(n, Wide(0));
  e[0] = gamma;
  e[n - 1] = alpha;
  const std::vector<Wide> x = thomas(lower, diag, upper, rhs);
  const std::vector<Wide> z = thomas(lower, diag, upper, e);
  const Wide fact = (x[0] + beta * x[n - 1] / gamma) / (1 + z[0] + beta * z[n - 1] / gamma);
  std::vector<Wide> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] - fact * z[i];
  return out;
}

SigmaCertificate certify_on_line(const WarpedLine& line, const Field& u0, double s, double mu) {
  const std::size_t n = line.size();
  const bool periodic = line.periodic();
  const Field& k = line.conductance();
  auto idx = [](std::size_t i) { return static_cast<Eigen::Index>(i); };
  std::vector<Wide> u(n), m(n), sig(n), kf(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = u0[idx(i)];
    m[i] = line.measure()[idx(i)];
    sig[i] = line.sigma()[idx(i)];
  }
  for (std::size_t j = 0; j <= n; ++j) kf[j] = k[idx(j)];
  const Wide lam = mu, sw = s;
  auto prev = [&](std::size_t i) { return i == 0 ? (periodic ? n - 1 : 0) : i - 1; };
  auto next = [&](std::size_t i) { return i + 1 == n ? (periodic ? 0 : n - 1) : i + 1; };
  // m_i (-6 lap u + sigma u)_i
  auto op = [&](const std::vector<Wide>& v, std::size_t i) {
    return 6 * (kf[i] * (v[i] - v[prev(i)]) + kf[i + 1] * (v[i] - v[next(i)])) + m[i] * sig[i] * v[i];
  };

  SigmaCertificate cert;
  for (int it = 0; it < 40; ++it) {
    std::vector<Wide> lower(n), diag(n), upper(n), rhs(n);
    Wide update = 0, size = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const Wide p = boost::multiprecision::pow(u[i], sw - 2);
      rhs[i] = -(op(u, i) - lam * m[i] * p * u[i]);
      diag[i] = 6 * (kf[i] + kf[i + 1]) + m[i] * sig[i] - lam * (sw - 1) * m[i] * p;
      lower[i] = -6 * kf[i];
      upper[i] = -6 * kf[i + 1];
    }
    const std::vector<Wide> du = solve_cyclic_tridiagonal(lower, diag, upper, rhs);
    for (std::size_t i = 0; i < n; ++i) {
      u[i] += du[i];
      if (!(u[i] > 0)) return cert;
      update = std::max(update, Wide(abs(du[i]) / u[i]));
      size = std::max(size, u[i]);
    }
    cert.newton_iterations = it + 1;
    if (update < Wide(1e-90)) break;
  }

  Wide lowest = std::numeric_limits<double>::max();
  Wide defect = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Wide lu = op(u, i) / m[i];
    const Wide target = lam * boost::multiprecision::pow(u[i], sw - 1);
    defect = std::max(defect, Wide(abs(lu - target) / target));
    lowest = std::min(lowest, Wide(lu / (u[i] * u[i] * u[i])));
  }
  cert.relative_defect = static_cast<double>(defect);
  cert.min_sigma_hat = static_cast<double>(lowest);
  cert.polished = cert.relative_defect < 1e-30;
  return cert;
}

}  // namespace

SigmaCertificate certify_sigma_hat(const Discretization& disc, const Field& u, double s, double mu) {
  require_exponent(s, false);
  require_positive(u);
  if (const auto* line = dynamic_cast<const WarpedLine*>(&disc)) {
    SigmaCertificate cert = certify_on_line(*line, u, s, mu);
    if (cert.polished) return cert;
  }
  SigmaCertificate cert;
  cert.min_sigma_hat = sigma_transform(disc, u).minCoeff();
  const Field d = euler_lagrange_defect(disc, u, s, mu);
  for (Eigen::Index i = 0; i < u.size(); ++i)
    cert.relative_defect = std::max(cert.relative_defect, std::abs(d[i]) / (mu * std::pow(u[i], s - 1.0)));
  return cert;
}

Field sigma_transform(const Discretization& disc, const Field& u) {
  require_positive(u);
  const Field lap = disc.laplacian(u);
  Field out(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i)
    out[i] = (-6.0 * lap[i] + disc.sigma()[i] * u[i]) / (u[i] * u[i] * u[i]);
  return out;
}

double sigma_transform_at(const Discretization& disc, const Field& u, std::size_t node) {
  if (node >= disc.size()) throw DomainError("node index out of range");
  return sigma_transform(disc, u)[static_cast<Eigen::Index>(node)];
}

double s_norm(const Discretization& disc, const Field& u, double s) {
  return std::pow(disc.integral(pow_field(u, s)), 1.0 / s);
}

double functional_Fs(const Discretization& disc, const Field& u, double s) {
  require_exponent(s, true);
  if (u.size() != static_cast<Eigen::Index>(disc.size())) throw PreconditionError("field size mismatch");
  const double n = disc.integral(pow_field(u, s));
  if (!(n > 0.0)) throw DomainError("functional F_s is undefined for u = 0");
  return energy(disc, u) / std::pow(n, 2.0 / s);
}

Field euler_lagrange_defect(const Discretization& disc, const Field& u, double s, double mu) {
  const Field lap = disc.laplacian(u);
  return -6.0 * lap + disc.sigma().cwiseProduct(u) - mu * pow_field(u, s - 1.0);
}

double euler_lagrange_residual(const Discretization& disc, const Field& u, double s, double mu) {
  const Field r = euler_lagrange_defect(disc, u, s, mu);
  return std::sqrt(disc.integral(r.cwiseProduct(r))) / std::max(1.0, std::abs(mu));
}

Field default_initial_factor(const Discretization& disc) {
  const std::size_t n = disc.size();
  double lo = disc.coordinate(0), hi = lo;
  for (std::size_t i = 1; i < n; ++i) {
    lo = std::min(lo, disc.coordinate(i));
    hi = std::max(hi, disc.coordinate(i));
  }
  const double span = hi > lo ? hi - lo : 1.0;
  Field u(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const double x = (disc.coordinate(i) - lo) / span;
    u[static_cast<Eigen::Index>(i)] = 1.0 + 0.25 * std::exp(-40.0 * (x - 0.3) * (x - 0.3));
  }
  return u;
}

SubcriticalSolve minimize_subcritical(const Discretization& disc, double s, const Field& init,
                                      const SolverOptions& options) {
  require_exponent(s, false);
  if (init.size() != static_cast<Eigen::Index>(disc.size())) throw PreconditionError("initial factor size mismatch");
  require_positive(init);

  const Field potential = options.shift > 0.0 ? Field::Constant(init.size(), options.shift)
                                               : Field((disc.sigma().array().max(0.0) + 1.0).matrix());
  const auto precond = disc.potential_solver(potential);

  SubcriticalSolve out;
  out.s = s;
  Field u = init / s_norm(disc, init, s);
  double f = functional_Fs(disc, u, s);
  Field r = euler_lagrange_defect(disc, u, s, f);
  Field d = precond(r);
  double res = std::sqrt(disc.integral(r.cwiseProduct(r))) / std::max(1.0, std::abs(f));
  double alpha = 0.5;
  int it = 0;
  for (; it < options.max_iterations && res > options.tolerance; ++it) {
    double step = alpha;
    Field trial;
    double f_trial = 0.0;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      trial = u - step * d;
      if (trial.minCoeff() > 0.0 && functional_increment(disc, u, Field(-step * d), s, f) <= 0.0) {
        trial /= s_norm(disc, trial, s);
        f_trial = functional_Fs(disc, trial, s);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    const Field r_new = euler_lagrange_defect(disc, trial, s, f_trial);
    const Field ds = trial - u;
    const Field dr = r_new - r;
    const double num = disc.integral(ds.cwiseProduct(-6.0 * disc.laplacian(ds) + potential.cwiseProduct(ds)));
    const double den = disc.integral(ds.cwiseProduct(dr));
    alpha = (den > 0.0 && num > 0.0) ? std::clamp(num / den, 1e-6, 1e6) : std::min(2.0 * step, 1.0);

    if (f_trial > f + 1e-13 * std::abs(f)) out.monotone = false;
    u = trial;
    f = f_trial;
    r = r_new;
    d = precond(r);
    res = std::sqrt(disc.integral(r.cwiseProduct(r))) / std::max(1.0, std::abs(f));
    out.history.push_back(f);
  }
  out.u = u;
  out.mu = f;
  out.residual = res;
  out.iterations = it;
  out.converged = res <= options.tolerance;
  out.max_u = u.maxCoeff();
  out.half_max_radius = half_max_radius(disc, u);
  return out;
}

ContinuationResult continuation_to_critical(const Discretization& disc, const std::vector<double>& schedule,
                                            const SolverOptions& options, const std::optional<Field>& init) {
  if (schedule.empty()) throw PreconditionError("continuation schedule is empty");
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    require_exponent(schedule[k], false);
    if (k > 0 && !(schedule[k] > schedule[k - 1]))
      throw PreconditionError("continuation schedule must be strictly increasing");
  }
  if (schedule.back() < 3.95) throw PreconditionError("continuation schedule must end at s >= 3.95");

  ContinuationResult out;
  Field u = init ? *init : default_initial_factor(disc);
  out.converged = true;
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    const double s = schedule[k];
    const double warm = functional_Fs(disc, u, s);
    SubcriticalSolve step = minimize_subcritical(disc, s, u, options);
    if (step.mu > warm + 1e-13 * std::abs(warm)) out.semicontinuity_holds = false;
    if (k > 0 && step.mu < out.steps.back().mu) out.mu_nondecreasing = false;
    out.converged = out.converged && step.converged;
    u = step.u;
    out.steps.push_back(std::move(step));

    const SubcriticalSolve& first = out.steps.front();
    const SubcriticalSolve& last = out.steps.back();
    if (last.max_u > 1e3 * first.max_u && first.half_max_radius >= 10.0 * last.half_max_radius) {
      out.blowup = true;
      break;
    }
  }

  const SubcriticalSolve& last = out.steps.back();
  out.critical_quotient = functional_Fs(disc, last.u, 4.0);
  out.sigma_certificate = certify_sigma_hat(disc, last.u, last.s, last.mu);
  out.min_sigma_hat = out.sigma_certificate.min_sigma_hat;
  if (out.blowup) {
    out.status = "conformal class near spherical threshold";
  } else {
    out.y_estimate = last.mu;
    out.status = out.converged ? "converged" : "not converged";
  }
  return out;
}

YamabeConfig parse_yamabe_config(const std::string& json_text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), e.byte);
  }
  if (!doc.is_object()) throw ParseError("solver config must be a JSON object");
  YamabeConfig cfg;
  try {
    if (doc.contains("schedule")) cfg.schedule = doc.at("schedule").get<std::vector<double>>();
    if (doc.contains("tolerance")) cfg.solver.tolerance = doc.at("tolerance").get<double>();
    if (doc.contains("max_iterations")) cfg.solver.max_iterations = doc.at("max_iterations").get<int>();
    if (doc.contains("shift")) cfg.solver.shift = doc.at("shift").get<double>();
    if (doc.contains("resolution")) cfg.resolution = doc.at("resolution").get<int>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed solver config: ") + e.what());
  }
  if (!(cfg.solver.tolerance > 0.0)) throw ParseError("'tolerance' must be positive");
  if (cfg.solver.max_iterations < 1) throw ParseError("'max_iterations' must be at least 1");
  if (cfg.resolution < 0) throw ParseError("'resolution' must be non-negative");
  return cfg;
}

std::string continuation_csv(const ContinuationResult& result) {
  std::ostringstream os;
  os.precision(17);
  os << "# conformal4 yamabe-history v1\n";
  os << "step,s,F_s,residual,max_u\n";
  for (std::size_t k = 0; k < result.steps.size(); ++k) {
    const auto& st = result.steps[k];
    os << k << "," << st.s << "," << st.mu << "," << st.residual << "," << st.max_u << "\n";
  }
  return os.str();
}

}  // namespace conformal4
