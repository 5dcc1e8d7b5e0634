#include "tpl/bounds.hpp"

#include "tpl/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace tpl {

namespace {

constexpr std::uint64_t kMinTailSamples = 10'000;
constexpr int kMaxIntdimOrder = 20;

double mean_trace_fn(const FiniteChain& chain, const FiniteField& f, const ScalarFn& phi) {
  double acc = 0.0;
  for (int z = 0; z < f.size(); ++z) acc += chain.stationary()[static_cast<std::size_t>(z)] * trace_fn(f[z], phi);
  return acc;
}

FiniteField apply_field(const FiniteField& f, const ScalarFn& phi) {
  std::vector<SymMatrix> vals;
  vals.reserve(f.values.size());
  for (const auto& v : f.values) vals.push_back(apply_spectral_fn(v, phi));
  return FiniteField(std::move(vals));
}

// Maps an interval estimate of a nonnegative mean through x -> scale x^power,
// which is monotone, so the interval ends map to interval ends.
mc::Estimate power_transform(const mc::Estimate& e, double power, double scale) {
  auto map = [&](double x) { return scale * std::pow(std::max(x, 0.0), power); };
  mc::Estimate out = e;
  out.value = map(e.value);
  out.ci_low = map(e.ci_low);
  out.ci_high = map(e.ci_high);
  out.log_value.reset();
  return out;
}

double sqrt2_factor(double q) { return (q > 1.0 && q < 1.5) ? std::numbers::sqrt2 : 1.0; }

void require_q(double q) {
  if (!(q >= 1.0)) throw DomainError("moment order q must be >= 1 (got " + format_double(q) + ")");
}

struct GaussianEnergy {
  double alpha = 1.0;
  double v_f = 0.0;
  double trace_dirichlet = 0.0;
  double trace_dirichlet_half_width = 0.0;
  Mode mode = Mode::Exact;
};

GaussianEnergy gaussian_energy(const GaussianModel& model, const PoincareCertificate& cert, const mc::SampleSpec& spec,
                               std::optional<double> certified_v_f, const char* what) {
  GaussianEnergy e;
  e.alpha = cert.alpha;
  if (const auto* s = std::get_if<GaussianSeries>(&model)) {
    const SymMatrix en = dirichlet_form(*s);
    e.trace_dirichlet = en.trace();
    e.v_f = certified_v_f.value_or(op_norm(en));
    return e;
  }
  if (!certified_v_f) {
    throw RefusalError(std::string(what) +
                       " on a Gaussian chaos needs a certified variance proxy: sup ||Gamma(f)|| is only estimable "
                       "from samples");
  }
  const EnergyReport r = energy_report(model_field(model), spec);
  e.trace_dirichlet = r.dirichlet.trace();
  e.trace_dirichlet_half_width = r.sample_meta->dirichlet_trace_half_width;
  e.v_f = *certified_v_f;
  e.mode = Mode::Estimated;
  return e;
}

}  // namespace

SmoothField model_field(const GaussianModel& m) {
  return std::visit(
      [](const auto& x) -> SmoothField {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, GaussianSeries>) {
          return series_as_field(x);
        } else {
          return chaos_as_field(x);
        }
      },
      m);
}

SymMatrix model_mean(const GaussianModel& m) {
  if (const auto* c = std::get_if<GaussianChaos>(&m)) return c->mean();
  return SymMatrix::zero(model_dim(m));
}

int model_dim(const GaussianModel& m) {
  return std::visit([](const auto& x) { return x.dim(); }, m);
}

// ---------------------------------------------------------------------------

CheckReport check_subadditivity(const FiniteChain& base, const BivariateField& g, const Slack& slack) {
  const double total = bivariate_variance(base, g).trace();
  const auto& mu = base.stationary();
  const auto var1 = conditional_variance(base, g, 1);
  const auto var2 = conditional_variance(base, g, 2);
  double e2_var1 = 0.0;
  double e1_var2 = 0.0;
  for (int z = 0; z < g.base_states; ++z) {
    e2_var1 += mu[static_cast<std::size_t>(z)] * var1[static_cast<std::size_t>(z)].trace();
    e1_var2 += mu[static_cast<std::size_t>(z)] * var2[static_cast<std::size_t>(z)].trace();
  }
  return CheckReport::exact(citation::kVarianceSubadditivity, total, e2_var1 + e1_var2, slack,
                            {{"d", g.dim()}, {"e2_trace_var1", e2_var1}, {"e1_trace_var2", e1_var2}});
}

CheckReport check_bivariate_poincare(const FiniteChain& base, const BivariateField& g, const PoincareCertificate& cert,
                                     const Slack& slack) {
  const double var = bivariate_variance(base, g).trace();
  const double energy = bivariate_dirichlet(base, g).trace();
  return CheckReport::exact(citation::kPoincareSubadditivity, var, cert.alpha * energy, slack,
                            {{"alpha", cert.alpha}, {"d", g.dim()}, {"trace_dirichlet", energy}});
}

// ---------------------------------------------------------------------------

CheckReport check_mean_value_trace(const SymMatrix& a, const SymMatrix& b, const ScalarFn& phi, const Slack& slack) {
  if (a.dim() != b.dim()) throw DimensionError("mean-value inequality needs matrices of equal size");
  const auto psi = phi.squared_derivative();
  if (!psi) throw DomainError("phi = " + phi.describe() + " is not in the admissible list (sinh, signed_pow q >= 1.5, affine)");
  const SymMatrix diff_phi = apply_spectral_fn(a, phi) - apply_spectral_fn(b, phi);
  const SymMatrix diff = a - b;
  const double lhs = diff_phi.squared().trace();
  const double rhs = 0.5 * trace_product(diff.squared(), apply_spectral_fn(a, *psi) + apply_spectral_fn(b, *psi));
  return CheckReport::exact(citation::kMeanValueTrace, lhs, rhs, slack, {{"phi", phi.describe()}, {"d", a.dim()}});
}

CheckReport check_chain_rule(const FiniteChain& chain, const FiniteField& f, const ScalarFn& phi, const Slack& slack) {
  const auto psi = phi.squared_derivative();
  if (!psi) throw DomainError("phi = " + phi.describe() + " is not in the admissible list (sinh, signed_pow q >= 1.5, affine)");
  const double lhs = dirichlet_form(chain, apply_field(f, phi)).trace();
  double rhs = 0.0;
  for (int z = 0; z < chain.n_states(); ++z) {
    rhs += chain.stationary()[static_cast<std::size_t>(z)] *
           trace_product(carre_finite(chain, f, z), apply_spectral_fn(f[z], *psi));
  }
  return CheckReport::exact(citation::kChainRule, lhs, rhs, slack, {{"phi", phi.describe()}, {"d", f.dim()}});
}

// ---------------------------------------------------------------------------

std::optional<double> exp_moment_rhs(const BoundParams& p, double trace_dirichlet_normalized) {
  const double theta2 = p.theta * p.theta;
  const double denom = 1.0 - p.alpha * p.v_f * theta2 / 2.0;
  if (!(denom > 0.0)) return std::nullopt;
  return p.d * (1.0 + p.alpha * theta2 * trace_dirichlet_normalized / denom);
}

double exp_moment_singularity(double alpha, double v_f) {
  if (!(alpha * v_f > 0.0)) return std::numeric_limits<double>::infinity();
  return std::sqrt(2.0 / (alpha * v_f));
}

std::vector<double> default_theta_grid(double alpha, double v_f, int points) {
  const double sing = exp_moment_singularity(alpha, v_f);
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(std::max(points, 0)));
  for (int k = 1; k <= points; ++k) {
    grid.push_back(std::isfinite(sing) ? sing * k / (points + 1) : static_cast<double>(k) / points);
  }
  return grid;
}

std::vector<CheckReport> check_exp_moment(const FiniteChain& chain, const FiniteField& f,
                                          const PoincareCertificate& cert, const std::vector<double>& theta_grid,
                                          const Slack& slack) {
  const SymMatrix mean = expectation(chain, f);
  const FiniteField fc = centered(chain, f);
  const EnergyReport en = energy_report(chain, fc);
  const int d = f.dim();
  const double tr_bar = en.dirichlet.trace() / d;
  std::vector<CheckReport> out;
  out.reserve(theta_grid.size());
  for (double theta : theta_grid) {
    if (!(theta > 0.0)) throw DomainError("theta must be > 0");
    const double lhs = mean_trace_fn(chain, fc, ScalarFn::cosh(theta));
    const BoundParams p{cert.alpha, en.v_f, d, theta, 1.0, 1.0};
    nlohmann::json ctx{{"theta", theta},   {"alpha", cert.alpha}, {"v_f", en.v_f},
                       {"d", d},           {"trace_dirichlet_normalized", tr_bar},
                       {"mean", matrix_to_json(mean)}};
    if (const auto rhs = exp_moment_rhs(p, tr_bar)) {
      out.push_back(CheckReport::exact(citation::kExponentialMoments, lhs, *rhs, slack, std::move(ctx)));
    } else {
      out.push_back(CheckReport::unbounded(citation::kExponentialMoments, lhs, std::move(ctx)));
    }
  }
  return out;
}

std::vector<CheckReport> check_exp_moment(const GaussianModel& model, const PoincareCertificate& cert,
                                          const std::vector<double>& theta_grid, const mc::SampleSpec& spec,
                                          std::optional<double> certified_v_f) {
  spec.validate();
  const GaussianEnergy en = gaussian_energy(model, cert, spec, certified_v_f, "exponential-moment check");
  const SmoothField field = model_field(model);
  const SymMatrix mean = model_mean(model);
  const int d = model_dim(model);
  std::vector<CheckReport> out;
  out.reserve(theta_grid.size());
  for (double theta : theta_grid) {
    if (!(theta > 0.0)) throw DomainError("theta must be > 0");
    const mc::Estimate lhs = mc::estimate_cosh_trace(field, mean, theta, spec);
    const BoundParams p{en.alpha, en.v_f, d, theta, 1.0, 1.0};
    nlohmann::json ctx{{"theta", theta}, {"alpha", en.alpha},         {"v_f", en.v_f},
                       {"d", d},         {"v_f_mode", to_string(en.mode)}, {"seed", spec.seed},
                       {"n_samples", spec.n_samples}};
    const auto rhs_lo = exp_moment_rhs(p, std::max(0.0, en.trace_dirichlet - en.trace_dirichlet_half_width) / d);
    const auto rhs_mid = exp_moment_rhs(p, en.trace_dirichlet / d);
    const auto rhs_hi = exp_moment_rhs(p, (en.trace_dirichlet + en.trace_dirichlet_half_width) / d);
    if (!rhs_mid) {
      out.push_back(CheckReport::unbounded(citation::kExponentialMoments, lhs.value, std::move(ctx)));
      continue;
    }
    mc::Estimate rhs = exact_estimate(*rhs_mid);
    if (en.mode == Mode::Estimated) {
      rhs.ci_low = *rhs_lo;
      rhs.ci_high = *rhs_hi;
      rhs.level = mc::Estimate{}.level;
      rhs.n = spec.n_samples;
    }
    out.push_back(CheckReport::estimated(citation::kExponentialMoments, lhs, rhs, std::move(ctx)));
  }
  return out;
}

// ---------------------------------------------------------------------------

double tail_bound(const BoundParams& p) {
  if (!(p.lambda > 0.0)) throw DomainError("tail level lambda must be > 0");
  return 6.0 * p.d * std::exp(-p.lambda);
}

double expectation_bound(const BoundParams& p) {
  return std::log(6.0 * std::numbers::e * p.d) * std::sqrt(p.alpha * p.v_f);
}

std::vector<CheckReport> check_tail_empirical(const FiniteChain& chain, const FiniteField& f,
                                              const PoincareCertificate& cert, const std::vector<double>& lambda_grid,
                                              const Slack& slack) {
  const FiniteField fc = centered(chain, f);
  const double v_f = variance_proxy(chain, fc).value;
  const double scale = std::sqrt(cert.alpha * v_f);
  const int d = f.dim();
  std::vector<double> norms(static_cast<std::size_t>(fc.size()));
  for (int z = 0; z < fc.size(); ++z) norms[static_cast<std::size_t>(z)] = op_norm(fc[z]);

  std::vector<CheckReport> out;
  out.reserve(lambda_grid.size());
  for (double lambda : lambda_grid) {
    const BoundParams p{cert.alpha, v_f, d, 1.0, 1.0, lambda};
    const double bound = tail_bound(p);
    const double level = scale * lambda;
    double survival = 0.0;
    for (int z = 0; z < fc.size(); ++z) {
      const double r = norms[static_cast<std::size_t>(z)];
      const bool hit = level > 0.0 ? r >= level : r > 0.0;
      if (hit) survival += chain.stationary()[static_cast<std::size_t>(z)];
    }
    out.push_back(CheckReport::exact(citation::kSubexponential, survival, bound, slack,
                                     {{"lambda", lambda},
                                      {"level", level},
                                      {"alpha", cert.alpha},
                                      {"v_f", v_f},
                                      {"d", d},
                                      {"auto_pass", bound >= 1.0},
                                      {"expectation_bound", expectation_bound(p)}}));
  }
  return out;
}

std::vector<CheckReport> check_tail_empirical(const GaussianModel& model, const PoincareCertificate& cert,
                                              const std::vector<double>& lambda_grid, const mc::SampleSpec& spec,
                                              std::optional<double> certified_v_f) {
  spec.validate();
  if (spec.n_samples < kMinTailSamples) {
    throw DomainError("Monte Carlo tail checks need at least 10000 samples (got " + std::to_string(spec.n_samples) + ")");
  }
  const GaussianEnergy en = gaussian_energy(model, cert, spec, certified_v_f, "tail check");
  const double scale = std::sqrt(en.alpha * en.v_f);
  const int d = model_dim(model);
  std::vector<double> lambdas = lambda_grid;
  std::sort(lambdas.begin(), lambdas.end());
  std::vector<double> thresholds;
  thresholds.reserve(lambdas.size());
  for (double l : lambdas) thresholds.push_back(scale * l);
  const auto survival = mc::estimate_tail(model_field(model), model_mean(model), thresholds, spec);

  std::vector<CheckReport> out;
  out.reserve(lambdas.size());
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const BoundParams p{en.alpha, en.v_f, d, 1.0, 1.0, lambdas[i]};
    const double bound = tail_bound(p);
    out.push_back(CheckReport::estimated(citation::kSubexponential, survival[i], exact_estimate(bound),
                                         {{"lambda", lambdas[i]},
                                          {"level", thresholds[i]},
                                          {"alpha", en.alpha},
                                          {"v_f", en.v_f},
                                          {"v_f_mode", certified_v_f ? "CERTIFIED" : to_string(en.mode)},
                                          {"d", d},
                                          {"auto_pass", bound >= 1.0},
                                          {"seed", spec.seed},
                                          {"n_samples", spec.n_samples},
                                          {"expectation_bound", expectation_bound(p)}}));
  }
  return out;
}

// ---------------------------------------------------------------------------

PolyRhs poly_moment_rhs(const BoundParams& p, double trace_gamma_q) {
  require_q(p.q);
  const double factor = sqrt2_factor(p.q);
  const double value = factor * std::sqrt(2.0 * p.alpha * p.q * p.q) * std::pow(std::max(trace_gamma_q, 0.0), 1.0 / (2.0 * p.q));
  return {value, factor != 1.0};
}

std::vector<CheckReport> check_poly_moment(const FiniteChain& chain, const FiniteField& f,
                                           const PoincareCertificate& cert, const std::vector<double>& q_list,
                                           const Slack& slack) {
  const SymMatrix mean = expectation(chain, f);
  const FiniteField fc = centered(chain, f);
  const auto gamma = carre_all(chain, fc);
  const int d = f.dim();
  std::vector<CheckReport> out;
  out.reserve(q_list.size());
  for (double q : q_list) {
    require_q(q);
    const double moment = mean_trace_fn(chain, fc, ScalarFn::abs_pow(2.0 * q));
    double trace_gamma_q = 0.0;
    for (int z = 0; z < chain.n_states(); ++z) {
      trace_gamma_q += chain.stationary()[static_cast<std::size_t>(z)] *
                       trace_fn(gamma[static_cast<std::size_t>(z)], ScalarFn::abs_pow(q));
    }
    const PolyRhs rhs = poly_moment_rhs({cert.alpha, 0.0, d, 1.0, q, 1.0}, trace_gamma_q);
    nlohmann::json ctx{{"q", q},
                       {"alpha", cert.alpha},
                       {"d", d},
                       {"trace_gamma_q", trace_gamma_q},
                       {"sqrt2_regime", rhs.sqrt2_regime},
                       {"mean", matrix_to_json(mean)}};
    if (q == 1.0) {
      // At q = 1 the LHS is the Schatten-2 size of the variance: (tr Var)^{1/2}.
      ctx["trace_variance_sqrt"] = std::sqrt(moment);
      ctx["sqrt_d_times_rhs"] = std::sqrt(static_cast<double>(d)) * rhs.value;
    }
    out.push_back(CheckReport::exact(citation::kPolynomialMoments, std::pow(moment, 1.0 / (2.0 * q)), rhs.value, slack,
                                     std::move(ctx)));
  }
  return out;
}

std::vector<CheckReport> check_poly_moment(const GaussianModel& model, const PoincareCertificate& cert,
                                           const std::vector<double>& q_list, const mc::SampleSpec& spec) {
  spec.validate();
  const SmoothField field = model_field(model);
  const SymMatrix mean = model_mean(model);
  const int d = model_dim(model);
  const auto* series = std::get_if<GaussianSeries>(&model);
  std::vector<CheckReport> out;
  out.reserve(q_list.size());
  for (double q : q_list) {
    require_q(q);
    const mc::Estimate moment = mc::estimate_trace_moment(field, q, spec, mean);
    const mc::Estimate lhs = power_transform(moment, 1.0 / (2.0 * q), 1.0);
    const PolyRhs unit = poly_moment_rhs({cert.alpha, 0.0, d, 1.0, q, 1.0}, 1.0);
    mc::Estimate gamma_q;
    if (series) {
      gamma_q = exact_estimate(trace_fn(dirichlet_form(*series), ScalarFn::abs_pow(q)));
    } else {
      const auto values = mc::map_samples<double>(spec, spec.n_samples, field.ambient_dim,
                                                  [&](std::uint64_t, std::span<const double> x) {
                                                    return trace_fn(carre_smooth(field, x), ScalarFn::abs_pow(q));
                                                  });
      gamma_q = mc::clt_estimate(values);
    }
    const mc::Estimate rhs = power_transform(gamma_q, 1.0 / (2.0 * q), unit.value);
    out.push_back(CheckReport::estimated(citation::kPolynomialMoments, lhs, rhs,
                                         {{"q", q},
                                          {"alpha", cert.alpha},
                                          {"d", d},
                                          {"sqrt2_regime", unit.sqrt2_regime},
                                          {"rhs_mode", series ? "EXACT" : "ESTIMATED"},
                                          {"seed", spec.seed},
                                          {"n_samples", spec.n_samples}}));
  }
  return out;
}

CheckReport check_intdim_variant(const FiniteChain& chain, const FiniteField& f, const PoincareCertificate& cert, int q,
                                 const Slack& slack) {
  if (q < 1 || q > kMaxIntdimOrder) throw DomainError("intdim variant needs a natural order 1 <= q <= 20");
  const SymmetrizedField sym = bivariate_symmetrized(chain, f);
  const auto& mu = chain.stationary();
  const int n = chain.n_states();
  const ScalarFn power = ScalarFn::abs_pow(2.0 * q);
  double lhs = 0.0;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      lhs += mu[static_cast<std::size_t>(a)] * mu[static_cast<std::size_t>(b)] * trace_fn(sym.g.at(a, b), power);
    }
  }
  const double dim_eff = intdim(sym.dirichlet);
  const double log_fact = std::lgamma(q + 1.0);
  double rhs = 0.0;
  double rhs_iterated = 0.0;
  if (dim_eff > 0.0 && sym.v_g > 0.0) {
    const double log_core = q * std::log(cert.alpha) + q * std::log(sym.v_g);
    rhs = dim_eff * std::exp(log_core + log_fact);
    rhs_iterated = dim_eff * std::exp(log_core + 2.0 * log_fact);
  }

  // Side-by-side with the uniform-dimension bound on f itself.
  const double v_f = variance_proxy(chain, f).value;
  const double d = f.dim();
  const double uniform = std::sqrt(2.0 * cert.alpha * q * q) * std::pow(d, 1.0 / (2.0 * q)) * std::sqrt(v_f);
  const double intdim_root = std::pow(rhs, 1.0 / (2.0 * q));
  return CheckReport::exact(citation::kIntdimVariant, lhs, rhs, slack,
                            {{"q", q},
                             {"alpha", cert.alpha},
                             {"d", f.dim()},
                             {"intdim", dim_eff},
                             {"v_g", sym.v_g},
                             {"log_factorial", log_fact},
                             {"rhs_with_factorial_squared", rhs_iterated},
                             {"intdim_bound_root", intdim_root},
                             {"uniform_bound", uniform},
                             {"tighter", intdim_root < uniform ? "intdim" : "uniform"}});
}

// ---------------------------------------------------------------------------

double chaos_scalar_bound(const SymMatrix& a, double q) {
  require_q(q);
  if (!is_psd(a)) throw DomainError("chaos bound needs a positive-semidefinite coefficient matrix");
  return 8.0 * q * q * op_norm(a);
}

SymMatrix scalar_chaos_matrix(const GaussianChaos& c) {
  if (c.dim() != 1) throw DimensionError("scalar chaos bound applies to real-valued chaos only");
  Eigen::MatrixXd a(c.n(), c.n());
  for (int i = 0; i < c.n(); ++i) {
    for (int j = 0; j < c.n(); ++j) a(i, j) = c.coefficient(i, j)(0, 0);
  }
  return SymMatrix(a);
}

std::vector<CheckReport> check_chaos_scalar(const GaussianChaos& c, const std::vector<double>& q_list,
                                            const mc::SampleSpec& spec) {
  const SymMatrix a = scalar_chaos_matrix(c);
  const SmoothField field = chaos_as_field(c);
  std::vector<CheckReport> out;
  out.reserve(q_list.size());
  for (double q : q_list) {
    const double bound = chaos_scalar_bound(a, q);
    const mc::Estimate moment = mc::estimate_trace_moment(field, q, spec);
    out.push_back(CheckReport::estimated(citation::kGaussianChaos, power_transform(moment, 1.0 / (2.0 * q), 1.0),
                                         exact_estimate(bound),
                                         {{"q", q},
                                          {"operator_norm", op_norm(a)},
                                          {"centered", false},
                                          {"seed", spec.seed},
                                          {"n_samples", spec.n_samples}}));
  }
  return out;
}

}  // namespace tpl
