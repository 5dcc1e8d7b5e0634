#pragma once

// Executable forms of the concentration inequalities: subadditivity, the
// mean-value trace inequality, the chain rule, exponential and polynomial
// moment bounds, subexponential tails, and the Gaussian chaos corollary.
//
// Every checker centers its field internally (f <- f - E f) where the
// inequality concerns a centered field, and logs the subtracted mean.

#include "tpl/energy.hpp"
#include "tpl/poincare.hpp"
#include "tpl/report.hpp"

#include <optional>
#include <variant>
#include <vector>

namespace tpl {

struct BoundParams {
  double alpha = 1.0;
  double v_f = 0.0;
  int d = 1;
  double theta = 1.0;
  double q = 1.0;
  double lambda = 1.0;
};

using GaussianModel = std::variant<GaussianSeries, GaussianChaos>;

SmoothField model_field(const GaussianModel& m);
/// E f for the model: 0 for a series, sum_i A_ii for a chaos.
SymMatrix model_mean(const GaussianModel& m);
int model_dim(const GaussianModel& m);

// ---------------------------------------------------------------------------
// Bivariate fields

/// tr Var[g] <= E_2 tr Var_1[g] + E_1 tr Var_2[g].
CheckReport check_subadditivity(const FiniteChain& base, const BivariateField& g, const Slack& slack = {});

/// tr Var[g] <= alpha tr E(g), with E(g) = E[E_1(g) + E_2(g)] and alpha the
/// Poincare constant of the base chain.
CheckReport check_bivariate_poincare(const FiniteChain& base, const BivariateField& g, const PoincareCertificate& cert,
                                     const Slack& slack = {});

// ---------------------------------------------------------------------------
// Mean-value trace inequality and chain rule

/// tr[(phi(A) - phi(B))^2] <= 1/2 tr[(A - B)^2 (psi(A) + psi(B))], psi = (phi')^2.
/// Throws DomainError when phi is outside the admissible whitelist.
CheckReport check_mean_value_trace(const SymMatrix& a, const SymMatrix& b, const ScalarFn& phi,
                                   const Slack& slack = {});

/// tr E(phi(f)) <= E_mu tr[Gamma(f) psi(f)].
CheckReport check_chain_rule(const FiniteChain& chain, const FiniteField& f, const ScalarFn& phi,
                             const Slack& slack = {});

// ---------------------------------------------------------------------------
// Exponential moments

/// d [1 + alpha theta^2 tr_bar E / (1 - alpha v_f theta^2 / 2)_+]; nullopt when
/// the positive part vanishes (the bound is +infinity).
std::optional<double> exp_moment_rhs(const BoundParams& p, double trace_dirichlet_normalized);

/// theta at which the exponential-moment bound becomes infinite: sqrt(2 / (alpha v_f)).
double exp_moment_singularity(double alpha, double v_f);

/// `points` values theta_s k / (points + 1), k = 1..points, below the singular
/// theta_s. When v_f == 0 the singularity is absent and the grid is k / points.
std::vector<double> default_theta_grid(double alpha, double v_f, int points = 20);

/// Exact E_mu tr cosh(theta f) against exp_moment_rhs for each theta.
/// Entries past the singularity get verdict SKIPPED.
std::vector<CheckReport> check_exp_moment(const FiniteChain& chain, const FiniteField& f,
                                          const PoincareCertificate& cert, const std::vector<double>& theta_grid,
                                          const Slack& slack = {});

/// Monte Carlo E tr cosh(theta (f - E f)) on a Gaussian model. The variance
/// proxy is exact for a series; a chaos needs `certified_v_f` or the call
/// throws RefusalError.
std::vector<CheckReport> check_exp_moment(const GaussianModel& model, const PoincareCertificate& cert,
                                          const std::vector<double>& theta_grid, const mc::SampleSpec& spec,
                                          std::optional<double> certified_v_f = std::nullopt);

// ---------------------------------------------------------------------------
// Subexponential tails

/// 6 d e^{-lambda}.
double tail_bound(const BoundParams& p);
/// log(6 e d) sqrt(alpha v_f).
double expectation_bound(const BoundParams& p);

/// Exact survival P{||f - E f|| >= sqrt(alpha v_f) lambda} by enumeration,
/// against tail_bound. When v_f == 0 the field is constant and the event is
/// taken as ||f - E f|| > 0, which has probability zero.
std::vector<CheckReport> check_tail_empirical(const FiniteChain& chain, const FiniteField& f,
                                              const PoincareCertificate& cert, const std::vector<double>& lambda_grid,
                                              const Slack& slack = {});

/// Monte Carlo survival with 99% Wilson intervals. Requires spec.n_samples >=
/// 10^4. Refuses (RefusalError) when v_f is only estimable and no certified
/// value is supplied.
std::vector<CheckReport> check_tail_empirical(const GaussianModel& model, const PoincareCertificate& cert,
                                              const std::vector<double>& lambda_grid, const mc::SampleSpec& spec,
                                              std::optional<double> certified_v_f = std::nullopt);

// ---------------------------------------------------------------------------
// Polynomial moments

struct PolyRhs {
  double value = 0.0;
  /// q in (1, 1.5): the extra factor sqrt(2) was applied.
  bool sqrt2_regime = false;
};

/// sqrt(2 alpha q^2) (E tr Gamma^q)^{1/(2q)}, times sqrt(2) for q in (1, 1.5).
/// Throws DomainError for q < 1.
PolyRhs poly_moment_rhs(const BoundParams& p, double trace_gamma_q);

/// Exact (E_mu tr |f - E f|^{2q})^{1/(2q)} against poly_moment_rhs for each q.
std::vector<CheckReport> check_poly_moment(const FiniteChain& chain, const FiniteField& f,
                                           const PoincareCertificate& cert, const std::vector<double>& q_list,
                                           const Slack& slack = {});

/// Monte Carlo LHS; the RHS is exact for a series and estimated for a chaos.
std::vector<CheckReport> check_poly_moment(const GaussianModel& model, const PoincareCertificate& cert,
                                           const std::vector<double>& q_list, const mc::SampleSpec& spec);

/// E tr |g|^{2q} <= intdim(E(g)) alpha^q q! v_g^q for the symmetrized field
/// g(z, z') = f(z) - f(z'), exact enumeration over Omega^2. q must be a
/// natural number (DomainError otherwise, and above 20).
CheckReport check_intdim_variant(const FiniteChain& chain, const FiniteField& f, const PoincareCertificate& cert, int q,
                                 const Slack& slack = {});

// ---------------------------------------------------------------------------
// Gaussian chaos

/// 8 q^2 ||A||. Throws DomainError unless A is PSD and q >= 1.
double chaos_scalar_bound(const SymMatrix& a, double q);

/// The real coefficient matrix [a_ij] of a scalar chaos. Throws
/// DimensionError when the chaos is matrix-valued.
SymMatrix scalar_chaos_matrix(const GaussianChaos& c);

/// Monte Carlo (E |f|^{2q})^{1/(2q)} for the scalar chaos f against 8 q^2 ||A||.
std::vector<CheckReport> check_chaos_scalar(const GaussianChaos& c, const std::vector<double>& q_list,
                                            const mc::SampleSpec& spec);

}  // namespace tpl
