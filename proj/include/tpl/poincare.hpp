#pragma once

// Poincare constants of finite chains from spectral gaps, and checks of the
// scalar and trace Poincare inequalities.

#include "tpl/energy.hpp"
#include "tpl/report.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tpl {

struct PoincareCertificate {
  enum class Method { SpectralGap, UserSupplied };

  double alpha = 1.0;
  double gap = 1.0;
  Method method = Method::SpectralGap;
  std::string chain_id;
};

std::string to_string(PoincareCertificate::Method m);
nlohmann::json to_json(const PoincareCertificate& c);

/// gap = smallest nonzero eigenvalue of -D^{1/2} L D^{-1/2}, D = diag(mu);
/// alpha = 1 / gap. Throws ModelError when the gap vanishes (disconnected
/// chain or a single state) and CapacityError above 4096 states.
PoincareCertificate poincare_constant(const FiniteChain& chain);

/// A constant supplied by the caller (gap = 1 / alpha). Throws DomainError
/// unless alpha > 0.
PoincareCertificate user_certificate(double alpha, std::string chain_id);

/// The Ornstein-Uhlenbeck semigroup on (R^n, gamma_n): alpha = 1.
PoincareCertificate ou_certificate();

/// Var_mu[f] <= alpha E(f) for a real-valued field.
CheckReport check_scalar_poincare(const FiniteChain& chain, std::span<const double> f, const PoincareCertificate& cert,
                                  const Slack& slack = {});

/// tr Var_mu[f] <= alpha tr E(f).
CheckReport check_trace_poincare(const FiniteChain& chain, const FiniteField& f, const PoincareCertificate& cert,
                                 const Slack& slack = {});

/// Worst ratio tr Var / tr E over random symmetric Gaussian matrix fields and
/// their scalar compressions z -> <u, f(z) e_j> with random sign vectors u.
struct ProbeReport {
  int trials = 0;
  std::uint64_t seed = 0;
  std::vector<int> dims;
  double alpha = 0.0;
  double sup_ratio = 0.0;
  bool pass = true;

  struct Argmax {
    int trial = 0;
    int dim = 0;
    bool compression = false;
    int column = -1;
  };
  std::optional<Argmax> argmax;
  std::optional<FiniteField> maximizer;
};

nlohmann::json to_json(const ProbeReport& r);

/// Trial t draws a field of dimension dims[t % dims.size()] from stream
/// (seed, t). Passes when sup_ratio <= alpha (1 + 1e-9). trials == 0 gives an
/// empty, passing report.
ProbeReport equivalence_probe(const FiniteChain& chain, const PoincareCertificate& cert, int trials,
                              const std::vector<int>& dims, std::uint64_t seed);

/// Field with i.i.d. N(0, 1) entries symmetrized per state, drawn from `stream`.
FiniteField random_field(int n_states, int d, const mc::Stream& stream);

}  // namespace tpl
