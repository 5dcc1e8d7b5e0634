#pragma once

// Carre du champ operators, Dirichlet forms, matrix variances, and variance
// proxies. Exact on finite chains; analytic or Monte Carlo on Gaussian models.

#include "tpl/models.hpp"
#include "tpl/montecarlo.hpp"

#include "json.hpp"

#include <optional>
#include <span>
#include <vector>

namespace tpl {

enum class Mode { Exact, Estimated };

std::string to_string(Mode m);

struct SampleMeta {
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
  double dirichlet_trace_half_width = 0.0;
  double variance_trace_half_width = 0.0;
};

/// Energy quantities of one field. For finite chains `gamma` holds one matrix
/// per state; for smooth fields it holds the evaluations at the sample points.
struct EnergyReport {
  std::vector<SymMatrix> gamma;
  SymMatrix dirichlet;
  SymMatrix variance;
  double v_f = 0.0;
  Mode mode = Mode::Exact;
  std::optional<SampleMeta> sample_meta;
};

nlohmann::json to_json(const EnergyReport& r);
nlohmann::json matrix_to_json(const SymMatrix& m);

struct VarianceProxy {
  double value = 0.0;
  Mode mode = Mode::Exact;
};

// ---------------------------------------------------------------------------
// Finite chains

/// Gamma(f)(z) = 1/2 sum_{z' != z} L(z, z') (f(z') - f(z))^2.
SymMatrix carre_finite(const FiniteChain& chain, const FiniteField& f, int z);
std::vector<SymMatrix> carre_all(const FiniteChain& chain, const FiniteField& f);

/// Gamma(f)(z) = 1/2 sum_i E_{Z ~ mu} (f(z) - f(z with coordinate i set to Z))^2
/// for f on the row-major product of n_coords copies of (Omega, base_mu).
SymMatrix carre_product_formula(std::span<const double> base_mu, int n_coords, const FiniteField& f, std::size_t z);

/// E_mu f.
SymMatrix expectation(const FiniteChain& chain, const FiniteField& f);
/// f - E_mu f.
FiniteField centered(const FiniteChain& chain, const FiniteField& f);

SymMatrix dirichlet_form(const FiniteChain& chain, const FiniteField& f);
SymMatrix matrix_variance(const FiniteChain& chain, const FiniteField& f);
/// max_z ||Gamma(f)(z)|| (mu has full support, so this is the essential sup).
VarianceProxy variance_proxy(const FiniteChain& chain, const FiniteField& f);
EnergyReport energy_report(const FiniteChain& chain, const FiniteField& f);

// ---------------------------------------------------------------------------
// Gaussian space (Ornstein-Uhlenbeck dynamics)

/// Gamma(f)(x) = sum_i (d_i f(x))^2, from analytic partials when the field
/// carries them, otherwise central differences with h_i = cbrt(eps)(1 + |x_i|).
SymMatrix carre_smooth(const SmoothField& f, std::span<const double> x);

/// Exact: Gamma = E = sum_i A_i^2.
SymMatrix dirichlet_form(const GaussianSeries& s);
/// Exact: Var = sum_i A_i^2.
SymMatrix matrix_variance(const GaussianSeries& s);
/// Exact: ||sum_i A_i^2||.
VarianceProxy variance_proxy(const GaussianSeries& s);
EnergyReport energy_report(const GaussianSeries& s);

/// Monte Carlo E Gamma(f) over spec.n_samples standard normal points.
SymMatrix dirichlet_form(const SmoothField& f, const mc::SampleSpec& spec);
/// Monte Carlo E f^2 - (E f)^2.
SymMatrix matrix_variance(const SmoothField& f, const mc::SampleSpec& spec);
/// Supremum of ||Gamma(f)|| over the sampled grid; a lower estimate of the
/// true supremum, always reported as Mode::Estimated.
VarianceProxy variance_proxy(const SmoothField& f, const mc::SampleSpec& grid);
EnergyReport energy_report(const SmoothField& f, const mc::SampleSpec& spec);

// ---------------------------------------------------------------------------
// Bivariate fields on (Omega^2, mu x mu)

/// g : Omega^2 -> H_d stored row-major: value(z1, z2) = values[z1 * n + z2].
struct BivariateField {
  int base_states = 0;
  std::vector<SymMatrix> values;

  BivariateField() = default;
  BivariateField(int n, std::vector<SymMatrix> v);
  [[nodiscard]] const SymMatrix& at(int z1, int z2) const {
    return values[static_cast<std::size_t>(z1) * static_cast<std::size_t>(base_states) + static_cast<std::size_t>(z2)];
  }
  [[nodiscard]] int dim() const { return values.front().dim(); }
};

/// Coordinate-wise carre du champ Gamma_coord(g)(z1, z2), coord in {1, 2}:
/// the base dynamics move one coordinate while the other is frozen.
SymMatrix bivariate_carre_coordinate(const FiniteChain& base, const BivariateField& g, int coord, int z1, int z2);
/// Gamma(g) = Gamma_1(g) + Gamma_2(g).
SymMatrix bivariate_carre(const FiniteChain& base, const BivariateField& g, int z1, int z2);
/// E_{mu x mu}[E_1(g) + E_2(g)].
SymMatrix bivariate_dirichlet(const FiniteChain& base, const BivariateField& g);
double bivariate_variance_proxy(const FiniteChain& base, const BivariateField& g);
/// Var_{mu x mu}[g].
SymMatrix bivariate_variance(const FiniteChain& base, const BivariateField& g);
/// Conditional variance Var_coord[g] as a function of the frozen coordinate.
std::vector<SymMatrix> conditional_variance(const FiniteChain& base, const BivariateField& g, int coord);
/// Applies phi spectrally to every value.
BivariateField apply_spectral_fn(const BivariateField& g, const ScalarFn& phi);

/// The symmetrized field g(z, z') = f(z) - f(z') with its energies, all
/// computed from the bivariate definitions.
struct SymmetrizedField {
  BivariateField g;
  std::vector<SymMatrix> gamma;  // Gamma(g), row-major over pairs
  SymMatrix dirichlet;
  double v_g = 0.0;
};

/// Throws CapacityError when n^2 exceeds kMaxStates.
SymmetrizedField bivariate_symmetrized(const FiniteChain& chain, const FiniteField& f);

}  // namespace tpl
