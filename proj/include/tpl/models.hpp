#pragma once

// State spaces and Markov dynamics: finite reversible chains (graph walks,
// product chains, complete-refresh chains) and Gaussian-space models driven by
// the Ornstein-Uhlenbeck process.

#include "tpl/spectral.hpp"

#include "json.hpp"

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace tpl {

/// Largest state space enumerated exactly.
inline constexpr std::size_t kMaxStates = 1'000'000;
/// Largest number of stored off-diagonal generator entries.
inline constexpr std::size_t kMaxTransitions = 20'000'000;

struct Transition {
  int target = 0;
  double rate = 0.0;
};

/// Reversible continuous-time Markov chain on {0, ..., n-1}. The generator is
/// stored sparsely as off-diagonal jump rates; L(z, z) = -sum of the row.
///
/// Invariants checked on construction: rates >= 0, stationary weights > 0 and
/// summing to 1, detailed balance |mu_i L_ij - mu_j L_ji| <= 1e-12.
class FiniteChain {
 public:
  FiniteChain(std::vector<std::vector<Transition>> jumps, std::vector<double> stationary,
              std::vector<std::string> labels = {}, std::string name = {});

  /// From a dense generator. Rows must sum to zero within 1e-12 (1 + max|L|).
  static FiniteChain from_generator(const Eigen::MatrixXd& generator, std::vector<double> stationary,
                                    std::vector<std::string> labels = {}, std::string name = {});

  [[nodiscard]] int n_states() const { return static_cast<int>(stationary_.size()); }
  [[nodiscard]] std::span<const Transition> jumps(int z) const { return jumps_[static_cast<std::size_t>(z)]; }
  [[nodiscard]] double exit_rate(int z) const { return exit_[static_cast<std::size_t>(z)]; }
  /// L(from, to), including the diagonal.
  [[nodiscard]] double rate(int from, int to) const;
  [[nodiscard]] const std::vector<double>& stationary() const { return stationary_; }
  [[nodiscard]] const std::vector<std::string>& labels() const { return labels_; }
  [[nodiscard]] const std::string& name() const { return name_; }
  [[nodiscard]] std::size_t n_transitions() const;

  /// Dense generator; throws CapacityError above 4096 states.
  [[nodiscard]] Eigen::MatrixXd generator() const;

  /// The chain with generator c L.
  [[nodiscard]] FiniteChain scaled(double c) const;

 private:
  std::vector<std::vector<Transition>> jumps_;
  std::vector<double> exit_;
  std::vector<double> stationary_;
  std::vector<std::string> labels_;
  std::string name_;
};

/// Continuous-time random walk on a connected k-regular graph: L = A / k - I,
/// uniform stationary measure. Throws ModelError on irregular, disconnected,
/// non-symmetric, or looped input.
FiniteChain chain_from_graph(const std::vector<std::vector<int>>& adjacency, int k);
FiniteChain chain_from_edges(int n_vertices, const std::vector<std::pair<int, int>>& edges, int k);

/// Complete graph K_n as a walk (degree n - 1).
FiniteChain complete_graph_chain(int n);
/// Cycle C_n as a walk (degree 2).
FiniteChain cycle_chain(int n);

/// n independent unit-rate copies of `base`, one per coordinate. Tuple states
/// are enumerated row-major (the first coordinate varies slowest). Throws
/// CapacityError beyond kMaxStates states or kMaxTransitions jumps.
FiniteChain product_chain(const FiniteChain& base, int n);

/// L = rate [[-1, 1], [1, -1]], mu = (1/2, 1/2).
FiniteChain two_state_chain(double rate);

/// L = Pi - I where Pi projects onto mu: from any state, jump to z' at rate mu(z').
FiniteChain complete_refresh_chain(std::vector<double> mu);

/// Index <-> tuple conversion for row-major product states.
std::vector<int> product_tuple(std::size_t index, int base_states, int n);
std::size_t product_index(std::span<const int> tuple, int base_states);

/// JSON chain descriptor: {"states": [...], "generator": [[...]], "stationary": [...]}
/// or {"graph": {"edges": [[i, j], ...], "k": int, "n": int (optional)}}.
FiniteChain chain_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Matrix fields

/// f : Omega -> H_d tabulated on the states of a finite chain.
struct FiniteField {
  std::vector<SymMatrix> values;

  FiniteField() = default;
  /// Throws DimensionError when empty or when dims differ.
  explicit FiniteField(std::vector<SymMatrix> v);
  /// Scalar field: one 1 x 1 matrix per state.
  static FiniteField scalar(std::span<const double> v);

  [[nodiscard]] int dim() const { return values.front().dim(); }
  [[nodiscard]] int size() const { return static_cast<int>(values.size()); }
  [[nodiscard]] const SymMatrix& operator[](int z) const { return values[static_cast<std::size_t>(z)]; }
};

/// f : R^n -> H_d with an optional analytic-partials evaluator.
struct SmoothField {
  using Evaluator = std::function<SymMatrix(std::span<const double>)>;
  using PartialsEvaluator = std::function<std::vector<SymMatrix>(std::span<const double>)>;

  int ambient_dim = 0;
  int dim = 0;
  Evaluator eval;
  PartialsEvaluator partials;  // empty when not available
};

using MatrixField = std::variant<FiniteField, SmoothField>;

/// f(X) = sum_i X_i A_i for X ~ N(0, I_n).
class GaussianSeries {
 public:
  explicit GaussianSeries(std::vector<SymMatrix> coefficients);
  [[nodiscard]] const std::vector<SymMatrix>& coefficients() const { return coeffs_; }
  [[nodiscard]] int n() const { return static_cast<int>(coeffs_.size()); }
  [[nodiscard]] int dim() const { return coeffs_.front().dim(); }

 private:
  std::vector<SymMatrix> coeffs_;
};

/// f(X) = sum_{ij} X_i X_j A_ij with A_ij = A_ji.
class GaussianChaos {
 public:
  /// `coefficients` is the n x n array in row-major order.
  GaussianChaos(int n, std::vector<SymMatrix> coefficients);
  /// Scalar chaos from a real symmetric coefficient matrix [a_ij].
  static GaussianChaos scalar(const Eigen::MatrixXd& a);

  [[nodiscard]] int n() const { return n_; }
  [[nodiscard]] int dim() const { return coeffs_.front().dim(); }
  [[nodiscard]] const SymMatrix& coefficient(int i, int j) const {
    return coeffs_[static_cast<std::size_t>(i * n_ + j)];
  }
  /// E f = sum_i A_ii.
  [[nodiscard]] SymMatrix mean() const;

 private:
  int n_;
  std::vector<SymMatrix> coeffs_;
};

SmoothField series_as_field(const GaussianSeries& s);
SmoothField chaos_as_field(const GaussianChaos& c);

}  // namespace tpl
