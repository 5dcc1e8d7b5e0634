#include "tpl/models.hpp"

#include "tpl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <queue>

namespace tpl {

namespace {

constexpr double kBalanceTol = 1e-12;
constexpr double kMassTol = 1e-10;
constexpr int kDenseGeneratorLimit = 4096;

std::string state_label(const std::vector<std::string>& labels, int z) {
  return labels.empty() ? std::to_string(z) : labels[static_cast<std::size_t>(z)];
}

}  // namespace

FiniteChain::FiniteChain(std::vector<std::vector<Transition>> jumps, std::vector<double> stationary,
                         std::vector<std::string> labels, std::string name)
    : jumps_(std::move(jumps)), stationary_(std::move(stationary)), labels_(std::move(labels)), name_(std::move(name)) {
  const std::size_t n = stationary_.size();
  if (n == 0) throw ModelError("chain needs at least one state");
  if (jumps_.size() != n) {
    throw ModelError("chain: " + std::to_string(jumps_.size()) + " jump rows for " + std::to_string(n) + " states");
  }
  if (!labels_.empty() && labels_.size() != n) throw ModelError("chain: label count does not match state count");

  double mass = 0.0;
  for (std::size_t z = 0; z < n; ++z) {
    if (!(stationary_[z] > 0.0)) {
      throw ModelError("chain: stationary weight of state " + std::to_string(z) + " must be > 0");
    }
    mass += stationary_[z];
  }
  if (std::abs(mass - 1.0) > kMassTol) throw ModelError("chain: stationary measure sums to " + std::to_string(mass));

  exit_.assign(n, 0.0);
  for (std::size_t z = 0; z < n; ++z) {
    auto& row = jumps_[z];
    std::erase_if(row, [](const Transition& t) { return t.rate == 0.0; });
    std::sort(row.begin(), row.end(), [](const Transition& a, const Transition& b) { return a.target < b.target; });
    for (std::size_t k = 0; k < row.size(); ++k) {
      const Transition& t = row[k];
      if (t.target < 0 || static_cast<std::size_t>(t.target) >= n) throw ModelError("chain: jump target out of range");
      if (static_cast<std::size_t>(t.target) == z) throw ModelError("chain: self-jump at state " + std::to_string(z));
      if (!(t.rate > 0.0)) throw ModelError("chain: negative off-diagonal rate at state " + std::to_string(z));
      if (k > 0 && row[k - 1].target == t.target) throw ModelError("chain: duplicate jump target");
      exit_[z] += t.rate;
    }
  }

  for (std::size_t z = 0; z < n; ++z) {
    for (const Transition& t : jumps_[z]) {
      const double forward = stationary_[z] * t.rate;
      const double backward = stationary_[static_cast<std::size_t>(t.target)] * rate(t.target, static_cast<int>(z));
      if (std::abs(forward - backward) > kBalanceTol) {
        throw ModelError("chain is not reversible: detailed balance fails between states " +
                         state_label(labels_, static_cast<int>(z)) + " and " + state_label(labels_, t.target));
      }
    }
  }
}

FiniteChain FiniteChain::from_generator(const Eigen::MatrixXd& generator, std::vector<double> stationary,
                                        std::vector<std::string> labels, std::string name) {
  const Eigen::Index n = generator.rows();
  if (generator.cols() != n || n == 0) throw ModelError("generator must be a non-empty square matrix");
  if (static_cast<Eigen::Index>(stationary.size()) != n) throw ModelError("stationary length does not match generator");
  const double scale = 1.0 + generator.cwiseAbs().maxCoeff();
  std::vector<std::vector<Transition>> jumps(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(generator.row(i).sum()) > kBalanceTol * scale) {
      throw ModelError("generator row " + std::to_string(i) + " does not sum to zero");
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double r = generator(i, j);
      if (r < 0.0) throw ModelError("generator has a negative off-diagonal entry at (" + std::to_string(i) + ", " +
                                    std::to_string(j) + ")");
      if (r > 0.0) jumps[static_cast<std::size_t>(i)].push_back({static_cast<int>(j), r});
    }
  }
  return FiniteChain(std::move(jumps), std::move(stationary), std::move(labels), std::move(name));
}

double FiniteChain::rate(int from, int to) const {
  if (from == to) return -exit_[static_cast<std::size_t>(from)];
  const auto& row = jumps_[static_cast<std::size_t>(from)];
  auto it = std::lower_bound(row.begin(), row.end(), to, [](const Transition& t, int v) { return t.target < v; });
  return (it != row.end() && it->target == to) ? it->rate : 0.0;
}

std::size_t FiniteChain::n_transitions() const {
  std::size_t total = 0;
  for (const auto& row : jumps_) total += row.size();
  return total;
}

Eigen::MatrixXd FiniteChain::generator() const {
  const int n = n_states();
  if (n > kDenseGeneratorLimit) {
    throw CapacityError("dense generator requested for " + std::to_string(n) + " states (limit " +
                        std::to_string(kDenseGeneratorLimit) + ")");
  }
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (int z = 0; z < n; ++z) {
    l(z, z) = -exit_[static_cast<std::size_t>(z)];
    for (const Transition& t : jumps(z)) l(z, t.target) = t.rate;
  }
  return l;
}

FiniteChain FiniteChain::scaled(double c) const {
  if (!(c > 0.0)) throw ModelError("generator scale must be > 0");
  auto jumps = jumps_;
  for (auto& row : jumps) {
    for (auto& t : row) t.rate *= c;
  }
  return FiniteChain(std::move(jumps), stationary_, labels_, name_);
}

// ---------------------------------------------------------------------------

FiniteChain chain_from_graph(const std::vector<std::vector<int>>& adjacency, int k) {
  const std::size_t n = adjacency.size();
  if (n == 0) throw ModelError("graph has no vertices");
  if (k < 1) throw ModelError("graph degree k must be >= 1");
  std::vector<std::vector<Transition>> jumps(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (adjacency[i].size() != n) throw ModelError("adjacency matrix must be square");
    int degree = 0;
    for (std::size_t j = 0; j < n; ++j) {
      const int a = adjacency[i][j];
      if (a != 0 && a != 1) throw ModelError("adjacency entries must be 0 or 1");
      if (i == j && a != 0) throw ModelError("graph has a self-loop at vertex " + std::to_string(i));
      if (a != adjacency[j].at(i)) throw ModelError("adjacency matrix is not symmetric");
      if (a == 1) {
        ++degree;
        jumps[i].push_back({static_cast<int>(j), 1.0 / k});
      }
    }
    if (degree != k) {
      throw ModelError("graph is not " + std::to_string(k) + "-regular: vertex " + std::to_string(i) + " has degree " +
                       std::to_string(degree));
    }
  }

  std::vector<bool> seen(n, false);
  std::queue<std::size_t> frontier;
  frontier.push(0);
  seen[0] = true;
  std::size_t reached = 1;
  while (!frontier.empty()) {
    const std::size_t v = frontier.front();
    frontier.pop();
    for (const Transition& t : jumps[v]) {
      const auto w = static_cast<std::size_t>(t.target);
      if (!seen[w]) {
        seen[w] = true;
        ++reached;
        frontier.push(w);
      }
    }
  }
  if (reached != n) throw ModelError("graph is disconnected");

  return FiniteChain(std::move(jumps), std::vector<double>(n, 1.0 / static_cast<double>(n)), {},
                     "graph-walk(n=" + std::to_string(n) + ",k=" + std::to_string(k) + ")");
}

FiniteChain chain_from_edges(int n_vertices, const std::vector<std::pair<int, int>>& edges, int k) {
  if (n_vertices < 1) throw ModelError("graph has no vertices");
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n_vertices),
                                    std::vector<int>(static_cast<std::size_t>(n_vertices), 0));
  for (auto [i, j] : edges) {
    if (i < 0 || j < 0 || i >= n_vertices || j >= n_vertices) throw ModelError("edge endpoint out of range");
    if (i == j) throw ModelError("graph has a self-loop at vertex " + std::to_string(i));
    if (adj[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] == 1) {
      throw ModelError("duplicate edge (" + std::to_string(i) + ", " + std::to_string(j) + ")");
    }
    adj[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = 1;
    adj[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = 1;
  }
  return chain_from_graph(adj, k);
}

FiniteChain complete_graph_chain(int n) {
  if (n < 2) throw ModelError("complete graph needs >= 2 vertices");
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n), std::vector<int>(static_cast<std::size_t>(n), 1));
  for (int i = 0; i < n; ++i) adj[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 0;
  return chain_from_graph(adj, n - 1);
}

FiniteChain cycle_chain(int n) {
  if (n < 3) throw ModelError("cycle needs >= 3 vertices");
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
  return chain_from_edges(n, edges, 2);
}

std::vector<int> product_tuple(std::size_t index, int base_states, int n) {
  std::vector<int> tuple(static_cast<std::size_t>(n));
  for (int i = n - 1; i >= 0; --i) {
    tuple[static_cast<std::size_t>(i)] = static_cast<int>(index % static_cast<std::size_t>(base_states));
    index /= static_cast<std::size_t>(base_states);
  }
  return tuple;
}

std::size_t product_index(std::span<const int> tuple, int base_states) {
  std::size_t index = 0;
  for (int z : tuple) index = index * static_cast<std::size_t>(base_states) + static_cast<std::size_t>(z);
  return index;
}

FiniteChain product_chain(const FiniteChain& base, int n) {
  if (n < 1) throw ModelError("product order must be >= 1");
  const auto m = static_cast<std::size_t>(base.n_states());
  std::size_t total = 1;
  for (int i = 0; i < n; ++i) {
    if (total > kMaxStates / m) {
      throw CapacityError("product chain with " + std::to_string(m) + "^" + std::to_string(n) +
                          " states exceeds the enumeration budget of " + std::to_string(kMaxStates));
    }
    total *= m;
  }
  const std::size_t transitions = static_cast<std::size_t>(n) * (total / m) * base.n_transitions();
  if (transitions > kMaxTransitions) {
    throw CapacityError("product chain would store " + std::to_string(transitions) + " jumps (limit " +
                        std::to_string(kMaxTransitions) + ")");
  }

  std::vector<std::size_t> stride(static_cast<std::size_t>(n));
  std::size_t s = 1;
  for (int i = n - 1; i >= 0; --i) {
    stride[static_cast<std::size_t>(i)] = s;
    s *= m;
  }

  std::vector<std::vector<Transition>> jumps(total);
  std::vector<double> mu(total);
  std::vector<std::string> labels(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    const std::vector<int> tuple = product_tuple(idx, static_cast<int>(m), n);
    double weight = 1.0;
    std::string label = "(";
    for (int i = 0; i < n; ++i) {
      const int zi = tuple[static_cast<std::size_t>(i)];
      weight *= base.stationary()[static_cast<std::size_t>(zi)];
      if (i > 0) label += ",";
      label += state_label(base.labels(), zi);
      for (const Transition& t : base.jumps(zi)) {
        const auto target = static_cast<std::ptrdiff_t>(idx) +
                            (static_cast<std::ptrdiff_t>(t.target) - zi) *
                                static_cast<std::ptrdiff_t>(stride[static_cast<std::size_t>(i)]);
        jumps[idx].push_back({static_cast<int>(target), t.rate});
      }
    }
    mu[idx] = weight;
    labels[idx] = label + ")";
  }
  return FiniteChain(std::move(jumps), std::move(mu), std::move(labels),
                     "product(" + base.name() + ",n=" + std::to_string(n) + ")");
}

FiniteChain two_state_chain(double rate) {
  if (!(rate > 0.0)) throw ModelError("two-state rate must be > 0");
  std::vector<std::vector<Transition>> jumps{{{1, rate}}, {{0, rate}}};
  return FiniteChain(std::move(jumps), {0.5, 0.5}, {"0", "1"}, "two-state(rate=" + std::to_string(rate) + ")");
}

FiniteChain complete_refresh_chain(std::vector<double> mu) {
  const std::size_t n = mu.size();
  std::vector<std::vector<Transition>> jumps(n);
  for (std::size_t z = 0; z < n; ++z) {
    for (std::size_t w = 0; w < n; ++w) {
      if (w != z) jumps[z].push_back({static_cast<int>(w), mu[w]});
    }
  }
  return FiniteChain(std::move(jumps), std::move(mu), {}, "complete-refresh");
}

FiniteChain chain_from_json(const nlohmann::json& j) {
  try {
    if (j.contains("graph")) {
      const auto& g = j.at("graph");
      const int k = g.at("k").get<int>();
      std::vector<std::pair<int, int>> edges;
      int n = 0;
      for (const auto& e : g.at("edges")) {
        if (!e.is_array() || e.size() != 2) throw ModelError("graph edge must be a pair [i, j]");
        const int a = e[0].get<int>();
        const int b = e[1].get<int>();
        edges.emplace_back(a, b);
        n = std::max({n, a + 1, b + 1});
      }
      if (g.contains("n")) n = g.at("n").get<int>();
      return chain_from_edges(n, edges, k);
    }
    const auto rows = j.at("generator").get<std::vector<std::vector<double>>>();
    const auto n = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd l(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != n) {
        throw ModelError("generator row " + std::to_string(i) + " has the wrong length");
      }
      for (Eigen::Index c = 0; c < n; ++c) l(i, c) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
    }
    std::vector<std::string> labels;
    if (j.contains("states")) {
      for (const auto& s : j.at("states")) labels.push_back(s.is_string() ? s.get<std::string>() : s.dump());
    }
    return FiniteChain::from_generator(l, j.at("stationary").get<std::vector<double>>(), std::move(labels),
                                       j.value("name", std::string("chain")));
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(std::string("chain descriptor: ") + e.what());
  }
}

// ---------------------------------------------------------------------------

FiniteField::FiniteField(std::vector<SymMatrix> v) : values(std::move(v)) {
  if (values.empty()) throw DimensionError("field needs at least one value");
  const int d = values.front().dim();
  for (const auto& m : values) {
    if (m.dim() != d) throw DimensionError("field values have mixed dimensions");
  }
}

FiniteField FiniteField::scalar(std::span<const double> v) {
  std::vector<SymMatrix> vals;
  vals.reserve(v.size());
  for (double x : v) vals.push_back(SymMatrix::scalar(x));
  return FiniteField(std::move(vals));
}

GaussianSeries::GaussianSeries(std::vector<SymMatrix> coefficients) : coeffs_(std::move(coefficients)) {
  if (coeffs_.empty()) throw ModelError("Gaussian series needs at least one coefficient");
  for (const auto& a : coeffs_) {
    if (a.dim() != coeffs_.front().dim()) throw DimensionError("series coefficients have mixed dimensions");
  }
}

GaussianChaos::GaussianChaos(int n, std::vector<SymMatrix> coefficients) : n_(n), coeffs_(std::move(coefficients)) {
  if (n < 1) throw ModelError("Gaussian chaos needs n >= 1");
  if (coeffs_.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n)) {
    throw ModelError("Gaussian chaos needs n*n coefficients");
  }
  for (const auto& a : coeffs_) {
    if (a.dim() != coeffs_.front().dim()) throw DimensionError("chaos coefficients have mixed dimensions");
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const SymMatrix& aij = coefficient(i, j);
      const SymMatrix& aji = coefficient(j, i);
      const double scale = 1.0 + std::max(aij.matrix().cwiseAbs().maxCoeff(), aji.matrix().cwiseAbs().maxCoeff());
      if (max_abs_diff(aij, aji) > 1e-12 * scale) {
        throw ModelError("chaos coefficients must satisfy A_ij == A_ji (i=" + std::to_string(i) +
                         ", j=" + std::to_string(j) + ")");
      }
    }
  }
}

GaussianChaos GaussianChaos::scalar(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw DimensionError("scalar chaos needs a square coefficient matrix");
  const int n = static_cast<int>(a.rows());
  std::vector<SymMatrix> coeffs;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) coeffs.push_back(SymMatrix::scalar(a(i, j)));
  }
  return GaussianChaos(n, std::move(coeffs));
}

SymMatrix GaussianChaos::mean() const {
  SymMatrix m = SymMatrix::zero(dim());
  for (int i = 0; i < n_; ++i) m += coefficient(i, i);
  return m;
}

SmoothField series_as_field(const GaussianSeries& s) {
  auto coeffs = std::make_shared<const std::vector<SymMatrix>>(s.coefficients());
  const int d = s.dim();
  SmoothField f;
  f.ambient_dim = s.n();
  f.dim = d;
  f.eval = [coeffs, d](std::span<const double> x) {
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t i = 0; i < coeffs->size(); ++i) acc += x[i] * (*coeffs)[i].matrix();
    return SymMatrix(acc);
  };
  f.partials = [coeffs](std::span<const double>) { return *coeffs; };
  return f;
}

SmoothField chaos_as_field(const GaussianChaos& c) {
  auto chaos = std::make_shared<const GaussianChaos>(c);
  const int d = c.dim();
  const int n = c.n();
  SmoothField f;
  f.ambient_dim = n;
  f.dim = d;
  f.eval = [chaos, d, n](std::span<const double> x) {
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) acc += (x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(j)]) *
                                         chaos->coefficient(i, j).matrix();
    }
    return SymMatrix(acc);
  };
  f.partials = [chaos, d, n](std::span<const double> x) {
    std::vector<SymMatrix> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(d, d);
      for (int j = 0; j < n; ++j) acc += x[static_cast<std::size_t>(j)] * chaos->coefficient(i, j).matrix();
      out.emplace_back(2.0 * acc);
    }
    return out;
  };
  return f;
}

}  // namespace tpl
