#include "tpl/fixtures.hpp"

#include "tpl/errors.hpp"

#include <cmath>

namespace tpl {

namespace {

SymMatrix pauli_z() { return SymMatrix((Eigen::MatrixXd(2, 2) << 1, 0, 0, -1).finished()); }
SymMatrix pauli_x() { return SymMatrix((Eigen::MatrixXd(2, 2) << 0, 1, 1, 0).finished()); }

}  // namespace

const std::vector<FixtureInfo>& fixture_catalog() {
  static const std::vector<FixtureInfo> catalog{
      {"two-state", "two-state chain with unit rates, mu = (1/2, 1/2); gap 2, alpha = 1/2", citation::kScalarPoincare},
      {"K4", "random walk on the complete graph K_4; alpha = 3/4", citation::kTracePoincare},
      {"4-cycle", "random walk on the 4-cycle; gap 1, alpha = 1", citation::kTracePoincare},
      {"refresh-product", "two copies of the complete-refresh chain on mu = (1/2, 1/2); alpha = 1",
       citation::kPoincareSubadditivity},
      {"pauli-series", "Gaussian series x_1 diag(1, -1) + x_2 [[0, 1], [1, 0]]; alpha = 1, v_f = 2",
       citation::kSubexponential},
      {"psd-chaos", "scalar Gaussian chaos x_1^2 + x_2^2 (A = diag(1, 1))", citation::kGaussianChaos},
  };
  return catalog;
}

Model load_fixture(const std::string& name) {
  if (name == "two-state") return two_state_chain(1.0);
  if (name == "K4") return complete_graph_chain(4);
  if (name == "4-cycle") return cycle_chain(4);
  if (name == "refresh-product") return product_chain(complete_refresh_chain({0.5, 0.5}), 2);
  if (name == "pauli-series") return GaussianModel(GaussianSeries({pauli_z(), pauli_x()}));
  if (name == "psd-chaos") return GaussianModel(GaussianChaos::scalar(Eigen::MatrixXd::Identity(2, 2)));
  throw ModelError("unknown fixture '" + name + "'");
}

std::vector<std::string> named_field_names() { return {"constant", "indicator", "gap-eigenfunction", "pauli"}; }

FiniteField named_field(const FiniteChain& chain, const std::string& name) {
  const int n = chain.n_states();
  std::vector<double> v(static_cast<std::size_t>(n), 0.0);
  if (name == "constant") return FiniteField::scalar(v);
  if (name == "indicator") {
    v.back() = 1.0;
    return FiniteField::scalar(v);
  }
  if (name == "gap-eigenfunction") {
    const auto& mu = chain.stationary();
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      s(i, i) = chain.exit_rate(i);
      for (const Transition& t : chain.jumps(i)) {
        s(i, t.target) = -std::sqrt(mu[static_cast<std::size_t>(i)] / mu[static_cast<std::size_t>(t.target)]) * t.rate;
      }
    }
    const SpectralDecomposition eig = eigh(SymMatrix(s));
    for (int i = 0; i < n; ++i) {
      v[static_cast<std::size_t>(i)] = eig.eigenvectors(i, std::min(1, n - 1)) / std::sqrt(mu[static_cast<std::size_t>(i)]);
    }
    return FiniteField::scalar(v);
  }
  if (name == "pauli") {
    std::vector<SymMatrix> vals;
    vals.reserve(static_cast<std::size_t>(n));
    for (int z = 0; z < n; ++z) {
      vals.push_back((z % 2 == 1 ? 1.0 : -1.0) * pauli_z() + (static_cast<double>(z) / n) * pauli_x());
    }
    return FiniteField(std::move(vals));
  }
  throw ModelError("unknown field fixture '" + name + "'");
}

}  // namespace tpl
