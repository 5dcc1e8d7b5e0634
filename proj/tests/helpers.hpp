#pragma once

#include "tpl/models.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace testing {

inline Eigen::MatrixXd gaussian_matrix(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> n01;
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = n01(rng);
  }
  return m;
}

inline tpl::SymMatrix random_sym(std::mt19937_64& rng, int d, double scale = 1.0) {
  return tpl::SymMatrix(scale * gaussian_matrix(rng, d, d));
}

inline tpl::FiniteField random_finite_field(std::mt19937_64& rng, int n_states, int d, double scale = 1.0) {
  std::vector<tpl::SymMatrix> v;
  for (int z = 0; z < n_states; ++z) v.push_back(random_sym(rng, d, scale));
  return tpl::FiniteField(std::move(v));
}

/// Dense-generator Dirichlet form: E(f) = -E_mu[f L f] symmetrized, written
/// entrywise as 1/2 sum_{x,y} mu(x) L(x,y) (f(y) - f(x))^2.
inline Eigen::MatrixXd dense_dirichlet(const Eigen::MatrixXd& gen, const std::vector<double>& mu,
                                       const tpl::FiniteField& f) {
  const int d = f.dim();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(d, d);
  for (int x = 0; x < gen.rows(); ++x) {
    for (int y = 0; y < gen.cols(); ++y) {
      if (x == y) continue;
      const Eigen::MatrixXd diff = f[y].matrix() - f[x].matrix();
      acc += 0.5 * mu[static_cast<std::size_t>(x)] * gen(x, y) * diff * diff;
    }
  }
  return acc;
}

/// Var = E f^2 - (E f)^2, computed in that (uncentered) form.
inline Eigen::MatrixXd uncentered_variance(const std::vector<double>& mu, const tpl::FiniteField& f) {
  const int d = f.dim();
  Eigen::MatrixXd m2 = Eigen::MatrixXd::Zero(d, d);
  Eigen::MatrixXd m1 = Eigen::MatrixXd::Zero(d, d);
  for (int z = 0; z < f.size(); ++z) {
    m1 += mu[static_cast<std::size_t>(z)] * f[z].matrix();
    m2 += mu[static_cast<std::size_t>(z)] * f[z].matrix() * f[z].matrix();
  }
  return m2 - m1 * m1;
}

inline double rel_close(double a, double b, double tol) { return std::abs(a - b) <= tol * (1.0 + std::abs(b)); }

}  // namespace testing
