#include "doctest.h"
#include "helpers.hpp"

#include "tpl/energy.hpp"
#include "tpl/errors.hpp"

#include <cmath>

using tpl::FiniteChain;
using tpl::FiniteField;
using tpl::SymMatrix;

TEST_CASE("two-state oracle values") {
  const FiniteChain c = tpl::two_state_chain(1.0);
  const double v[] = {0.0, 1.0};
  const FiniteField f = FiniteField::scalar(v);
  const auto r = tpl::energy_report(c, f);
  CHECK(r.gamma[0](0, 0) == doctest::Approx(0.5));
  CHECK(r.gamma[1](0, 0) == doctest::Approx(0.5));
  CHECK(r.dirichlet(0, 0) == doctest::Approx(0.5));
  CHECK(r.variance(0, 0) == doctest::Approx(0.25));
  CHECK(r.v_f == doctest::Approx(0.5));
  CHECK(r.mode == tpl::Mode::Exact);
  const auto j = tpl::to_json(r);
  CHECK(j["mode"] == "EXACT");
  CHECK(j["sample_meta"].is_null());
}

TEST_CASE("carre du champ matches the dense generator formula") {
  std::mt19937_64 rng(1);
  for (const FiniteChain& c : {tpl::complete_graph_chain(5), tpl::cycle_chain(6),
                               tpl::complete_refresh_chain({0.1, 0.2, 0.3, 0.4})}) {
    for (int trial = 0; trial < 20; ++trial) {
      const FiniteField f = testing::random_finite_field(rng, c.n_states(), 1 + trial % 3);
      const Eigen::MatrixXd e = testing::dense_dirichlet(c.generator(), c.stationary(), f);
      CHECK((tpl::dirichlet_form(c, f).matrix() - e).norm() < 1e-12 * (1.0 + e.norm()));
      const Eigen::MatrixXd var = testing::uncentered_variance(c.stationary(), f);
      CHECK((tpl::matrix_variance(c, f).matrix() - var).norm() < 1e-12 * (1.0 + var.norm()));
      CHECK(tpl::is_psd(tpl::matrix_variance(c, f)));
      for (int z = 0; z < c.n_states(); ++z) CHECK(tpl::is_psd(tpl::carre_finite(c, f, z)));
    }
  }
}

TEST_CASE("constant fields have no energy") {
  const FiniteChain c = tpl::complete_graph_chain(4);
  const FiniteField f(std::vector<SymMatrix>(4, SymMatrix::identity(2) * 3.0));
  CHECK(tpl::dirichlet_form(c, f).matrix().norm() == 0.0);
  CHECK(tpl::matrix_variance(c, f).matrix().norm() == 0.0);
  CHECK(tpl::variance_proxy(c, f).value == 0.0);
  CHECK(tpl::centered(c, f)[2].matrix().norm() == 0.0);
}

TEST_CASE("product formula agrees with the product of complete-refresh chains") {
  std::mt19937_64 rng(2);
  const std::vector<double> mu{0.3, 0.7};
  const FiniteChain prod = tpl::product_chain(tpl::complete_refresh_chain(mu), 3);
  const FiniteField f = testing::random_finite_field(rng, prod.n_states(), 2);
  for (int z = 0; z < prod.n_states(); ++z) {
    const SymMatrix a = tpl::carre_finite(prod, f, z);
    const SymMatrix b = tpl::carre_product_formula(mu, 3, f, static_cast<std::size_t>(z));
    CHECK(tpl::max_abs_diff(a, b) < 1e-12);
  }
  CHECK_THROWS_AS(tpl::carre_product_formula(mu, 2, f, 0), tpl::DimensionError);
}

TEST_CASE("product formula on two uniform bits with f = z1 + z2") {
  // Each coordinate contributes 1/2 * E[(z_i - Z)^2] = 1/2 * 1/2 at every state.
  const std::vector<double> mu{0.5, 0.5};
  const FiniteField f = FiniteField::scalar(std::vector<double>{0.0, 1.0, 1.0, 2.0});
  for (std::size_t z = 0; z < 4; ++z) CHECK(tpl::carre_product_formula(mu, 2, f, z)(0, 0) == doctest::Approx(0.5));
}

TEST_CASE("Gaussian series energies are exact") {
  const SymMatrix z((Eigen::MatrixXd(2, 2) << 1, 0, 0, -1).finished());
  const SymMatrix x((Eigen::MatrixXd(2, 2) << 0, 1, 1, 0).finished());
  const tpl::GaussianSeries s({z, x});
  CHECK(tpl::max_abs_diff(tpl::dirichlet_form(s), SymMatrix::identity(2) * 2.0) < 1e-15);
  CHECK(tpl::variance_proxy(s).value == doctest::Approx(2.0));
  // Monte Carlo of the same quantity through the generic smooth path.
  const auto mcd = tpl::dirichlet_form(tpl::series_as_field(s), tpl::mc::SampleSpec{200, 1, 1, false});
  CHECK(tpl::max_abs_diff(mcd, SymMatrix::identity(2) * 2.0) < 1e-12);
}

TEST_CASE("scalar chaos: E Gamma = 4 sum a_ij^2 and Var = 2 sum a_ij^2") {
  Eigen::MatrixXd a(2, 2);
  a << 1.0, 0.5, 0.5, 2.0;
  const auto chaos = tpl::GaussianChaos::scalar(a);
  const double frob2 = a.squaredNorm();
  const auto r = tpl::energy_report(tpl::chaos_as_field(chaos), tpl::mc::SampleSpec{100'000, 8, 4, false});
  REQUIRE(r.sample_meta);
  CHECK(r.mode == tpl::Mode::Estimated);
  CHECK(std::abs(r.dirichlet(0, 0) - 4 * frob2) <= r.sample_meta->dirichlet_trace_half_width);
  CHECK(std::abs(r.variance(0, 0) - 2 * frob2) <= 1.5 * r.sample_meta->variance_trace_half_width);
  CHECK(r.gamma.size() <= 64u);
  CHECK(tpl::variance_proxy(tpl::chaos_as_field(chaos), tpl::mc::SampleSpec{1000, 8, 1, false}).mode ==
        tpl::Mode::Estimated);
}

TEST_CASE("finite differences match analytic partials") {
  std::mt19937_64 rng(4);
  std::vector<SymMatrix> coeffs;
  for (int k = 0; k < 9; ++k) coeffs.push_back(testing::random_sym(rng, 2));
  std::vector<SymMatrix> sym(9);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) sym[static_cast<std::size_t>(i * 3 + j)] = coeffs[static_cast<std::size_t>(std::min(i, j) * 3 + std::max(i, j))];
  }
  const auto field = tpl::chaos_as_field(tpl::GaussianChaos(3, sym));
  tpl::SmoothField no_partials = field;
  no_partials.partials = nullptr;
  const std::vector<double> x{0.4, -1.1, 0.7};
  const SymMatrix a = tpl::carre_smooth(field, x);
  const SymMatrix b = tpl::carre_smooth(no_partials, x);
  CHECK(tpl::max_abs_diff(a, b) < 1e-7 * (1.0 + tpl::op_norm(a)));
}

TEST_CASE("bivariate carre du champ agrees with the squared product chain") {
  std::mt19937_64 rng(6);
  const FiniteChain base = tpl::complete_graph_chain(3);
  const FiniteChain sq = tpl::product_chain(base, 2);
  const FiniteField flat = testing::random_finite_field(rng, 9, 2);
  const tpl::BivariateField g(3, flat.values);
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      const SymMatrix lhs = tpl::bivariate_carre(base, g, a, b);
      CHECK(tpl::max_abs_diff(lhs, tpl::carre_finite(sq, flat, a * 3 + b)) < 1e-12);
    }
  }
  CHECK(tpl::max_abs_diff(tpl::bivariate_dirichlet(base, g), tpl::dirichlet_form(sq, flat)) < 1e-12);
  CHECK(tpl::max_abs_diff(tpl::bivariate_variance(base, g), tpl::matrix_variance(sq, flat)) < 1e-12);
  CHECK(tpl::bivariate_variance_proxy(base, g) == doctest::Approx(tpl::variance_proxy(sq, flat).value));
}

TEST_CASE("conditional variances") {
  const FiniteChain base = tpl::two_state_chain(1.0);
  // g(z, z') = z: the second conditional variance vanishes.
  const tpl::BivariateField g(2, {SymMatrix::scalar(0), SymMatrix::scalar(0), SymMatrix::scalar(1), SymMatrix::scalar(1)});
  const auto v1 = tpl::conditional_variance(base, g, 1);
  const auto v2 = tpl::conditional_variance(base, g, 2);
  CHECK(v1[0](0, 0) == doctest::Approx(0.25));
  CHECK(v1[1](0, 0) == doctest::Approx(0.25));
  CHECK(v2[0](0, 0) == 0.0);
  CHECK(v2[1](0, 0) == 0.0);
  CHECK_THROWS_AS(tpl::conditional_variance(base, g, 3), tpl::DomainError);
}

TEST_CASE("symmetrized field energies") {
  std::mt19937_64 rng(8);
  for (const FiniteChain& c : {tpl::two_state_chain(1.0), tpl::complete_graph_chain(4), tpl::cycle_chain(5)}) {
    const FiniteField f = testing::random_finite_field(rng, c.n_states(), 2);
    const auto sym = tpl::bivariate_symmetrized(c, f);
    const auto gamma = tpl::carre_all(c, f);
    const int n = c.n_states();
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        const SymMatrix expect = gamma[static_cast<std::size_t>(a)] + gamma[static_cast<std::size_t>(b)];
        CHECK(tpl::max_abs_diff(sym.gamma[static_cast<std::size_t>(a * n + b)], expect) < 1e-12);
      }
    }
    CHECK(tpl::max_abs_diff(sym.dirichlet, tpl::dirichlet_form(c, f) * 2.0) < 1e-12);
    CHECK(sym.v_g <= 2.0 * tpl::variance_proxy(c, f).value * (1.0 + 1e-12));
  }
}

TEST_CASE("spectral maps of bivariate fields") {
  const tpl::BivariateField g(1, {SymMatrix::scalar(0.5)});
  CHECK(tpl::apply_spectral_fn(g, tpl::ScalarFn::sinh()).at(0, 0)(0, 0) == doctest::Approx(std::sinh(0.5)));
  CHECK_THROWS_AS(tpl::BivariateField(2, {SymMatrix::scalar(0)}), tpl::DimensionError);
}
