#include "doctest.h"
#include "helpers.hpp"

#include "tpl/errors.hpp"
#include "tpl/montecarlo.hpp"

#include <cmath>
#include <cstdlib>

using namespace tpl::mc;

namespace {

// Published known-answer vectors for Philox4x32-10.
void check_kat(Philox4x32::Counter ctr, Philox4x32::Key key, Philox4x32::Counter expected) {
  CHECK(Philox4x32::generate(ctr, key) == expected);
}

tpl::SmoothField scalar_series(double a) {
  return tpl::series_as_field(tpl::GaussianSeries({tpl::SymMatrix::scalar(a)}));
}

}  // namespace

TEST_CASE("Philox4x32-10 known answers") {
  check_kat({0, 0, 0, 0}, {0, 0}, {0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  check_kat({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff},
            {0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  check_kat({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0},
            {0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams replay and differ by id") {
  const Stream a(42, 7);
  CHECK(sample_standard_normal(9, a) == sample_standard_normal(9, Stream(42, 7)));
  CHECK(sample_standard_normal(9, a) != sample_standard_normal(9, Stream(42, 8)));
  const auto x = sample_standard_normal(5, a);
  for (int k = 0; k < 5; ++k) CHECK(x[static_cast<std::size_t>(k)] == a.normal(static_cast<std::uint64_t>(k)));
  for (int k = 0; k < 100; ++k) {
    const double u = a.uniform(static_cast<std::uint64_t>(k));
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("normal draws have zero mean and identity covariance") {
  const int n = 4;
  const int samples = 1'000'000;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < samples; ++i) {
    const auto x = sample_standard_normal(n, Stream(123, static_cast<std::uint64_t>(i)));
    const Eigen::Map<const Eigen::VectorXd> v(x.data(), n);
    mean += v;
    second += v * v.transpose();
  }
  mean /= samples;
  second /= samples;
  for (int j = 0; j < n; ++j) CHECK(std::abs(mean(j)) < 4.0 / std::sqrt(static_cast<double>(samples)));
  const Eigen::MatrixXd cov = second - mean * mean.transpose();
  CHECK((cov - Eigen::MatrixXd::Identity(n, n)).norm() < 0.01 * std::sqrt(static_cast<double>(n)));
}

TEST_CASE("sample spec validation") {
  SampleSpec s;
  s.n_samples = 0;
  CHECK_THROWS_AS(s.validate(), tpl::DomainError);
  s.n_samples = 1;
  s.workers = 0;
  CHECK_THROWS_AS(s.validate(), tpl::DomainError);
}

TEST_CASE("estimates are identical for any worker count") {
  const auto field = scalar_series(1.5);
  SampleSpec one{20'000, 77, 1, false};
  SampleSpec many{20'000, 77, 7, false};
  const Estimate a = estimate_trace_moment(field, 2.0, one);
  const Estimate b = estimate_trace_moment(field, 2.0, many);
  CHECK(a.value == b.value);
  CHECK(a.ci_low == b.ci_low);
  CHECK(a.ci_high == b.ci_high);
  const auto ca = estimate_cosh_trace(field, tpl::SymMatrix::scalar(0.0), 0.5, one);
  const auto cb = estimate_cosh_trace(field, tpl::SymMatrix::scalar(0.0), 0.5, many);
  CHECK(ca.value == cb.value);
}

TEST_CASE("TPL_THREADS caps the worker count") {
  SampleSpec s{10, 0, 8, false};
  setenv("TPL_THREADS", "3", 1);
  CHECK(effective_workers(s) == 3);
  unsetenv("TPL_THREADS");
  CHECK(effective_workers(s) == 8);
}

TEST_CASE("Gaussian moments of a scalar series") {
  const double a = 1.7;
  const auto field = scalar_series(a);
  const SampleSpec spec{100'000, 2024, 4, false};
  const Estimate m2 = estimate_trace_moment(field, 1.0, spec);
  CHECK(m2.ci_low <= a * a);
  CHECK(a * a <= m2.ci_high);
  const Estimate m4 = estimate_trace_moment(field, 2.0, spec);
  CHECK(m4.ci_low <= 3 * std::pow(a, 4));
  CHECK(3 * std::pow(a, 4) <= m4.ci_high);
  CHECK_THROWS_AS(estimate_trace_moment(field, 0.5, spec), tpl::DomainError);
}

TEST_CASE("zero field has zero moments with zero-width intervals") {
  const auto field = scalar_series(0.0);
  const Estimate m = estimate_trace_moment(field, 2.0, SampleSpec{1000, 1, 1, false});
  CHECK(m.value == 0.0);
  CHECK(m.ci_low == 0.0);
  CHECK(m.ci_high == 0.0);
}

TEST_CASE("cosh trace estimates") {
  const auto field = scalar_series(1.0);
  const SampleSpec spec{100'000, 5, 4, false};
  const Estimate e = estimate_cosh_trace(field, tpl::SymMatrix::scalar(0.0), 0.5, spec);
  const double truth = std::exp(1.0 / 8.0);
  CHECK(e.ci_low <= truth);
  CHECK(truth <= e.ci_high);
  const Estimate zero = estimate_cosh_trace(field, tpl::SymMatrix::scalar(0.0), 0.0, spec);
  CHECK(zero.value == 1.0);
  CHECK(zero.ci_low == zero.ci_high);

  // Field identically equal to its center: exactly d.
  const auto flat = tpl::series_as_field(tpl::GaussianSeries({tpl::SymMatrix::zero(3)}));
  const Estimate d = estimate_cosh_trace(flat, tpl::SymMatrix::zero(3), 2.0, spec);
  CHECK(d.value == 3.0);

  // Huge theta stays finite on the log scale.
  const Estimate big = estimate_cosh_trace(field, tpl::SymMatrix::scalar(0.0), 400.0, SampleSpec{1000, 5, 1, false});
  REQUIRE(big.log_value);
  CHECK(std::isfinite(*big.log_value));
}

TEST_CASE("tail estimates") {
  const auto field = scalar_series(1.0);
  const SampleSpec spec{100'000, 9, 4, false};
  const std::vector<double> thresholds{0.0, 1.0, 1.959963984540054, 3.0};
  const auto tails = estimate_tail(field, tpl::SymMatrix::scalar(0.0), thresholds, spec);
  CHECK(tails[0].value == 1.0);
  for (std::size_t i = 1; i < tails.size(); ++i) CHECK(tails[i].value <= tails[i - 1].value);
  CHECK(tails[2].ci_low <= 0.05);
  CHECK(0.05 <= tails[2].ci_high);
  const std::vector<double> unsorted{1.0, 0.5};
  CHECK_THROWS_AS(estimate_tail(field, tpl::SymMatrix::scalar(0.0), unsorted, spec), tpl::DomainError);
}

TEST_CASE("Wilson intervals reach nominal coverage") {
  for (double p : {0.5, 0.1, 0.01}) {
    int covered = 0;
    const int reps = 500;
    const std::uint64_t n = 10'000;
    for (int r = 0; r < reps; ++r) {
      const Stream s(1000 + static_cast<std::uint64_t>(p * 1000), static_cast<std::uint64_t>(r));
      std::uint64_t hits = 0;
      for (std::uint64_t k = 0; k < n; ++k) hits += s.uniform(k) < p ? 1 : 0;
      const Estimate e = wilson_estimate(hits, n);
      CHECK(e.ci_low <= e.value);
      CHECK(e.value <= e.ci_high);
      covered += (e.ci_low <= p && p <= e.ci_high) ? 1 : 0;
    }
    CHECK(covered / static_cast<double>(reps) >= 0.97);
  }
}

TEST_CASE("trace moments are invariant under orthogonal conjugation") {
  std::mt19937_64 rng(17);
  const int d = 3;
  std::vector<tpl::SymMatrix> coeffs{testing::random_sym(rng, d), testing::random_sym(rng, d)};
  const Eigen::MatrixXd q = testing::gaussian_matrix(rng, d, d).householderQr().householderQ();
  std::vector<tpl::SymMatrix> rotated;
  for (const auto& c : coeffs) rotated.emplace_back(q * c.matrix() * q.transpose());
  const SampleSpec spec{5000, 3, 2, false};
  const Estimate a = estimate_trace_moment(tpl::series_as_field(tpl::GaussianSeries(coeffs)), 2.0, spec);
  const Estimate b = estimate_trace_moment(tpl::series_as_field(tpl::GaussianSeries(rotated)), 2.0, spec);
  CHECK(std::abs(a.value - b.value) <= 1e-12 * (1.0 + std::abs(a.value)));
}

TEST_CASE("antithetic pairing averages mirrored draws") {
  const auto field = scalar_series(1.0);
  SampleSpec spec{1001, 4, 1, true};
  const auto v = sample_values(field, spec, [](const tpl::SymMatrix& m) { return m(0, 0); });
  CHECK(v.size() == 501u);
  for (double x : v) CHECK(std::abs(x) < 1e-15);
}
