// Acceptance suite: one PASS/FAIL line per criterion, with its runtime limit.

#include "helpers.hpp"

#include "tpl/bounds.hpp"
#include "tpl/runner.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;
using tpl::FiniteChain;
using tpl::FiniteField;
using tpl::ScalarFn;
using tpl::SymMatrix;

namespace {

struct Tally {
  long checks = 0;
  long failures = 0;
  std::string first_failure;

  void expect(bool ok, const std::string& what) {
    ++checks;
    if (!ok) {
      ++failures;
      if (first_failure.empty()) first_failure = what;
    }
  }
};

int run_criterion(int id, const std::string& title, double limit_seconds, const std::function<void(Tally&)>& body) {
  Tally t;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(t);
  } catch (const std::exception& e) {
    t.expect(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_time = secs < limit_seconds;
  const bool ok = t.failures == 0 && in_time;
  std::printf("%s criterion %2d: %s  [%ld checks, %ld failures, %.2fs / limit %.0fs]%s%s\n", ok ? "PASS" : "FAIL", id,
              title.c_str(), t.checks, t.failures, secs, limit_seconds, t.first_failure.empty() ? "" : "  first failure: ",
              t.first_failure.c_str());
  if (!in_time) std::printf("     criterion %d exceeded its runtime limit\n", id);
  std::fflush(stdout);
  return ok ? 0 : 1;
}

FiniteField scalar_field(std::vector<double> v) { return FiniteField::scalar(v); }

std::vector<FiniteChain> finite_fixtures() {
  return {tpl::two_state_chain(1.0), tpl::complete_graph_chain(4), tpl::cycle_chain(4),
          tpl::product_chain(tpl::complete_refresh_chain({0.5, 0.5}), 2)};
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(TPL_CLI_PATH) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

int main() {
  int failed = 0;

  failed += run_criterion(1, "two-state oracle values and scalar Poincare equality", 1.0, [](Tally& t) {
    const FiniteChain c = tpl::two_state_chain(1.0);
    const FiniteField f = scalar_field({0.0, 1.0});
    const auto r = tpl::energy_report(c, f);
    const auto cert = tpl::poincare_constant(c);
    t.expect(std::abs(r.variance(0, 0) - 0.25) <= 1e-12, "Var = 1/4");
    t.expect(std::abs(r.dirichlet(0, 0) - 0.5) <= 1e-12, "E = 1/2");
    t.expect(std::abs(cert.alpha - 0.5) <= 1e-12, "alpha = 1/2");
    t.expect(std::abs(r.v_f - 0.5) <= 1e-12, "v_f = 1/2");
    const double v[] = {0.0, 1.0};
    const auto p = tpl::check_scalar_poincare(c, v, cert);
    t.expect(p.pass && std::abs(p.margin) <= 1e-12, "scalar Poincare equality");
  });

  failed += run_criterion(2, "spectral gaps: K_n alpha = (n-1)/n, complete refresh alpha = 1", 1.0, [](Tally& t) {
    for (int n : {3, 4, 5, 8}) {
      const FiniteChain k = tpl::complete_graph_chain(n);
      // Oracle: second-largest adjacency eigenvalue lambda_2, gap = 1 - lambda_2 / (n - 1).
      const Eigen::MatrixXd adj = Eigen::MatrixXd::Ones(n, n) - Eigen::MatrixXd::Identity(n, n);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(adj);
      const double lambda2 = es.eigenvalues()(n - 2);
      const double oracle = 1.0 / (1.0 - lambda2 / (n - 1));
      const double alpha = tpl::poincare_constant(k).alpha;
      t.expect(std::abs(alpha - oracle) <= 1e-10, "K_" + std::to_string(n) + " vs adjacency oracle");
      t.expect(std::abs(alpha - (n - 1.0) / n) <= 1e-10, "K_" + std::to_string(n) + " closed form");
    }
    for (const auto& mu : {std::vector<double>{0.5, 0.5}, std::vector<double>{0.1, 0.2, 0.3, 0.4}}) {
      t.expect(std::abs(tpl::poincare_constant(tpl::complete_refresh_chain(mu)).alpha - 1.0) <= 1e-10, "refresh");
    }
  });

  failed += run_criterion(3, "trace Poincare on 1000 random fields per chain; probe sup <= alpha(1 + 1e-9)", 30.0,
                          [](Tally& t) {
                            std::mt19937_64 rng(301);
                            const tpl::Slack slack{1e-9};
                            for (const FiniteChain& c :
                                 {tpl::two_state_chain(1.0), tpl::complete_graph_chain(4), tpl::cycle_chain(4)}) {
                              const auto cert = tpl::poincare_constant(c);
                              for (int i = 0; i < 1000; ++i) {
                                const FiniteField f = testing::random_finite_field(rng, c.n_states(), 1 + i % 4);
                                t.expect(tpl::check_trace_poincare(c, f, cert, slack).pass, "trace Poincare");
                              }
                              const auto probe = tpl::equivalence_probe(c, cert, 1000, {1, 2, 3, 4}, 302);
                              t.expect(probe.pass && probe.sup_ratio <= cert.alpha * (1 + 1e-9), "probe");
                            }
                          });

  failed += run_criterion(4, "mean-value trace inequality, 2000 random instances, d <= 6", 30.0, [](Tally& t) {
    std::mt19937_64 rng(401);
    std::uniform_real_distribution<double> theta(0.05, 2.0);
    const tpl::Slack slack{1e-9};
    for (int i = 0; i < 1000; ++i) {
      const int d = 1 + i % 6;
      t.expect(tpl::check_mean_value_trace(testing::random_sym(rng, d), testing::random_sym(rng, d),
                                           ScalarFn::sinh(theta(rng)), slack)
                   .pass,
               "sinh");
    }
    const double qs[] = {1.5, 2.0, 3.0};
    for (int i = 0; i < 1000; ++i) {
      const int d = 1 + i % 6;
      t.expect(tpl::check_mean_value_trace(testing::random_sym(rng, d), testing::random_sym(rng, d),
                                           ScalarFn::signed_pow(qs[i % 3]), slack)
                   .pass,
               "signed_pow");
    }
  });

  failed += run_criterion(5, "chain rule on two-state, K_4, (two-state)^2; affine exact", 60.0, [](Tally& t) {
    std::mt19937_64 rng(501);
    const FiniteChain two = tpl::two_state_chain(1.0);
    for (const FiniteChain& c : {two, tpl::complete_graph_chain(4), tpl::product_chain(two, 2)}) {
      for (int i = 0; i < 500; ++i) {
        const FiniteField f = testing::random_finite_field(rng, c.n_states(), 1 + i % 3);
        t.expect(tpl::check_chain_rule(c, f, ScalarFn::sinh(1.0)).pass, "sinh");
        t.expect(tpl::check_chain_rule(c, f, ScalarFn::signed_pow(2.0)).pass, "signed_pow(2)");
        const auto a = tpl::check_chain_rule(c, f, ScalarFn::affine(0.7, 1.3));
        t.expect(std::abs(a.margin) <= 1e-10 * (1.0 + a.rhs), "affine exact");
      }
    }
  });

  failed += run_criterion(6, "exponential moments on a 20-point theta grid; hand value 9/7", 60.0, [](Tally& t) {
    const FiniteChain two = tpl::two_state_chain(1.0);
    const auto hand = tpl::check_exp_moment(two, scalar_field({-0.5, 0.5}), tpl::poincare_constant(two), {1.0});
    t.expect(std::abs(hand[0].rhs - 9.0 / 7.0) <= 1e-12, "9/7");
    t.expect(hand[0].pass, "hand instance passes");
    std::mt19937_64 rng(601);
    for (const FiniteChain& c : finite_fixtures()) {
      const auto cert = tpl::poincare_constant(c);
      for (int i = 0; i < 200; ++i) {
        const FiniteField f = tpl::centered(c, testing::random_finite_field(rng, c.n_states(), 1 + i % 3));
        const double v_f = tpl::variance_proxy(c, f).value;
        for (const auto& r : tpl::check_exp_moment(c, f, cert, tpl::default_theta_grid(cert.alpha, v_f, 20))) {
          t.expect(r.verdict == tpl::Verdict::Pass, "exp moment");
        }
      }
    }
  });

  failed += run_criterion(7, "tails: exact enumeration and Pauli series Monte Carlo (N = 1e5)", 120.0, [](Tally& t) {
    std::vector<double> lambdas;
    for (int k = 1; k <= 16; ++k) lambdas.push_back(0.5 * k);
    std::mt19937_64 rng(701);
    for (const FiniteChain& c : finite_fixtures()) {
      const auto cert = tpl::poincare_constant(c);
      for (int i = 0; i < 100; ++i) {
        const FiniteField f = testing::random_finite_field(rng, c.n_states(), 1 + i % 3);
        for (const auto& r : tpl::check_tail_empirical(c, f, cert, lambdas)) t.expect(r.pass, "exact tail");
      }
    }
    const SymMatrix z((Eigen::MatrixXd(2, 2) << 1, 0, 0, -1).finished());
    const SymMatrix x((Eigen::MatrixXd(2, 2) << 0, 1, 1, 0).finished());
    const tpl::GaussianModel pauli = tpl::GaussianSeries({z, x});
    const auto rows = tpl::check_tail_empirical(pauli, tpl::ou_certificate(), lambdas, {100'000, 7001, 4, false});
    for (const auto& r : rows) {
      t.expect(r.verdict == tpl::Verdict::Pass, "Monte Carlo tail");
      t.expect(r.context["v_f"] == 2.0 && r.context["alpha"] == 1.0, "alpha = 1, v_f = 2");
    }
  });

  failed += run_criterion(8, "polynomial moments on finite fixtures; Gaussian moment oracle (N = 1e5)", 120.0,
                          [](Tally& t) {
                            std::mt19937_64 rng(801);
                            const std::vector<double> qs{1.0, 1.5, 2.0, 3.0};
                            for (const FiniteChain& c : finite_fixtures()) {
                              const auto cert = tpl::poincare_constant(c);
                              for (int i = 0; i < 200; ++i) {
                                const FiniteField f =
                                    tpl::centered(c, testing::random_finite_field(rng, c.n_states(), 1 + i % 3));
                                for (const auto& r : tpl::check_poly_moment(c, f, cert, qs)) t.expect(r.pass, "poly");
                              }
                            }
                            const double a = 0.8;
                            const auto field = tpl::series_as_field(tpl::GaussianSeries({SymMatrix::scalar(a)}));
                            const tpl::mc::SampleSpec spec{100'000, 8001, 4, false};
                            const auto m2 = tpl::mc::estimate_trace_moment(field, 1.0, spec);
                            const auto m4 = tpl::mc::estimate_trace_moment(field, 2.0, spec);
                            t.expect(m2.ci_low <= a * a && a * a <= m2.ci_high, "E f^2 = a^2");
                            const double a4 = 3 * std::pow(a, 4);
                            t.expect(m4.ci_low <= a4 && a4 <= m4.ci_high, "E f^4 = 3 a^4");
                          });

  failed += run_criterion(9, "intdim variant q in {1,2,3} on two-state and K_4; 1 <= intdim <= rank", 30.0,
                          [](Tally& t) {
                            std::mt19937_64 rng(901);
                            for (const FiniteChain& c : {tpl::two_state_chain(1.0), tpl::complete_graph_chain(4)}) {
                              const auto cert = tpl::poincare_constant(c);
                              for (int i = 0; i < 200; ++i) {
                                const FiniteField f = testing::random_finite_field(rng, c.n_states(), 1 + i % 3);
                                for (int q : {1, 2, 3}) t.expect(tpl::check_intdim_variant(c, f, cert, q).pass, "intdim");
                              }
                            }
                            for (int i = 0; i < 1000; ++i) {
                              const int d = 1 + i % 6;
                              const int r = 1 + (i / 6) % d;
                              const Eigen::MatrixXd g = testing::gaussian_matrix(rng, d, r);
                              const SymMatrix a(g * g.transpose());
                              const double id = tpl::intdim(a);
                              t.expect(id >= 1.0 - 1e-12 && id <= tpl::numerical_rank(a) + 1e-12, "1 <= intdim <= rank");
                            }
                          });

  failed += run_criterion(10, "scalar Gaussian chaos A = diag(1, 1): moments below 8 q^2 ||A|| (N = 1e5)", 60.0,
                          [](Tally& t) {
                            const auto chaos = tpl::GaussianChaos::scalar(Eigen::MatrixXd::Identity(2, 2));
                            const auto rows = tpl::check_chaos_scalar(chaos, {1.0, 2.0, 3.0}, {100'000, 10001, 4, false});
                            for (const auto& r : rows) t.expect(r.verdict == tpl::Verdict::Pass, "chaos");
                          });

  failed += run_criterion(11, "default config twice gives byte-identical CSV", 120.0, [](Tally& t) {
    const fs::path dir = fs::temp_directory_path() / ("tpl_acceptance_" + std::to_string(::getpid()));
    const std::string cfg = std::string(TPL_SOURCE_DIR) + "/configs/default.json";
    const int a = run_cli("run --config " + cfg + " --out " + (dir / "a").string() + " --format csv");
    const int b = run_cli("run --config " + cfg + " --out " + (dir / "b").string() + " --format csv");
    t.expect(a == 0 && b == 0, "default config exits 0");
    const std::string ca = read_file(dir / "a" / "default.csv");
    const std::string cb = read_file(dir / "b" / "default.csv");
    t.expect(!ca.empty() && ca == cb, "identical CSV");
    fs::remove_all(dir);
  });

  std::printf("%s: %d of 11 criteria failed\n", failed == 0 ? "ALL PASS" : "FAILURES", failed);
  return failed == 0 ? 0 : 1;
}
