#pragma once

// Check reports shared by every inequality checker, plus their CSV / JSON forms.

#include "tpl/montecarlo.hpp"

#include "json.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace tpl {

enum class Verdict { Pass, Fail, Inconclusive, Skipped };

std::string to_string(Verdict v);

/// Tolerance knob shared by all checkers: tolerance = rel * (1 + |rhs|).
struct Slack {
  double rel = 1e-9;
  [[nodiscard]] double tolerance_for(double rhs) const;
};

namespace citation {
inline constexpr const char* kScalarPoincare = "Scalar Poincare";
inline constexpr const char* kTracePoincare = "Trace Poincare";
inline constexpr const char* kEquivalence = "Equivalence of Poincare inequalities";
inline constexpr const char* kVarianceSubadditivity = "Trace variance: Subadditivity";
inline constexpr const char* kPoincareSubadditivity = "Trace Poincare: Subadditivity";
inline constexpr const char* kMeanValueTrace = "Mean-value trace inequality";
inline constexpr const char* kChainRule = "Chain rule inequality";
inline constexpr const char* kExponentialMoments = "Exponential moments";
inline constexpr const char* kSubexponential = "Subexponential Concentration";
inline constexpr const char* kPolynomialMoments = "Polynomial moments";
inline constexpr const char* kIntdimVariant = "A variant of the argument";
inline constexpr const char* kGaussianChaos = "Gaussian Chaos";
}  // namespace citation

/// One inequality instance lhs <= rhs. Invariant: pass == (margin >= -tolerance).
///
/// Exact checks carry the computed sides directly. Monte Carlo checks carry the
/// conservative ends of the 99% intervals (upper end of the LHS, lower end of
/// the RHS) with zero tolerance; the point estimates go to the context.
struct CheckReport {
  std::string citation;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  double tolerance = 0.0;
  bool pass = true;
  Verdict verdict = Verdict::Pass;
  nlohmann::json context = nlohmann::json::object();

  static CheckReport exact(std::string citation, double lhs, double rhs, const Slack& slack,
                           nlohmann::json context = nlohmann::json::object());

  /// RHS is +infinity (a vanished positive part): recorded, never failed.
  static CheckReport unbounded(std::string citation, double lhs, nlohmann::json context = nlohmann::json::object());

  /// Compares interval estimates. PASS when lhs_high <= rhs_low, FAIL when
  /// lhs_low > rhs_high, INCONCLUSIVE otherwise.
  static CheckReport estimated(std::string citation, const mc::Estimate& lhs, const mc::Estimate& rhs,
                               nlohmann::json context = nlohmann::json::object());
};

/// Exact value wrapped as a zero-width estimate.
mc::Estimate exact_estimate(double value);

nlohmann::json to_json(const mc::Estimate& e);
nlohmann::json to_json(const CheckReport& r);

/// A report placed in a run: which suite produced it and on which fixture/field.
struct ReportRow {
  std::string suite;
  std::string fixture;
  CheckReport report;
};

/// CSV header: citation,suite,fixture,lhs,rhs,margin,verdict,tolerance,context
void write_csv(std::ostream& os, const std::vector<ReportRow>& rows);
nlohmann::json rows_to_json(const std::vector<ReportRow>& rows);

/// Shortest round-trip decimal form; "inf", "-inf", "nan" for non-finite.
std::string format_double(double x);

}  // namespace tpl
