#pragma once

// Experiment configuration: JSON documents describing a model, the fields to
// test on it, the suites to run, and their parameters.
//
// A document is either one experiment object or {"experiments": [...],
// "output": {...}}. Experiment keys:
//   name      string (defaults to the fixture name or "experiment<i>")
//   model     {"fixture": name} | {"chain": {...}} | {"graph": {...}}
//             | {"product": {"base": <finite model>, "n": int}}
//             | {"gaussian_series": {"coefficients": [matrix, ...]}}
//             | {"gaussian_chaos": {"n": int, "coefficients": [matrix, ...]}}
//             | {"gaussian_chaos": {"matrix": [[...], ...]}}   (scalar chaos)
//   alpha     optional user-supplied Poincare constant
//   fields    [{"fixture": name} | {"table": [matrix or number per state]}
//              | {"random": {"count": int, "dim": int, "seed": int}}]
//   suites    subset of known_suites(), run in the listed order
//   params    theta_grid ("auto" | [..]), theta_points, lambda_grid, q_list,
//             intdim_q, phi [{"kind": "sinh", "theta": t} | {"kind":
//             "signed_pow", "q": q} | {"kind": "affine", "a": a, "b": b}],
//             probe {"trials", "dims", "seed"}, samples {"n", "seed",
//             "workers", "antithetic"}, certified_v_f
//   output    {"dir", "format": "csv" | "json" | "both", "basename"}

#include "tpl/fixtures.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tpl {

/// Invalid configuration, anchored to a line of the source when known.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, int line, const std::string& message);
  [[nodiscard]] int line() const { return line_; }

 private:
  int line_;
};

struct LabeledField {
  std::string label;
  FiniteField field;
};

struct SuiteParams {
  std::optional<std::vector<double>> theta_grid;  // nullopt: per-field automatic grid
  int theta_points = 20;
  std::vector<double> lambda_grid;
  std::vector<double> q_list{1.0, 1.5, 2.0, 3.0};
  std::vector<int> intdim_q{1, 2, 3};
  std::vector<ScalarFn> phis{ScalarFn::sinh(1.0), ScalarFn::signed_pow(2.0)};
  int probe_trials = 100;
  std::vector<int> probe_dims{1, 2, 3};
  std::uint64_t probe_seed = 0;
  mc::SampleSpec samples;
  std::optional<double> certified_v_f;
};

struct Experiment {
  std::string name;
  std::string model_kind;
  Model model;
  std::optional<double> alpha;
  std::vector<LabeledField> fields;
  std::vector<std::string> suites;
  SuiteParams params;
};

struct OutputSpec {
  std::string dir = ".";
  std::string format = "csv";
  std::string basename = "report";
};

struct ExperimentConfig {
  std::vector<Experiment> experiments;
  OutputSpec output;
};

/// poincare, subadditivity, chain-rule, exp-moment, tail, poly-moment, intdim, chaos.
const std::vector<std::string>& known_suites();

/// Default lambda grid: 0.5, 1.0, ..., 8.0.
std::vector<double> default_lambda_grid();

/// Parses and validates. Throws ConfigError; CapacityError propagates when a
/// model is too large to build.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);

}  // namespace tpl
