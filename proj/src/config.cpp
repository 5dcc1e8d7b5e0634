#include "tpl/config.hpp"

#include "tpl/errors.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace tpl {

namespace {

using nlohmann::json;
using Path = std::vector<std::string>;

const std::set<std::string> kFiniteOnly{"subadditivity", "chain-rule", "intdim"};

class Parser {
 public:
  Parser(const std::string& text, std::string source) : text_(text), source_(std::move(source)) {}

  [[noreturn]] void fail(const Path& path, const std::string& message) const {
    throw ConfigError(source_, line_of(path), describe(path) + message);
  }

  ExperimentConfig parse(const json& root) {
    if (!root.is_object()) fail({}, "top level must be an object");
    ExperimentConfig cfg;
    if (root.contains("output")) cfg.output = parse_output(root.at("output"), {"output"});
    if (root.contains("experiments")) {
      const json& list = root.at("experiments");
      if (!list.is_array() || list.empty()) fail({"experiments"}, "must be a nonempty array");
      for (std::size_t i = 0; i < list.size(); ++i) {
        cfg.experiments.push_back(parse_experiment(list[i], {"experiments", std::to_string(i)}, i));
      }
    } else {
      cfg.experiments.push_back(parse_experiment(root, {}, 0));
    }
    return cfg;
  }

 private:
  int line_of(const Path& path) const {
    std::size_t pos = 0;
    bool found_any = false;
    for (const auto& key : path) {
      if (!key.empty() && std::all_of(key.begin(), key.end(), [](char c) { return c >= '0' && c <= '9'; })) continue;
      const auto at = text_.find("\"" + key + "\"", pos);
      if (at == std::string::npos) break;
      pos = at;
      found_any = true;
    }
    if (!found_any) return 1;
    return 1 + static_cast<int>(std::count(text_.begin(), text_.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
  }

  static std::string describe(const Path& path) {
    if (path.empty()) return "";
    std::string out;
    for (const auto& p : path) out += (out.empty() ? "" : ".") + p;
    return out + ": ";
  }

  template <class T>
  T get(const json& j, const Path& path, const char* what) const {
    try {
      return j.get<T>();
    } catch (const json::exception&) {
      fail(path, std::string("expected ") + what);
    }
  }

  double positive(const json& j, const Path& path) const {
    const double v = get<double>(j, path, "a number");
    if (!(v > 0.0)) fail(path, "must be > 0");
    return v;
  }

  std::vector<double> number_list(const json& j, const Path& path) const {
    if (!j.is_array() || j.empty()) fail(path, "expected a nonempty array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get<double>(j[i], path, "a number"));
    return out;
  }

  SymMatrix matrix(const json& j, const Path& path) const {
    if (j.is_number()) return SymMatrix::scalar(j.get<double>());
    if (!j.is_array() || j.empty()) fail(path, "expected a number or a square array of numbers");
    const auto n = static_cast<int>(j.size());
    Eigen::MatrixXd m(n, n);
    for (int r = 0; r < n; ++r) {
      const json& row = j[static_cast<std::size_t>(r)];
      if (!row.is_array() || static_cast<int>(row.size()) != n) fail(path, "matrix must be square");
      for (int c = 0; c < n; ++c) m(r, c) = get<double>(row[static_cast<std::size_t>(c)], path, "a number");
    }
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > kRelTol * (1.0 + m.cwiseAbs().maxCoeff())) {
      fail(path, "matrix must be symmetric");
    }
    return SymMatrix(m);
  }

  std::vector<SymMatrix> matrix_list(const json& j, const Path& path) const {
    if (!j.is_array() || j.empty()) fail(path, "expected a nonempty array of matrices");
    std::vector<SymMatrix> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(matrix(j[i], path));
    return out;
  }

  FiniteChain finite_model(const json& j, const Path& path, std::string& kind) const {
    Model m = model(j, path, kind);
    if (auto* chain = std::get_if<FiniteChain>(&m)) return std::move(*chain);
    fail(path, "expected a finite chain model");
  }

  Model model(const json& j, const Path& path, std::string& kind) const {
    if (!j.is_object() || j.size() != 1) fail(path, "model must be an object with exactly one key");
    const auto& [key, body] = *j.items().begin();
    const Path sub = [&] { Path p = path; p.push_back(key); return p; }();
    kind = key;
    try {
      if (key == "fixture") return load_fixture(get<std::string>(body, sub, "a fixture name"));
      if (key == "chain") return chain_from_json(body);
      if (key == "graph") return chain_from_json(json{{"graph", body}});
      if (key == "product") {
        if (!body.contains("base") || !body.contains("n")) fail(sub, "product needs \"base\" and \"n\"");
        std::string base_kind;
        const FiniteChain base = finite_model(body.at("base"), sub, base_kind);
        const int n = get<int>(body.at("n"), sub, "an integer");
        if (n < 1) fail(sub, "n must be >= 1");
        return product_chain(base, n);
      }
      if (key == "gaussian_series") {
        if (!body.contains("coefficients")) fail(sub, "missing \"coefficients\"");
        return GaussianModel(GaussianSeries(matrix_list(body.at("coefficients"), sub)));
      }
      if (key == "gaussian_chaos") {
        if (body.contains("matrix")) {
          const SymMatrix a = matrix(body.at("matrix"), sub);
          return GaussianModel(GaussianChaos::scalar(a.matrix()));
        }
        if (!body.contains("n") || !body.contains("coefficients")) {
          fail(sub, "needs \"matrix\" or both \"n\" and \"coefficients\"");
        }
        return GaussianModel(
            GaussianChaos(get<int>(body.at("n"), sub, "an integer"), matrix_list(body.at("coefficients"), sub)));
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const CapacityError&) {
      throw;
    } catch (const std::exception& e) {
      fail(sub, e.what());
    }
    fail(path, "unknown model kind \"" + key + "\"");
  }

  std::vector<LabeledField> fields(const json& j, const Path& path, const FiniteChain& chain) const {
    if (!j.is_array()) fail(path, "expected an array of field descriptors");
    std::vector<LabeledField> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
      const json& d = j[i];
      const Path sub = [&] { Path p = path; p.push_back(std::to_string(i)); return p; }();
      if (!d.is_object() || d.size() != 1) fail(sub, "field descriptor must have exactly one key");
      try {
        if (d.contains("fixture")) {
          const auto name = get<std::string>(d.at("fixture"), sub, "a field fixture name");
          out.push_back({name, named_field(chain, name)});
        } else if (d.contains("table")) {
          auto values = matrix_list(d.at("table"), {path.empty() ? "" : path.back(), "table"});
          if (static_cast<int>(values.size()) != chain.n_states()) {
            fail(sub, "table has " + std::to_string(values.size()) + " entries for " +
                          std::to_string(chain.n_states()) + " states");
          }
          out.push_back({"table" + std::to_string(i), FiniteField(std::move(values))});
        } else if (d.contains("random")) {
          const json& r = d.at("random");
          const int count = get<int>(r.value("count", json(1)), sub, "an integer count");
          const int dim = get<int>(r.value("dim", json(1)), sub, "an integer dim");
          const auto seed = get<std::uint64_t>(r.value("seed", json(0)), sub, "an unsigned seed");
          if (count < 1 || dim < 1) fail(sub, "random fields need count >= 1 and dim >= 1");
          for (int k = 0; k < count; ++k) {
            out.push_back({"random" + std::to_string(seed) + "-d" + std::to_string(dim) + "-" + std::to_string(k),
                           random_field(chain.n_states(), dim, mc::Stream(seed, static_cast<std::uint64_t>(k)))});
          }
        } else {
          fail(sub, "unknown field descriptor");
        }
      } catch (const ConfigError&) {
        throw;
      } catch (const std::exception& e) {
        fail(sub, e.what());
      }
    }
    return out;
  }

  ScalarFn phi(const json& j, const Path& path) const {
    if (!j.is_object() || !j.contains("kind")) fail(path, "phi needs a \"kind\"");
    const auto kind = get<std::string>(j.at("kind"), path, "a string");
    ScalarFn fn = ScalarFn::affine(1.0, 0.0);
    if (kind == "sinh") {
      fn = ScalarFn::sinh(positive(j.value("theta", json(1.0)), path));
    } else if (kind == "signed_pow") {
      fn = ScalarFn::signed_pow(positive(j.value("q", json(2.0)), path));
    } else if (kind == "affine") {
      fn = ScalarFn::affine(get<double>(j.value("a", json(1.0)), path, "a number"),
                            get<double>(j.value("b", json(0.0)), path, "a number"));
    } else {
      fail(path, "unknown phi kind \"" + kind + "\"");
    }
    if (!fn.squared_derivative()) fail(path, fn.describe() + " is outside the admissible list (sinh, signed_pow q >= 1.5, affine)");
    return fn;
  }

  SuiteParams params(const json& j, const Path& path) const {
    SuiteParams p;
    p.lambda_grid = default_lambda_grid();
    if (!j.is_object()) fail(path, "params must be an object");
    for (const auto& [key, v] : j.items()) {
      const Path sub = [&] { Path q = path; q.push_back(key); return q; }();
      if (key == "theta_grid") {
        if (v.is_string()) {
          if (v.get<std::string>() != "auto") fail(sub, "expected \"auto\" or an array");
        } else {
          auto grid = number_list(v, sub);
          for (double t : grid) {
            if (!(t > 0.0)) fail(sub, "theta values must be > 0");
          }
          p.theta_grid = std::move(grid);
        }
      } else if (key == "theta_points") {
        p.theta_points = get<int>(v, sub, "an integer");
        if (p.theta_points < 1) fail(sub, "must be >= 1");
      } else if (key == "lambda_grid") {
        p.lambda_grid = number_list(v, sub);
        for (double l : p.lambda_grid) {
          if (!(l > 0.0)) fail(sub, "lambda values must be > 0");
        }
      } else if (key == "q_list") {
        p.q_list = number_list(v, sub);
        for (double q : p.q_list) {
          if (!(q >= 1.0)) fail(sub, "moment orders must be >= 1");
        }
      } else if (key == "intdim_q") {
        p.intdim_q.clear();
        for (double q : number_list(v, sub)) {
          if (q != std::floor(q) || q < 1 || q > 20) fail(sub, "intdim orders must be integers in [1, 20]");
          p.intdim_q.push_back(static_cast<int>(q));
        }
      } else if (key == "phi") {
        if (!v.is_array() || v.empty()) fail(sub, "expected a nonempty array");
        p.phis.clear();
        for (const auto& item : v) p.phis.push_back(phi(item, sub));
      } else if (key == "probe") {
        p.probe_trials = get<int>(v.value("trials", json(p.probe_trials)), sub, "an integer");
        p.probe_seed = get<std::uint64_t>(v.value("seed", json(p.probe_seed)), sub, "an unsigned seed");
        if (v.contains("dims")) {
          p.probe_dims.clear();
          for (double d : number_list(v.at("dims"), sub)) {
            if (d != std::floor(d) || d < 1) fail(sub, "dims must be positive integers");
            p.probe_dims.push_back(static_cast<int>(d));
          }
        }
      } else if (key == "samples") {
        p.samples.n_samples = get<std::uint64_t>(v.value("n", json(p.samples.n_samples)), sub, "an unsigned count");
        p.samples.seed = get<std::uint64_t>(v.value("seed", json(p.samples.seed)), sub, "an unsigned seed");
        p.samples.workers = get<int>(v.value("workers", json(p.samples.workers)), sub, "an integer");
        p.samples.antithetic = get<bool>(v.value("antithetic", json(false)), sub, "a boolean");
        try {
          p.samples.validate();
        } catch (const std::exception& e) {
          fail(sub, e.what());
        }
      } else if (key == "certified_v_f") {
        p.certified_v_f = positive(v, sub);
      } else {
        fail(sub, "unknown parameter");
      }
    }
    return p;
  }

  OutputSpec parse_output(const json& j, const Path& path) const {
    OutputSpec o;
    if (!j.is_object()) fail(path, "output must be an object");
    o.dir = get<std::string>(j.value("dir", json(o.dir)), path, "a string");
    o.format = get<std::string>(j.value("format", json(o.format)), path, "a string");
    o.basename = get<std::string>(j.value("basename", json(o.basename)), path, "a string");
    if (o.format != "csv" && o.format != "json" && o.format != "both") {
      fail({"output", "format"}, "format must be csv, json, or both");
    }
    return o;
  }

  Experiment parse_experiment(const json& j, const Path& path, std::size_t index) {
    if (!j.is_object()) fail(path, "experiment must be an object");
    auto at = [&](const char* key) { Path p = path; p.emplace_back(key); return p; };
    if (!j.contains("model")) fail(path, "missing \"model\"");
    if (!j.contains("suites")) fail(path, "missing \"suites\"");
    std::string kind;
    Model m = model(j.at("model"), at("model"), kind);
    Experiment e{{}, kind, std::move(m), std::nullopt, {}, {}, {}};
    const bool finite = std::holds_alternative<FiniteChain>(e.model);
    e.name = j.contains("name") ? get<std::string>(j.at("name"), at("name"), "a string")
             : (j.at("model").contains("fixture") ? j.at("model").at("fixture").get<std::string>()
                                                  : "experiment" + std::to_string(index));
    if (j.contains("alpha")) e.alpha = positive(j.at("alpha"), at("alpha"));
    e.params = j.contains("params") ? params(j.at("params"), at("params")) : params(json::object(), at("params"));

    const json& suites = j.at("suites");
    if (!suites.is_array() || suites.empty()) fail(at("suites"), "expected a nonempty array of suite names");
    for (const auto& s : suites) {
      const auto name = get<std::string>(s, at("suites"), "a suite name");
      if (std::find(known_suites().begin(), known_suites().end(), name) == known_suites().end()) {
        fail(at("suites"), "unknown suite \"" + name + "\"");
      }
      if (!finite && kFiniteOnly.count(name)) fail(at("suites"), "suite \"" + name + "\" needs a finite chain model");
      if (name == "chaos" && !(!finite && std::holds_alternative<GaussianChaos>(std::get<GaussianModel>(e.model)))) {
        fail(at("suites"), "suite \"chaos\" needs a gaussian_chaos model");
      }
      if (std::find(e.suites.begin(), e.suites.end(), name) != e.suites.end()) {
        fail(at("suites"), "suite \"" + name + "\" listed twice");
      }
      e.suites.push_back(name);
    }

    if (finite) {
      if (!j.contains("fields")) fail(path, "finite models need \"fields\"");
      e.fields = fields(j.at("fields"), at("fields"), std::get<FiniteChain>(e.model));
      if (e.fields.empty()) fail(at("fields"), "at least one field is required");
    } else if (j.contains("fields") && !j.at("fields").empty()) {
      fail(at("fields"), "Gaussian models are their own field; remove \"fields\"");
    }
    return e;
  }

  const std::string& text_;
  std::string source_;
};

}  // namespace

ConfigError::ConfigError(const std::string& source, int line, const std::string& message)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + message), line_(line) {}

const std::vector<std::string>& known_suites() {
  static const std::vector<std::string> suites{"poincare",    "subadditivity", "chain-rule", "exp-moment",
                                               "tail",        "poly-moment",   "intdim",     "chaos"};
  return suites;
}

std::vector<double> default_lambda_grid() {
  std::vector<double> grid;
  for (int k = 1; k <= 16; ++k) grid.push_back(0.5 * k);
  return grid;
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto offset = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
    throw ConfigError(source, line, std::string("malformed JSON: ") + e.what());
  }
  return Parser(text, source).parse(root);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

}  // namespace tpl
