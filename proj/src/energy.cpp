#include "tpl/energy.hpp"

#include "tpl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tpl {

namespace {

// Smooth-field reports keep at most this many sampled Gamma evaluations.
constexpr std::size_t kMaxStoredGamma = 64;

void require_field_on_chain(const FiniteChain& chain, const FiniteField& f) {
  if (f.size() != chain.n_states()) {
    throw DimensionError("field has " + std::to_string(f.size()) + " values for a chain with " +
                         std::to_string(chain.n_states()) + " states");
  }
}

void require_bivariate(const FiniteChain& base, const BivariateField& g) {
  if (g.base_states != base.n_states()) throw DimensionError("bivariate field does not match the base chain");
}

double trace_half_width(const std::vector<SymMatrix>& samples) {
  std::vector<double> traces(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) traces[i] = samples[i].trace();
  const mc::Estimate e = mc::clt_estimate(traces);
  return 0.5 * (e.ci_high - e.ci_low);
}

SymMatrix ordered_mean(const std::vector<SymMatrix>& samples) {
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(samples.front().dim(), samples.front().dim());
  for (const auto& s : samples) acc += s.matrix();
  return SymMatrix(acc / static_cast<double>(samples.size()));
}

}  // namespace

std::string to_string(Mode m) { return m == Mode::Exact ? "EXACT" : "ESTIMATED"; }

nlohmann::json matrix_to_json(const SymMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < m.dim(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < m.dim(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json to_json(const EnergyReport& r) {
  nlohmann::json gamma = nlohmann::json::array();
  for (const auto& g : r.gamma) gamma.push_back(matrix_to_json(g));
  nlohmann::json j{{"gamma", gamma},
                   {"dirichlet", matrix_to_json(r.dirichlet)},
                   {"variance", matrix_to_json(r.variance)},
                   {"v_f", r.v_f},
                   {"mode", to_string(r.mode)}};
  if (r.sample_meta) {
    j["sample_meta"] = {{"n", r.sample_meta->n},
                        {"seed", r.sample_meta->seed},
                        {"dirichlet_trace_half_width", r.sample_meta->dirichlet_trace_half_width},
                        {"variance_trace_half_width", r.sample_meta->variance_trace_half_width}};
  } else {
    j["sample_meta"] = nullptr;
  }
  return j;
}

// ---------------------------------------------------------------------------

SymMatrix carre_finite(const FiniteChain& chain, const FiniteField& f, int z) {
  require_field_on_chain(chain, f);
  const SymMatrix& here = f[z];
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(here.dim(), here.dim());
  for (const Transition& t : chain.jumps(z)) {
    const Eigen::MatrixXd diff = f[t.target].matrix() - here.matrix();
    acc += t.rate * (diff * diff);
  }
  return SymMatrix(0.5 * acc);
}

std::vector<SymMatrix> carre_all(const FiniteChain& chain, const FiniteField& f) {
  std::vector<SymMatrix> out;
  out.reserve(static_cast<std::size_t>(chain.n_states()));
  for (int z = 0; z < chain.n_states(); ++z) out.push_back(carre_finite(chain, f, z));
  return out;
}

SymMatrix carre_product_formula(std::span<const double> base_mu, int n_coords, const FiniteField& f, std::size_t z) {
  const auto m = static_cast<int>(base_mu.size());
  std::size_t total = 1;
  for (int i = 0; i < n_coords; ++i) {
    if (total > kMaxStates / static_cast<std::size_t>(m)) throw CapacityError("product formula exceeds state budget");
    total *= static_cast<std::size_t>(m);
  }
  if (static_cast<std::size_t>(f.size()) != total) throw DimensionError("field size does not match the product space");
  if (z >= total) throw DimensionError("product state index out of range");

  std::vector<int> tuple = product_tuple(z, m, n_coords);
  const SymMatrix& here = f.values[z];
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(here.dim(), here.dim());
  for (int i = 0; i < n_coords; ++i) {
    const int original = tuple[static_cast<std::size_t>(i)];
    for (int w = 0; w < m; ++w) {
      if (w == original) continue;
      tuple[static_cast<std::size_t>(i)] = w;
      const Eigen::MatrixXd diff = here.matrix() - f.values[product_index(tuple, m)].matrix();
      acc += base_mu[static_cast<std::size_t>(w)] * (diff * diff);
    }
    tuple[static_cast<std::size_t>(i)] = original;
  }
  return SymMatrix(0.5 * acc);
}

SymMatrix expectation(const FiniteChain& chain, const FiniteField& f) {
  require_field_on_chain(chain, f);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(f.dim(), f.dim());
  for (int z = 0; z < f.size(); ++z) acc += chain.stationary()[static_cast<std::size_t>(z)] * f[z].matrix();
  return SymMatrix(acc);
}

FiniteField centered(const FiniteChain& chain, const FiniteField& f) {
  const SymMatrix mean = expectation(chain, f);
  std::vector<SymMatrix> vals;
  vals.reserve(f.values.size());
  for (const auto& v : f.values) vals.push_back(v - mean);
  return FiniteField(std::move(vals));
}

SymMatrix dirichlet_form(const FiniteChain& chain, const FiniteField& f) {
  const auto gamma = carre_all(chain, f);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(f.dim(), f.dim());
  for (int z = 0; z < chain.n_states(); ++z) acc += chain.stationary()[static_cast<std::size_t>(z)] * gamma[static_cast<std::size_t>(z)].matrix();
  return SymMatrix(acc);
}

SymMatrix matrix_variance(const FiniteChain& chain, const FiniteField& f) {
  const SymMatrix mean = expectation(chain, f);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(f.dim(), f.dim());
  for (int z = 0; z < f.size(); ++z) {
    const Eigen::MatrixXd dev = f[z].matrix() - mean.matrix();
    acc += chain.stationary()[static_cast<std::size_t>(z)] * (dev * dev);
  }
  return SymMatrix(acc);
}

VarianceProxy variance_proxy(const FiniteChain& chain, const FiniteField& f) {
  double best = 0.0;
  for (int z = 0; z < chain.n_states(); ++z) best = std::max(best, op_norm(carre_finite(chain, f, z)));
  return {best, Mode::Exact};
}

EnergyReport energy_report(const FiniteChain& chain, const FiniteField& f) {
  EnergyReport r;
  r.gamma = carre_all(chain, f);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(f.dim(), f.dim());
  double v = 0.0;
  for (int z = 0; z < chain.n_states(); ++z) {
    const auto& g = r.gamma[static_cast<std::size_t>(z)];
    acc += chain.stationary()[static_cast<std::size_t>(z)] * g.matrix();
    v = std::max(v, op_norm(g));
  }
  r.dirichlet = SymMatrix(acc);
  r.variance = matrix_variance(chain, f);
  r.v_f = v;
  r.mode = Mode::Exact;
  return r;
}

// ---------------------------------------------------------------------------

SymMatrix carre_smooth(const SmoothField& f, std::span<const double> x) {
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(f.dim, f.dim);
  if (f.partials) {
    for (const SymMatrix& p : f.partials(x)) acc += p.matrix() * p.matrix();
    return SymMatrix(acc);
  }
  const double step = std::cbrt(std::numeric_limits<double>::epsilon());
  std::vector<double> probe(x.begin(), x.end());
  for (std::size_t i = 0; i < probe.size(); ++i) {
    const double h = step * (1.0 + std::abs(x[i]));
    probe[i] = x[i] + h;
    const SymMatrix up = f.eval(probe);
    probe[i] = x[i] - h;
    const SymMatrix down = f.eval(probe);
    probe[i] = x[i];
    const Eigen::MatrixXd d = (up.matrix() - down.matrix()) / (2.0 * h);
    acc += d * d;
  }
  return SymMatrix(acc);
}

SymMatrix dirichlet_form(const GaussianSeries& s) {
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(s.dim(), s.dim());
  for (const auto& a : s.coefficients()) acc += a.matrix() * a.matrix();
  return SymMatrix(acc);
}

SymMatrix matrix_variance(const GaussianSeries& s) { return dirichlet_form(s); }

VarianceProxy variance_proxy(const GaussianSeries& s) { return {op_norm(dirichlet_form(s)), Mode::Exact}; }

EnergyReport energy_report(const GaussianSeries& s) {
  EnergyReport r;
  r.dirichlet = dirichlet_form(s);
  r.gamma = {r.dirichlet};
  r.variance = matrix_variance(s);
  r.v_f = op_norm(r.dirichlet);
  r.mode = Mode::Exact;
  return r;
}

SymMatrix dirichlet_form(const SmoothField& f, const mc::SampleSpec& spec) {
  spec.validate();
  const auto gammas = mc::map_samples<SymMatrix>(spec, spec.n_samples, f.ambient_dim,
                                                 [&](std::uint64_t, std::span<const double> x) { return carre_smooth(f, x); });
  return ordered_mean(gammas);
}

SymMatrix matrix_variance(const SmoothField& f, const mc::SampleSpec& spec) {
  spec.validate();
  const auto values = mc::map_samples<SymMatrix>(spec, spec.n_samples, f.ambient_dim,
                                                 [&](std::uint64_t, std::span<const double> x) { return f.eval(x); });
  const SymMatrix mean = ordered_mean(values);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(f.dim, f.dim);
  for (const auto& v : values) {
    const Eigen::MatrixXd dev = v.matrix() - mean.matrix();
    acc += dev * dev;
  }
  return SymMatrix(acc / static_cast<double>(values.size()));
}

VarianceProxy variance_proxy(const SmoothField& f, const mc::SampleSpec& grid) {
  grid.validate();
  const auto norms = mc::map_samples<double>(grid, grid.n_samples, f.ambient_dim,
                                             [&](std::uint64_t, std::span<const double> x) { return op_norm(carre_smooth(f, x)); });
  return {*std::max_element(norms.begin(), norms.end()), Mode::Estimated};
}

EnergyReport energy_report(const SmoothField& f, const mc::SampleSpec& spec) {
  spec.validate();
  struct Point {
    SymMatrix value;
    SymMatrix gamma;
  };
  const auto points = mc::map_samples<Point>(spec, spec.n_samples, f.ambient_dim,
                                             [&](std::uint64_t, std::span<const double> x) {
                                               return Point{f.eval(x), carre_smooth(f, x)};
                                             });
  std::vector<SymMatrix> values;
  std::vector<SymMatrix> gammas;
  values.reserve(points.size());
  gammas.reserve(points.size());
  double v = 0.0;
  for (const auto& p : points) {
    values.push_back(p.value);
    gammas.push_back(p.gamma);
    v = std::max(v, op_norm(p.gamma));
  }
  const SymMatrix mean = ordered_mean(values);
  std::vector<SymMatrix> deviations;
  deviations.reserve(values.size());
  for (const auto& x : values) deviations.push_back((x - mean).squared());

  EnergyReport r;
  r.dirichlet = ordered_mean(gammas);
  r.variance = ordered_mean(deviations);
  r.v_f = v;
  r.mode = Mode::Estimated;
  r.sample_meta = SampleMeta{spec.n_samples, spec.seed, trace_half_width(gammas), trace_half_width(deviations)};
  gammas.resize(std::min(gammas.size(), kMaxStoredGamma));
  r.gamma = std::move(gammas);
  return r;
}

// ---------------------------------------------------------------------------

BivariateField::BivariateField(int n, std::vector<SymMatrix> v) : base_states(n), values(std::move(v)) {
  if (n < 1) throw DimensionError("bivariate field needs n >= 1");
  if (values.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n)) {
    throw DimensionError("bivariate field needs n*n values");
  }
  for (const auto& m : values) {
    if (m.dim() != values.front().dim()) throw DimensionError("bivariate field values have mixed dimensions");
  }
}

SymMatrix bivariate_carre_coordinate(const FiniteChain& base, const BivariateField& g, int coord, int z1, int z2) {
  require_bivariate(base, g);
  if (coord != 1 && coord != 2) throw DomainError("coordinate must be 1 or 2");
  const SymMatrix& here = g.at(z1, z2);
  const int moving = coord == 1 ? z1 : z2;
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(here.dim(), here.dim());
  for (const Transition& t : base.jumps(moving)) {
    const SymMatrix& there = coord == 1 ? g.at(t.target, z2) : g.at(z1, t.target);
    const Eigen::MatrixXd diff = there.matrix() - here.matrix();
    acc += t.rate * (diff * diff);
  }
  return SymMatrix(0.5 * acc);
}

SymMatrix bivariate_carre(const FiniteChain& base, const BivariateField& g, int z1, int z2) {
  return bivariate_carre_coordinate(base, g, 1, z1, z2) + bivariate_carre_coordinate(base, g, 2, z1, z2);
}

SymMatrix bivariate_dirichlet(const FiniteChain& base, const BivariateField& g) {
  require_bivariate(base, g);
  const auto& mu = base.stationary();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(g.dim(), g.dim());
  for (int a = 0; a < g.base_states; ++a) {
    for (int b = 0; b < g.base_states; ++b) {
      acc += (mu[static_cast<std::size_t>(a)] * mu[static_cast<std::size_t>(b)]) * bivariate_carre(base, g, a, b).matrix();
    }
  }
  return SymMatrix(acc);
}

double bivariate_variance_proxy(const FiniteChain& base, const BivariateField& g) {
  require_bivariate(base, g);
  double best = 0.0;
  for (int a = 0; a < g.base_states; ++a) {
    for (int b = 0; b < g.base_states; ++b) best = std::max(best, op_norm(bivariate_carre(base, g, a, b)));
  }
  return best;
}

SymMatrix bivariate_variance(const FiniteChain& base, const BivariateField& g) {
  require_bivariate(base, g);
  const auto& mu = base.stationary();
  const int n = g.base_states;
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(g.dim(), g.dim());
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) mean += (mu[static_cast<std::size_t>(a)] * mu[static_cast<std::size_t>(b)]) * g.at(a, b).matrix();
  }
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(g.dim(), g.dim());
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const Eigen::MatrixXd dev = g.at(a, b).matrix() - mean;
      acc += (mu[static_cast<std::size_t>(a)] * mu[static_cast<std::size_t>(b)]) * (dev * dev);
    }
  }
  return SymMatrix(acc);
}

std::vector<SymMatrix> conditional_variance(const FiniteChain& base, const BivariateField& g, int coord) {
  require_bivariate(base, g);
  if (coord != 1 && coord != 2) throw DomainError("coordinate must be 1 or 2");
  const auto& mu = base.stationary();
  const int n = g.base_states;
  auto value = [&](int moving, int frozen) -> const SymMatrix& {
    return coord == 1 ? g.at(moving, frozen) : g.at(frozen, moving);
  };
  std::vector<SymMatrix> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int frozen = 0; frozen < n; ++frozen) {
    Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(g.dim(), g.dim());
    for (int m = 0; m < n; ++m) mean += mu[static_cast<std::size_t>(m)] * value(m, frozen).matrix();
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(g.dim(), g.dim());
    for (int m = 0; m < n; ++m) {
      const Eigen::MatrixXd dev = value(m, frozen).matrix() - mean;
      acc += mu[static_cast<std::size_t>(m)] * (dev * dev);
    }
    out.emplace_back(acc);
  }
  return out;
}

BivariateField apply_spectral_fn(const BivariateField& g, const ScalarFn& phi) {
  std::vector<SymMatrix> vals;
  vals.reserve(g.values.size());
  for (const auto& v : g.values) vals.push_back(apply_spectral_fn(v, phi));
  return BivariateField(g.base_states, std::move(vals));
}

SymmetrizedField bivariate_symmetrized(const FiniteChain& chain, const FiniteField& f) {
  require_field_on_chain(chain, f);
  const auto n = static_cast<std::size_t>(chain.n_states());
  if (n > kMaxStates / n) throw CapacityError("symmetrized field on " + std::to_string(n) + "^2 states exceeds budget");
  std::vector<SymMatrix> vals;
  vals.reserve(n * n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) vals.push_back(f.values[a] - f.values[b]);
  }
  SymmetrizedField out;
  out.g = BivariateField(static_cast<int>(n), std::move(vals));
  out.gamma.reserve(n * n);
  const auto& mu = chain.stationary();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(f.dim(), f.dim());
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      SymMatrix gam = bivariate_carre(chain, out.g, static_cast<int>(a), static_cast<int>(b));
      acc += (mu[a] * mu[b]) * gam.matrix();
      out.v_g = std::max(out.v_g, op_norm(gam));
      out.gamma.push_back(std::move(gam));
    }
  }
  out.dirichlet = SymMatrix(acc);
  return out;
}

}  // namespace tpl
