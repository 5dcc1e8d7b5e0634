#include "tpl/poincare.hpp"

#include "tpl/errors.hpp"

#include <cmath>

namespace tpl {

namespace {

constexpr int kMaxDenseStates = 4096;
// Ratios are only formed when tr E exceeds this; below it the field is constant.
constexpr double kEnergyFloor = 1e-300;
constexpr double kProbeSlack = 1e-9;

}  // namespace

std::string to_string(PoincareCertificate::Method m) {
  return m == PoincareCertificate::Method::SpectralGap ? "SPECTRAL_GAP" : "USER_SUPPLIED";
}

nlohmann::json to_json(const PoincareCertificate& c) {
  return {{"alpha", c.alpha}, {"gap", c.gap}, {"method", to_string(c.method)}, {"chain_id", c.chain_id}};
}

PoincareCertificate poincare_constant(const FiniteChain& chain) {
  const int n = chain.n_states();
  if (n > kMaxDenseStates) {
    throw CapacityError("spectral gap needs a dense eigensolve; " + std::to_string(n) + " states exceeds " +
                        std::to_string(kMaxDenseStates));
  }
  if (n < 2) throw ModelError("a single-state chain has no spectral gap");
  const auto& mu = chain.stationary();
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    s(i, i) = chain.exit_rate(i);
    for (const Transition& t : chain.jumps(i)) {
      s(i, t.target) = -std::sqrt(mu[static_cast<std::size_t>(i)] / mu[static_cast<std::size_t>(t.target)]) * t.rate;
    }
  }
  const Eigen::VectorXd ev = eigh(SymMatrix(s)).eigenvalues;
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  const double gap = ev(1);
  if (!(gap > kRelTol * scale)) {
    throw ModelError("chain '" + chain.name() + "' has zero spectral gap (gap = " + std::to_string(gap) +
                     "); it is not ergodic");
  }
  PoincareCertificate c;
  c.gap = gap;
  c.alpha = 1.0 / gap;
  c.method = PoincareCertificate::Method::SpectralGap;
  c.chain_id = chain.name();
  return c;
}

PoincareCertificate user_certificate(double alpha, std::string chain_id) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("Poincare constant must be positive and finite");
  PoincareCertificate c;
  c.alpha = alpha;
  c.gap = 1.0 / alpha;
  c.method = PoincareCertificate::Method::UserSupplied;
  c.chain_id = std::move(chain_id);
  return c;
}

PoincareCertificate ou_certificate() { return user_certificate(1.0, "ornstein-uhlenbeck"); }

CheckReport check_scalar_poincare(const FiniteChain& chain, std::span<const double> f, const PoincareCertificate& cert,
                                  const Slack& slack) {
  if (f.size() != static_cast<std::size_t>(chain.n_states())) throw DimensionError("scalar field size mismatch");
  const auto& mu = chain.stationary();
  double mean = 0.0;
  for (std::size_t z = 0; z < f.size(); ++z) mean += mu[z] * f[z];
  double var = 0.0;
  double energy = 0.0;
  for (int z = 0; z < chain.n_states(); ++z) {
    const double dev = f[static_cast<std::size_t>(z)] - mean;
    var += mu[static_cast<std::size_t>(z)] * dev * dev;
    double gamma = 0.0;
    for (const Transition& t : chain.jumps(z)) {
      const double diff = f[static_cast<std::size_t>(t.target)] - f[static_cast<std::size_t>(z)];
      gamma += t.rate * diff * diff;
    }
    energy += mu[static_cast<std::size_t>(z)] * 0.5 * gamma;
  }
  return CheckReport::exact(citation::kScalarPoincare, var, cert.alpha * energy, slack,
                            {{"alpha", cert.alpha}, {"variance", var}, {"dirichlet", energy}, {"mean", mean}});
}

CheckReport check_trace_poincare(const FiniteChain& chain, const FiniteField& f, const PoincareCertificate& cert,
                                 const Slack& slack) {
  const double var = matrix_variance(chain, f).trace();
  const double energy = dirichlet_form(chain, f).trace();
  return CheckReport::exact(citation::kTracePoincare, var, cert.alpha * energy, slack,
                            {{"alpha", cert.alpha}, {"d", f.dim()}, {"trace_variance", var}, {"trace_dirichlet", energy}});
}

FiniteField random_field(int n_states, int d, const mc::Stream& stream) {
  const std::vector<double> x = mc::sample_standard_normal(n_states * d * d, stream);
  std::vector<SymMatrix> vals;
  vals.reserve(static_cast<std::size_t>(n_states));
  std::size_t k = 0;
  for (int z = 0; z < n_states; ++z) {
    Eigen::MatrixXd m(d, d);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) m(i, j) = x[k++];
    }
    vals.emplace_back(m);
  }
  return FiniteField(std::move(vals));
}

nlohmann::json to_json(const ProbeReport& r) {
  nlohmann::json j{{"trials", r.trials}, {"seed", r.seed},           {"dims", r.dims},
                   {"alpha", r.alpha},   {"sup_ratio", r.sup_ratio}, {"pass", r.pass}};
  if (r.argmax) {
    j["argmax"] = {{"trial", r.argmax->trial},
                   {"dim", r.argmax->dim},
                   {"kind", r.argmax->compression ? "compression" : "matrix"},
                   {"column", r.argmax->column}};
  } else {
    j["argmax"] = nullptr;
  }
  return j;
}

ProbeReport equivalence_probe(const FiniteChain& chain, const PoincareCertificate& cert, int trials,
                              const std::vector<int>& dims, std::uint64_t seed) {
  ProbeReport r;
  r.trials = std::max(trials, 0);
  r.seed = seed;
  r.dims = dims;
  r.alpha = cert.alpha;
  if (r.trials == 0) return r;
  if (dims.empty()) throw DomainError("equivalence probe needs at least one dimension");
  for (int d : dims) {
    if (d < 1) throw DimensionError("probe dimensions must be >= 1");
  }
  const int n = chain.n_states();

  auto consider = [&](double var, double energy, ProbeReport::Argmax where, const FiniteField* field) {
    if (!(energy > kEnergyFloor)) return;
    const double ratio = var / energy;
    if (!r.argmax || ratio > r.sup_ratio) {
      r.sup_ratio = ratio;
      r.argmax = where;
      if (field) {
        r.maximizer = *field;
      } else {
        r.maximizer.reset();
      }
    }
  };

  for (int t = 0; t < r.trials; ++t) {
    const int d = dims[static_cast<std::size_t>(t) % dims.size()];
    const mc::Stream stream(seed, static_cast<std::uint64_t>(t));
    const FiniteField f = random_field(n, d, stream);
    consider(matrix_variance(chain, f).trace(), dirichlet_form(chain, f).trace(), {t, d, false, -1}, &f);

    // Signs for u come from the draws after the field's entries.
    const auto offset = static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(d * d);
    std::vector<double> u(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) u[static_cast<std::size_t>(i)] = stream.uniform(offset + static_cast<std::uint64_t>(i)) < 0.5 ? -1.0 : 1.0;
    const Eigen::Map<const Eigen::VectorXd> uv(u.data(), d);
    for (int col = 0; col < d; ++col) {
      std::vector<double> h(static_cast<std::size_t>(n));
      for (int z = 0; z < n; ++z) h[static_cast<std::size_t>(z)] = uv.dot(f[z].matrix().col(col));
      const CheckReport c = check_scalar_poincare(chain, h, cert);
      consider(c.context["variance"].get<double>(), c.context["dirichlet"].get<double>(), {t, d, true, col}, nullptr);
    }
  }
  r.pass = r.sup_ratio <= cert.alpha * (1.0 + kProbeSlack);
  return r;
}

}  // namespace tpl
