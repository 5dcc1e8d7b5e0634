#include "tpl/montecarlo.hpp"

#include "tpl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <string>

namespace tpl::mc {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

// Sample kurtosis above which the CLT interval on a mean is flagged.
constexpr double kHeavyTailKurtosis = 50.0;
// Largest per-sample log tr cosh averaged on the linear scale.
constexpr double kLinearScaleLogLimit = 600.0;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double log_cosh(double x) {
  const double a = std::abs(x);
  if (a == 0.0) return 0.0;
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

}  // namespace

Philox4x32::Counter Philox4x32::generate(Counter ctr, Key key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kW0;
      key[1] += kW1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kM0, ctr[0], hi0, lo0);
    mulhilo(kM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

Philox4x32::Counter Stream::block(std::uint64_t counter) const {
  const Philox4x32::Counter ctr{static_cast<std::uint32_t>(counter), static_cast<std::uint32_t>(counter >> 32),
                                static_cast<std::uint32_t>(id_), static_cast<std::uint32_t>(id_ >> 32)};
  const Philox4x32::Key key{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)};
  return Philox4x32::generate(ctr, key);
}

double Stream::uniform(std::uint64_t k) const {
  const auto b = block(k / 2);
  return (k % 2 == 0) ? to_open_unit(b[0], b[1]) : to_open_unit(b[2], b[3]);
}

double Stream::normal(std::uint64_t k) const {
  const auto b = block(k / 2);
  const double u1 = to_open_unit(b[0], b[1]);
  const double u2 = to_open_unit(b[2], b[3]);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return (k % 2 == 0) ? r * std::cos(angle) : r * std::sin(angle);
}

std::vector<double> sample_standard_normal(int n, const Stream& stream) {
  std::vector<double> x(static_cast<std::size_t>(std::max(n, 0)));
  for (std::size_t k = 0; k < x.size(); k += 2) {
    const auto b = stream.block(k / 2);
    const double r = std::sqrt(-2.0 * std::log(to_open_unit(b[0], b[1])));
    const double angle = 2.0 * std::numbers::pi * to_open_unit(b[2], b[3]);
    x[k] = r * std::cos(angle);
    if (k + 1 < x.size()) x[k + 1] = r * std::sin(angle);
  }
  return x;
}

void SampleSpec::validate() const {
  if (n_samples == 0) throw DomainError("sample count must be >= 1");
  if (workers < 1) throw DomainError("worker count must be >= 1");
}

int effective_workers(const SampleSpec& spec) {
  int workers = std::max(1, spec.workers);
  if (const char* cap = std::getenv("TPL_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(cap, &end, 10);
    if (end != cap && v >= 1) workers = std::min<int>(workers, static_cast<int>(v));
  }
  return workers;
}

Estimate clt_estimate(std::span<const double> values) {
  Estimate e;
  e.n = values.size();
  if (values.empty()) return e;
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double m2 = 0.0;
  double m4 = 0.0;
  for (double v : values) {
    const double dv = v - mean;
    m2 += dv * dv;
    m4 += dv * dv * dv * dv;
  }
  const auto n = static_cast<double>(values.size());
  e.value = mean;
  if (values.size() > 1 && m2 > 0.0) {
    const double var = m2 / (n - 1.0);
    const double half = kZ99 * std::sqrt(var / n);
    e.ci_low = mean - half;
    e.ci_high = mean + half;
    const double kurt = (m4 / n) / ((m2 / n) * (m2 / n));
    e.heavy_tail_warning = kurt > kHeavyTailKurtosis;
  } else {
    e.ci_low = e.ci_high = mean;
  }
  return e;
}

Estimate wilson_estimate(std::uint64_t successes, std::uint64_t n) {
  Estimate e;
  e.n = n;
  if (n == 0) return e;
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = kZ99 * kZ99;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = kZ99 / denom * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
  e.value = p;
  e.ci_low = std::clamp(std::min(p, center - half), 0.0, 1.0);
  e.ci_high = std::clamp(std::max(p, center + half), 0.0, 1.0);
  return e;
}

std::vector<double> sample_values(const SmoothField& field, const SampleSpec& spec,
                                  const std::function<double(const SymMatrix&)>& h) {
  spec.validate();
  if (!spec.antithetic) {
    return map_samples<double>(spec, spec.n_samples, field.ambient_dim,
                               [&](std::uint64_t, std::span<const double> x) { return h(field.eval(x)); });
  }
  const std::uint64_t pairs = (spec.n_samples + 1) / 2;
  return map_samples<double>(spec, pairs, field.ambient_dim, [&](std::uint64_t, std::span<const double> x) {
    std::vector<double> neg(x.begin(), x.end());
    for (double& v : neg) v = -v;
    return 0.5 * (h(field.eval(x)) + h(field.eval(neg)));
  });
}

Estimate estimate_trace_moment(const SmoothField& field, double q, const SampleSpec& spec,
                               const std::optional<SymMatrix>& center) {
  if (q < 1.0) throw DomainError("trace moment order q must be >= 1");
  const ScalarFn power = ScalarFn::abs_pow(2.0 * q);
  const auto values = sample_values(field, spec, [&](const SymMatrix& m) {
    return center ? trace_fn(m - *center, power) : trace_fn(m, power);
  });
  return clt_estimate(values);
}

std::vector<Estimate> estimate_tail(const SmoothField& field, const SymMatrix& center,
                                    std::span<const double> thresholds, const SampleSpec& spec) {
  spec.validate();
  if (!std::is_sorted(thresholds.begin(), thresholds.end())) throw DomainError("tail thresholds must be ascending");
  const auto norms = map_samples<double>(spec, spec.n_samples, field.ambient_dim,
                                         [&](std::uint64_t, std::span<const double> x) {
                                           return op_norm(field.eval(x) - center);
                                         });
  std::vector<Estimate> out;
  out.reserve(thresholds.size());
  for (double t : thresholds) {
    std::uint64_t hits = 0;
    for (double r : norms) hits += (r >= t) ? 1 : 0;
    out.push_back(wilson_estimate(hits, spec.n_samples));
  }
  return out;
}

Estimate estimate_cosh_trace(const SmoothField& field, const SymMatrix& center, double theta,
                             const SampleSpec& spec) {
  spec.validate();
  struct CoshSample {
    double linear = 0.0;  // tr cosh, may overflow to inf
    double log = 0.0;     // log tr cosh via logsumexp
  };
  auto evaluate = [&](std::span<const double> x) {
    const Eigen::VectorXd ev = eigh(field.eval(x) - center).eigenvalues;
    CoshSample s;
    double top = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
      s.linear += std::cosh(theta * ev(i));
      top = std::max(top, log_cosh(theta * ev(i)));
    }
    double acc = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) acc += std::exp(log_cosh(theta * ev(i)) - top);
    s.log = top + std::log(acc);
    return s;
  };

  std::vector<CoshSample> samples;
  if (!spec.antithetic) {
    samples = map_samples<CoshSample>(spec, spec.n_samples, field.ambient_dim,
                                      [&](std::uint64_t, std::span<const double> x) { return evaluate(x); });
  } else {
    const std::uint64_t pairs = (spec.n_samples + 1) / 2;
    samples = map_samples<CoshSample>(spec, pairs, field.ambient_dim, [&](std::uint64_t, std::span<const double> x) {
      std::vector<double> neg(x.begin(), x.end());
      for (double& v : neg) v = -v;
      const CoshSample a = evaluate(x);
      const CoshSample b = evaluate(neg);
      const double hi = std::max(a.log, b.log);
      return CoshSample{0.5 * (a.linear + b.linear), hi + std::log(0.5 * (std::exp(a.log - hi) + std::exp(b.log - hi)))};
    });
  }

  double shift = -std::numeric_limits<double>::infinity();
  for (const auto& s : samples) shift = std::max(shift, s.log);
  std::vector<double> values(samples.size());
  Estimate e;
  if (shift < kLinearScaleLogLimit) {
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = samples[i].linear;
    e = clt_estimate(values);
    e.log_value = std::log(e.value);
  } else {
    // Rescale by exp(shift) so the mean and its interval stay representable.
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = std::exp(samples[i].log - shift);
    e = clt_estimate(values);
    e.log_value = shift + std::log(e.value);
    const double factor = std::exp(shift);
    e.value *= factor;
    e.ci_low *= factor;
    e.ci_high *= factor;
  }
  return e;
}

}  // namespace tpl::mc
