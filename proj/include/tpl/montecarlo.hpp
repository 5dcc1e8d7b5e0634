#pragma once

// Monte Carlo backbone: counter-based random streams, parallel sample maps
// with ordered reduction, and moment / tail estimators with confidence
// intervals.

#include "tpl/models.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <thread>
#include <vector>

namespace tpl::mc {

/// Two-sided 99% standard normal quantile.
inline constexpr double kZ99 = 2.5758293035489004;

/// Philox4x32-10 block function (Salmon et al., SC'11).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;
  static Counter generate(Counter ctr, Key key);
};

/// A random stream is a pure function of (seed, stream id, counter): the k-th
/// draw never depends on what was drawn before, so parallel consumers can
/// share a seed without coordination.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), id_(stream_id) {}

  [[nodiscard]] Philox4x32::Counter block(std::uint64_t counter) const;
  /// k-th uniform on the open interval (0, 1), 53-bit resolution.
  [[nodiscard]] double uniform(std::uint64_t k) const;
  /// k-th standard normal (Box-Muller on block k / 2).
  [[nodiscard]] double normal(std::uint64_t k) const;

  [[nodiscard]] std::uint64_t seed() const { return seed_; }
  [[nodiscard]] std::uint64_t id() const { return id_; }

 private:
  std::uint64_t seed_;
  std::uint64_t id_;
};

/// n i.i.d. standard normals: draws 0..n-1 of `stream`.
std::vector<double> sample_standard_normal(int n, const Stream& stream);

struct SampleSpec {
  std::uint64_t n_samples = 10'000;
  std::uint64_t seed = 0;
  int workers = 1;
  bool antithetic = false;

  /// Throws DomainError when n_samples == 0 or workers < 1.
  void validate() const;
};

/// Workers actually used: spec.workers capped by the TPL_THREADS environment variable.
int effective_workers(const SampleSpec& spec);

struct Estimate {
  double value = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double level = 0.99;
  std::uint64_t n = 0;
  /// Set when the sample kurtosis makes the CLT interval doubtful.
  bool heavy_tail_warning = false;
  /// log(value); finite even when value overflows (cosh estimates).
  std::optional<double> log_value;
};

/// Mean with a two-sided CLT interval at 99%.
Estimate clt_estimate(std::span<const double> values);
/// Proportion successes / n with the 99% Wilson score interval.
Estimate wilson_estimate(std::uint64_t successes, std::uint64_t n);

/// Evaluates `fn(sample_index, x)` for every sample, where x holds the
/// standard normals of stream (spec.seed, sample_index). Work is split into
/// contiguous index ranges per worker and results are stored by index, so the
/// output does not depend on the worker count.
template <class T, class Fn>
std::vector<T> map_samples(const SampleSpec& spec, std::uint64_t count, int ambient_dim, Fn&& fn) {
  std::vector<T> out(count);
  const int workers = std::max(1, std::min<int>(effective_workers(spec), static_cast<int>(std::max<std::uint64_t>(count, 1))));
  auto run_range = [&](std::uint64_t begin, std::uint64_t end) {
    for (std::uint64_t i = begin; i < end; ++i) {
      const Stream stream(spec.seed, i);
      const std::vector<double> x = sample_standard_normal(ambient_dim, stream);
      out[i] = fn(i, std::span<const double>(x));
    }
  };
  if (workers == 1) {
    run_range(0, count);
    return out;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  const std::uint64_t chunk = (count + static_cast<std::uint64_t>(workers) - 1) / static_cast<std::uint64_t>(workers);
  for (int w = 0; w < workers; ++w) {
    const std::uint64_t begin = std::min(count, chunk * static_cast<std::uint64_t>(w));
    const std::uint64_t end = std::min(count, begin + chunk);
    pool.emplace_back(run_range, begin, end);
  }
  for (auto& t : pool) t.join();
  return out;
}

/// Per-sample values of h(f(X)); with spec.antithetic the values are pair
/// averages (h(f(X)) + h(f(-X))) / 2 over ceil(N / 2) pairs.
std::vector<double> sample_values(const SmoothField& field, const SampleSpec& spec,
                                  const std::function<double(const SymMatrix&)>& h);

/// E tr |f(X) - center|^{2q}, 99% CLT interval.
Estimate estimate_trace_moment(const SmoothField& field, double q, const SampleSpec& spec,
                               const std::optional<SymMatrix>& center = std::nullopt);

/// Survival P{||f(X) - center|| >= t} for each ascending threshold t, with 99%
/// Wilson intervals, from a single pass over the samples.
std::vector<Estimate> estimate_tail(const SmoothField& field, const SymMatrix& center,
                                    std::span<const double> thresholds, const SampleSpec& spec);

/// E tr cosh(theta (f(X) - center)), evaluated in log-sum-exp form.
Estimate estimate_cosh_trace(const SmoothField& field, const SymMatrix& center, double theta,
                             const SampleSpec& spec);

}  // namespace tpl::mc
