#pragma once

// Running per-dimension standardization of observations, shared by all
// generator and discriminator networks. Single-pass update (Welford) plus a
// parallel merge (Chan et al.), so per-match accumulators can be combined
// deterministically at generation end regardless of evaluation parallelism.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "evoimit/contract.hpp"

namespace evoimit {

struct RunningStats {
  std::uint64_t count = 0;
  std::vector<double> mean;
  std::vector<double> m2;  // sum of squared deviations

  RunningStats() = default;
  explicit RunningStats(std::size_t dim) : mean(dim, 0.0), m2(dim, 0.0) {}

  std::size_t dim() const { return mean.size(); }
};

inline void std_update(RunningStats& stats, std::span<const double> obs) {
  contract(obs.size() == stats.dim(), "std_update: dimension mismatch");
  for (double v : obs) {
    contract(std::isfinite(v), "std_update: non-finite observation");
  }
  stats.count += 1;
  const double inv_count = 1.0 / static_cast<double>(stats.count);
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const double delta = obs[i] - stats.mean[i];
    stats.mean[i] += delta * inv_count;
    stats.m2[i] += delta * (obs[i] - stats.mean[i]);
  }
}

// (obs - mean) / max(sqrt(m2/count), eps). With no samples yet the output is
// the zero vector, which zero-initialized networks map to zero output.
inline constexpr double kStdEpsilon = 1e-8;

inline void std_apply(const RunningStats& stats, std::span<const double> obs,
                      std::span<double> out) {
  contract(obs.size() == stats.dim(), "std_apply: dimension mismatch");
  contract(out.size() == stats.dim(), "std_apply: output dimension mismatch");
  if (stats.count == 0) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = 0.0;
    return;
  }
  const double inv_count = 1.0 / static_cast<double>(stats.count);
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const double sd = std::sqrt(stats.m2[i] * inv_count);
    out[i] = (obs[i] - stats.mean[i]) / (sd > kStdEpsilon ? sd : kStdEpsilon);
  }
}

inline std::vector<double> std_apply(const RunningStats& stats, std::span<const double> obs) {
  std::vector<double> out(stats.dim());
  std_apply(stats, obs, out);
  return out;
}

// Parallel-algorithm merge: exact in count, equal to sequential processing
// of the concatenated streams up to floating-point roundoff. Merging with an
// empty accumulator is an exact identity.
inline RunningStats std_merge(const RunningStats& a, const RunningStats& b) {
  contract(a.dim() == b.dim(), "std_merge: dimension mismatch");
  if (a.count == 0) return b;
  if (b.count == 0) return a;
  RunningStats out(a.dim());
  out.count = a.count + b.count;
  const double na = static_cast<double>(a.count);
  const double nb = static_cast<double>(b.count);
  const double n = static_cast<double>(out.count);
  for (std::size_t i = 0; i < a.dim(); ++i) {
    const double delta = b.mean[i] - a.mean[i];
    out.mean[i] = a.mean[i] + delta * (nb / n);
    out.m2[i] = a.m2[i] + b.m2[i] + delta * delta * (na * nb / n);
  }
  return out;
}

}  // namespace evoimit
