#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <span>
#include <thread>
#include <vector>

#include "hotelling/core.hpp"

namespace hotelling {

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based uniform stream: every draw is a pure function of
// (seed, counter), so disjoint sample batches can be evaluated in parallel
// and still reproduce the sequential result bit for bit.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed)
      : base_(mix64(seed ^ 0x5851f42d4c957f2dULL)) {}

  // Uniform in [0, 1).
  double uniform(std::uint64_t counter) const {
    const std::uint64_t bits =
        mix64(base_ + counter * 0x9e3779b97f4a7c15ULL);
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t base_;
};

// Counter stride reserved per Monte Carlo sample.
inline constexpr std::uint64_t kDrawsPerSample = 64;

struct McResult {
  PayoffVector mean;
  PayoffVector std_error;
  std::uint64_t samples = 0;
};

namespace detail {
struct McBatchSums {
  std::vector<double> sum;
  std::vector<double> sumsq;
  std::vector<double> first;
  std::vector<char> constant;  // every sample in the batch equalled `first`
  std::uint64_t count = 0;
};
}  // namespace detail

// Averages per-sample vectors produced by fn(sample_index, out_span).
// Work is split into a fixed number of batches combined in index order, so
// the result does not depend on how many threads actually ran.
template <class PerSample>
McResult mc_accumulate(std::size_t dim, std::uint64_t samples, PerSample&& fn) {
  constexpr std::uint64_t kBatches = 64;
  std::vector<detail::McBatchSums> batch(kBatches);

  auto run_range = [&](std::uint64_t b_lo, std::uint64_t b_hi) {
    std::vector<double> buf(dim);
    for (std::uint64_t b = b_lo; b < b_hi; ++b) {
      auto& acc = batch[b];
      acc.sum.assign(dim, 0.0);
      acc.sumsq.assign(dim, 0.0);
      acc.first.assign(dim, 0.0);
      acc.constant.assign(dim, 1);
      const std::uint64_t lo = samples * b / kBatches;
      const std::uint64_t hi = samples * (b + 1) / kBatches;
      acc.count = hi - lo;
      for (std::uint64_t s = lo; s < hi; ++s) {
        fn(s, std::span<double>(buf));
        for (std::size_t d = 0; d < dim; ++d) {
          acc.sum[d] += buf[d];
          acc.sumsq[d] += buf[d] * buf[d];
          if (s == lo) {
            acc.first[d] = buf[d];
          } else if (buf[d] != acc.first[d]) {
            acc.constant[d] = 0;
          }
        }
      }
    }
  };

  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  const unsigned workers =
      samples >= 100000 ? std::min<unsigned>(hw, 8) : 1;
  if (workers <= 1) {
    run_range(0, kBatches);
  } else {
    std::vector<std::future<void>> futs;
    for (unsigned w = 0; w < workers; ++w) {
      const std::uint64_t lo = kBatches * w / workers;
      const std::uint64_t hi = kBatches * (w + 1) / workers;
      futs.push_back(std::async(std::launch::async, run_range, lo, hi));
    }
    for (auto& f : futs) f.get();
  }

  McResult res;
  res.samples = samples;
  res.mean.assign(dim, 0.0);
  res.std_error.assign(dim, 0.0);
  if (samples == 0) return res;
  std::vector<double> sum(dim, 0.0), sumsq(dim, 0.0);
  for (std::uint64_t b = 0; b < kBatches; ++b) {
    if (batch[b].sum.empty()) continue;
    for (std::size_t d = 0; d < dim; ++d) {
      sum[d] += batch[b].sum[d];
      sumsq[d] += batch[b].sumsq[d];
    }
  }
  const double ns = static_cast<double>(samples);
  for (std::size_t d = 0; d < dim; ++d) {
    // A constant sample stream averages to the constant, exactly.
    bool constant = true;
    double first = 0.0;
    bool have_first = false;
    for (std::uint64_t b = 0; b < kBatches && constant; ++b) {
      if (batch[b].count == 0) continue;
      if (!have_first) {
        first = batch[b].first[d];
        have_first = true;
      }
      constant = batch[b].constant[d] && batch[b].first[d] == first;
    }
    if (constant && have_first) {
      res.mean[d] = first;
      res.std_error[d] = 0.0;
      continue;
    }
    res.mean[d] = sum[d] / ns;
    if (samples > 1) {
      double var = (sumsq[d] - ns * res.mean[d] * res.mean[d]) / (ns - 1.0);
      if (var < 0.0) var = 0.0;  // rounding near zero variance
      res.std_error[d] = std::sqrt(var / ns);
    }
  }
  return res;
}

}  // namespace hotelling
