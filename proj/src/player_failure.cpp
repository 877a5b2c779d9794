#include "hotelling/player_failure.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hotelling {

namespace {

void require_probability(double r, bool strict) {
  const bool ok = strict ? (r > 0.0 && r < 1.0) : (r >= 0.0 && r <= 1.0);
  if (!ok) {
    std::ostringstream os;
    os << "crash probability r = " << r << " outside "
       << (strict ? "(0, 1)" : "[0, 1]");
    throw Error(Errc::ParamOutOfRange, os.str());
  }
}

std::vector<double> power_table(double r, int n) {
  std::vector<double> pw(n + 1);
  pw[0] = 1.0;
  for (int k = 1; k <= n; ++k) pw[k] = pw[k - 1] * r;
  return pw;
}

}  // namespace

PayoffVector pf_payoffs_exact(const Config& cfg, double r) {
  require_probability(r, false);
  const int n = cfg.n();
  if (n > 20) {
    throw Error(Errc::TooManyServers,
                "subset enumeration bounded to n <= 20; use Monte Carlo");
  }
  const auto pw_r = power_table(r, n);
  const auto pw_a = power_table(1.0 - r, n);

  PayoffVector out(n, 0.0);
  const int m = n - 1;
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    // Bit b of the mask marks the b-th other server (in market order) as
    // crashed.
    for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
      const int crashed = __builtin_popcount(mask);
      const double w = pw_r[crashed] * pw_a[m - crashed];

      auto alive = [&](int j) {  // j indexes the full configuration
        const int bit = j < i ? j : j - 1;
        return (mask >> bit & 1u) == 0u;
      };
      int lo = i - 1;
      while (lo >= 0 && !alive(lo)) --lo;
      int hi = i + 1;
      while (hi < n && !alive(hi)) ++hi;

      const double left =
          lo >= 0 ? 0.5 * (cfg.x[i] - cfg.x[lo]) : cfg.x[i];
      const double right =
          hi < n ? 0.5 * (cfg.x[hi] - cfg.x[i]) : 1.0 - cfg.x[i];
      acc += w * (left + right);
    }
    out[i] = (1.0 - r) * acc;
  }
  return out;
}

double pf_payoff_at(std::span<const double> xs, std::size_t i, double r) {
  const std::size_t n = xs.size();
  const double alive = 1.0 - r;
  double left = 0.0;
  double pr = 1.0;  // r^(number of crashed servers between i and the neighbor)
  for (std::size_t j = i; j-- > 0;) {
    left += alive * pr * 0.5 * (xs[i] - xs[j]);
    pr *= r;
  }
  left += pr * xs[i];  // pr = r^i: nobody below survived
  double right = 0.0;
  pr = 1.0;
  for (std::size_t k = i + 1; k < n; ++k) {
    right += alive * pr * 0.5 * (xs[k] - xs[i]);
    pr *= r;
  }
  right += pr * (1.0 - xs[i]);  // pr = r^(n-1-i)
  return alive * (left + right);
}

PayoffVector pf_payoffs(const Config& cfg, double r) {
  require_probability(r, false);
  PayoffVector p(cfg.n());
  for (int i = 0; i < cfg.n(); ++i) p[i] = pf_payoff_at(cfg.span(), i, r);
  return p;
}

McResult pf_payoffs_montecarlo(const Config& cfg, double r,
                               std::uint64_t samples, std::uint64_t seed) {
  require_probability(r, false);
  if (samples < 1) {
    throw Error(Errc::ParamOutOfRange, "need at least one sample");
  }
  const std::size_t n = cfg.x.size();
  if (n > kDrawsPerSample) {
    throw Error(Errc::TooManyServers, "sample stride exhausted");
  }
  const CounterRng rng(seed);
  const Config& c = cfg;

  return mc_accumulate(n, samples, [&](std::uint64_t s, std::span<double> out) {
    const std::uint64_t ctr = s * kDrawsPerSample;
    std::fill(out.begin(), out.end(), 0.0);
    // Survivors keep their market order.
    double survivors[kDrawsPerSample];
    std::size_t index[kDrawsPerSample];
    std::size_t k = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (rng.uniform(ctr + j) >= r) {
        survivors[k] = c.x[j];
        index[k] = j;
        ++k;
      }
    }
    std::span<const double> xs(survivors, k);
    for (std::size_t j = 0; j < k; ++j) {
      out[index[j]] = classic_payoff_at(xs, j, kUnitSegment);
    }
  });
}

double pf_three_server_gap(double r) {
  if (!(r > 0.0 && r <= 1.0)) {
    throw Error(Errc::ParamOutOfRange, "r must lie in (0, 1]");
  }
  const double peripheral = (1.0 - r) * (0.5 + 0.5 * r * r);
  const double interior = (1.0 - r) * r;
  return peripheral - interior;
}

double pf_pairing_gain(int n, double r, double x1, double x3) {
  if (n < 4) throw Error(Errc::ParamOutOfRange, "defined for n >= 4");
  require_probability(r, true);
  if (!(x3 > x1)) {
    throw Error(Errc::ParamOutOfRange, "requires x3 > x1");
  }
  // Exact scenario balance: s2 gains (x3-x1)/2 when s1 crashed and some right
  // neighbor survives, and loses the same amount when s1 survives and the
  // whole right flank crashed. The net weight is
  //   r (1 - r^(n-2)) - (1 - r) r^(n-2) = r - r^(n-2),
  // times the mover's own survival factor (1 - r).
  return (r - std::pow(r, n - 2)) * (1.0 - r) * 0.5 * (x3 - x1);
}

}  // namespace hotelling
