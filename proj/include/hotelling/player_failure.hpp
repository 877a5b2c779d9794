#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hotelling/core.hpp"
#include "hotelling/rng.hpp"

namespace hotelling {

// Player-failure game on [0,1]: each server crashes independently with
// probability r; survivors re-partition the whole line. A crashed pair
// member's survivor inherits the full neighborhood.

// Expected payoff by enumeration over crash subsets of the other servers.
// Exact; bounded to n <= 20 (TooManyServers beyond; use Monte Carlo).
PayoffVector pf_payoffs_exact(const Config& cfg, double r);

// Same expectation through the nearest-surviving-neighbor factorization:
// P(nearest survivor below i is j) = (1-r) r^(i-j-1). O(n) per server; used
// by the deviation search and cross-checked against the enumeration.
double pf_payoff_at(std::span<const double> xs, std::size_t i, double r);

PayoffVector pf_payoffs(const Config& cfg, double r);  // via pf_payoff_at

// Statistical oracle; deterministic for a given seed, parallel-safe.
McResult pf_payoffs_montecarlo(const Config& cfg, double r,
                               std::uint64_t samples, std::uint64_t seed);

// Payoff gap p(s1) - p(s2) in the three-server center cluster (pair plus
// inner neighbor at 1/2). Equals (1-r)^3 / 2; zero only at r = 1, which is
// why no three-server equilibrium exists.
double pf_three_server_gap(double r);

// Expected gain of the second-leftmost server from re-pairing with its right
// neighbor at x3 instead of the peripheral at x1, in an n-server game:
//   (r - r^(n-2)) (1-r) (x3 - x1) / 2.
// Strictly positive for 0 < r < 1, n >= 4, x3 > x1, which rules out
// equilibria with a paired peripheral.
double pf_pairing_gain(int n, double r, double x1, double x3);

struct ProbeWitness {
  Positions config;
  int player = -1;
  double deviation = 0.0;
  double gain = 0.0;
};

struct ProbeReport {
  int n = 0;
  double r = 0.0;
  int resolution = 0;
  std::uint64_t configs_scanned = 0;
  std::vector<Positions> equilibria;   // grid configurations with no witness
  double min_witness_gain = 0.0;       // weakest deviation bound observed
  ProbeWitness weakest;                // the configuration attaining it
  std::vector<ProbeWitness> sample_witnesses;  // capped sample for reporting
};

// Scans every grid configuration (positions k/resolution, multiplicity <= 2,
// up to left-right reflection) and records a profitable deviation for each.
ProbeReport pf_nonexistence_probe(int n, double r, int resolution);

}  // namespace hotelling
