#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "hotelling/core.hpp"
#include "hotelling/rng.hpp"

namespace hotelling {

// Line-failure game on [0,1]: with probability r the line is cut at a point
// f drawn uniformly from (0,1); clients cannot cross the cut. Payoffs are
// expectations over the cut.

// Expected payoff of server i in the ordered profile xs. Closed form: interior
// half-markets keep their no-failure expected length, hinterlands of length x
// shrink to x - r x^2 / 2.
double lf_payoff_at(std::span<const double> xs, std::size_t i, double r);

PayoffVector lf_payoffs(const Config& cfg, double r);

// Payoffs when the line is cut at f: each side is an independent market;
// a side without servers is unserved. Throws CutOnServer if f coincides with
// a server coordinate (measure zero; caller must perturb).
PayoffVector lf_cut_scenario(const Config& cfg, double f);

// Exact integration oracle: the scenario payoff is piecewise linear in f with
// breakpoints at the distinct server coordinates, so each piece is integrated
// exactly from two interior samples. Independent of lf_payoffs.
PayoffVector lf_payoffs_quadrature(const Config& cfg, double r);

// Statistical oracle; deterministic for a given seed, parallel-safe.
McResult lf_payoffs_montecarlo(const Config& cfg, double r,
                               std::uint64_t samples, std::uint64_t seed);

// Payoff-maximizing position for a peripheral server left of a fixed
// neighbor: the hinterland optimum 1/(2r), clipped to pairing.
double lf_best_hinterland(double neighbor_x, double r);
double lf_best_hinterland_right(double neighbor_x, double r);

// Equilibria of the line-failure game for 0 < r < 1.
// n=1 -> (1/2); n=2 -> pair at 1/2; n=3 -> NoEquilibrium;
// n=4 -> pairs at x and 1-x with r x^2 - 4x + 1 = 0;
// n=5 -> pairs at x, 1-x and an isolated server at 1/2 where x solves
//        1/2 - x = 2 (x - r x^2 / 2);
// n>=6 -> symmetric family member for hinterland family_param, validated by
//         lf_condition_check (ParamOutOfRange when it fails).
Config lf_equilibrium(int n, double r,
                      std::optional<double> family_param = std::nullopt);

// Equilibrium conditions for n >= 2:
//  (1) peripheral servers paired and equidistant from their boundaries (x);
//  (2) no interior server's whole market smaller than x - r x^2 / 2;
//  (3) no interior server's half-market larger than x - r x^2 / 2.
ConditionReport lf_condition_check(const Config& cfg, double r);

// The shrunken segment on which the no-failure game reproduces line-failure
// payoffs coordinate for coordinate.
Segment lf_equiv_segment(const Config& cfg, double r);

// Feasible hinterland range [min, max] of the symmetric six-server family.
std::pair<double, double> lf_six_family_bounds(double r);

// Scenario table for a unilateral move to y in the four-server equilibrium:
// rows list cut ranges with probability mass and the conditional expected
// payoffs of the incumbent and of the deviator.
struct ScenarioRow {
  bool no_failure = false;
  double f_lo = 0.0;
  double f_hi = 0.0;
  double prob = 0.0;
  double incumbent = 0.0;
  double deviator = 0.0;
};

struct ScenarioTable {
  double r = 0.0;
  double x = 0.0;  // equilibrium hinterland for this r
  double y = 0.0;  // deviation target
  bool deviator_in_hinterland = false;  // y < x
  std::vector<ScenarioRow> rows;
  double expected_incumbent = 0.0;
  double expected_deviator = 0.0;
  double difference() const { return expected_incumbent - expected_deviator; }
};

// Valid for y in [0, 1/2) excluding x itself (ParamOutOfRange otherwise).
ScenarioTable lf_appendix_tables(double r, double y);

}  // namespace hotelling
