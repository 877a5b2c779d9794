#pragma once

#include <map>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "hotelling/core.hpp"
#include "hotelling/line_failure.hpp"
#include "hotelling/player_failure.hpp"

namespace hotelling {

// Improvement threshold separating real deviations from the vanishing-gap
// artifacts of the co-located pair representation.
inline constexpr double kDefaultDelta = 1e-9;
inline constexpr double kDefaultQuantum = 1e-6;

struct Classic {
  Segment seg{0.0, 1.0};
};
struct LineFailure {
  double r = 0.0;
};
struct PlayerFailure {
  double r = 0.0;
};
using GameVariant = std::variant<Classic, LineFailure, PlayerFailure>;

Segment variant_segment(const GameVariant& v);
double variant_payoff_at(std::span<const double> xs, std::size_t i,
                         const GameVariant& v);
PayoffVector variant_payoffs(const Config& cfg, const GameVariant& v);

enum class CandidateKind {
  AttachLeft,    // at an occupied coordinate, left of its occupants
  AttachRight,   // right of its occupants
  SlotInterior,  // sample inside an open slot between occupied coordinates
  HinterlandOptimum,  // line-failure hinterland vertex, clipped to pairing
};

// Candidate deviations for one player. Per-slot payoffs are constant
// (classic, line-failure interiors) or affine (player-failure), and the
// line-failure hinterlands are quadratics with a known vertex, so this finite
// set attains the supremum over all positions. Attach candidates at a
// coordinate already holding a pair are evaluated in the vanishing-separation
// limit and cannot be realized as an exact configuration (realizable=false).
struct DeviationCandidate {
  CandidateKind kind;
  double position = 0.0;
  int target = -1;  // index within the other servers, for attach kinds
  bool realizable = true;
};

std::vector<DeviationCandidate> candidate_set(int player, const Config& cfg,
                                              const GameVariant& v);

struct BestResponse {
  double position = 0.0;
  double payoff = 0.0;
  double gain = 0.0;
  CandidateKind kind = CandidateKind::SlotInterior;
  bool realizable = true;
};

// Argmax over the candidate set; ties resolve to the smallest position.
BestResponse best_response(int player, const Config& cfg, const GameVariant& v);

struct DeviationWitness {
  int player = -1;
  double from = 0.0;
  double to = 0.0;
  double gain = 0.0;
};

struct NashReport {
  bool equilibrium = false;
  double delta = kDefaultDelta;
  std::vector<DeviationWitness> witnesses;  // every player with gain > delta
};

NashReport is_nash(const Config& cfg, const GameVariant& v,
                   double delta = kDefaultDelta);

// Early-exit variants used by grid scans.
bool is_equilibrium(const Config& cfg, const GameVariant& v,
                    double delta = kDefaultDelta);
std::optional<DeviationWitness> find_profitable_deviation(
    const Config& cfg, const GameVariant& v, double delta = kDefaultDelta);

enum class ScheduleOrder { RoundRobin, LargestGain };
enum class Outcome { Equilibrium, Cycle, BudgetExhausted };

struct TraceStep {
  int player = -1;  // stable id, not market position
  double from = 0.0;
  double to = 0.0;
  double gain = 0.0;
};

struct DynamicsTrace {
  std::vector<TraceStep> steps;
  Outcome outcome = Outcome::BudgetExhausted;
  int cycle_period = 0;
  std::size_t distinct_states = 0;
  Positions final_positions;  // market order
};

// Best-response iteration. Moves land exactly on their target; the two
// moves that have no exact representation (leapfrogging a pair partner,
// attaching next to a full pair) are realized at `quantum` offset, matching
// the minimal-separation reading of those moves. Cycle detection keys on the
// quantized positions together with the id order and the scheduling pointer.
// With delta below ~2x quantum, an off-grid equilibrium shows up as a small
// cycle around it rather than as termination.
DynamicsTrace br_dynamics(const Config& start, const GameVariant& v,
                          ScheduleOrder order, int max_iters,
                          double quantum = kDefaultQuantum,
                          double delta = kDefaultDelta);

struct GridBest {
  double position = 0.0;
  double payoff = 0.0;
};

// Brute-force argmax over a uniform grid of deviation positions, skipping
// placements that would exceed two servers per coordinate. Test oracle for
// candidate-set completeness.
GridBest grid_best_response_oracle(int player, const Config& cfg,
                                   const GameVariant& v, int resolution);

}  // namespace hotelling
