#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hotelling {

// Absolute tolerance for exact-formula comparisons. All quantities are O(1)
// on a unit segment, so a fixed absolute tolerance is adequate.
inline constexpr double kExactTol = 1e-12;

enum class Errc {
  OutOfSegment,
  TripleOverlap,
  NotApplicable,
  NoEquilibrium,
  ParamOutOfRange,
  CutOnServer,
  TooManyServers,
  Unsupported,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

struct Segment {
  double a = 0.0;
  double b = 1.0;
  double length() const { return b - a; }
  double midpoint() const { return 0.5 * (a + b); }
  bool contains(double x) const { return x >= a && x <= b; }
};

inline constexpr Segment kUnitSegment{0.0, 1.0};

using Positions = std::vector<double>;
using PayoffVector = std::vector<double>;

// Server positions in market order (non-decreasing). Index order equals
// left-to-right order; of servers sharing a coordinate, the lower index is
// the left member. Equilibrium machinery requires at most two servers per
// coordinate (validate() enforces this). Payoff evaluation itself stays well
// defined for any multiplicity, as the limit of vanishing pair separation;
// that limit is what the deviation search uses near occupied coordinates.
struct Config {
  Positions x;
  int n() const { return static_cast<int>(x.size()); }
  std::span<const double> span() const { return {x.data(), x.size()}; }
};

// Sorts without invariant checks. Used where co-location limits are wanted.
Config ordered(Positions raw);

// Canonical configuration: sorted, inside the segment, multiplicity <= 2.
// Throws OutOfSegment / TripleOverlap.
Config validate(Positions raw, const Segment& seg);

struct RoleTags {
  std::vector<bool> peripheral;
  std::vector<bool> paired;
};
RoleTags roles(const Config& cfg);

struct Markets {
  std::vector<double> left;
  std::vector<double> right;
  PayoffVector payoffs() const;
};

// Payoff of server i in the ordered profile xs on seg (no-failure game).
double classic_payoff_at(std::span<const double> xs, std::size_t i,
                         const Segment& seg);

Markets classic_markets(const Config& cfg, const Segment& seg);
PayoffVector classic_payoffs(const Config& cfg, const Segment& seg);

struct ConditionViolation {
  int i = -1;
  int j = -1;
  std::string what;
};

// Shared report shape for the classic pairing/half-market conditions and the
// line-failure conditions (which add a third clause).
struct ConditionReport {
  bool cond1 = false;  // peripheral pairing (plus equal hinterlands for LF)
  bool cond2 = false;  // whole-market lower bound
  bool cond3 = true;   // half-market upper bound (LF only)
  bool equilibrium = false;
  std::vector<ConditionViolation> violations;
};

// Eaton-Lipsey conditions; the conjunction is the equilibrium verdict for
// n >= 2. Throws NotApplicable for n == 1 (every position is an equilibrium).
ConditionReport el_check(const Config& cfg, const Segment& seg);

// Known equilibria of the no-failure game, rescaled to seg.
// n in {1,2,4,5}: family_param ignored. n == 6: family_param is the
// hinterland x, valid on [1/8, 1/6). n == 3: NoEquilibrium. n >= 7 has
// infinitely many equilibria but no canonical representative here; use
// el_check on explicit configurations instead (Unsupported).
Config classic_equilibrium(int n, const Segment& seg,
                           std::optional<double> family_param = std::nullopt);

}  // namespace hotelling
