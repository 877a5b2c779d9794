#include "hotelling/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hotelling {

Config ordered(Positions raw) {
  std::sort(raw.begin(), raw.end());
  return Config{std::move(raw)};
}

Config validate(Positions raw, const Segment& seg) {
  if (raw.empty()) {
    throw Error(Errc::ParamOutOfRange, "configuration needs at least one server");
  }
  if (!(seg.a < seg.b)) {
    throw Error(Errc::ParamOutOfRange, "segment endpoints must satisfy a < b");
  }
  std::sort(raw.begin(), raw.end());
  for (double v : raw) {
    if (!(v >= seg.a && v <= seg.b)) {
      std::ostringstream os;
      os << "position " << v << " outside [" << seg.a << ", " << seg.b << "]";
      throw Error(Errc::OutOfSegment, os.str());
    }
  }
  for (std::size_t i = 2; i < raw.size(); ++i) {
    if (raw[i] == raw[i - 2]) {
      std::ostringstream os;
      os << "three or more servers share coordinate " << raw[i];
      throw Error(Errc::TripleOverlap, os.str());
    }
  }
  return Config{std::move(raw)};
}

RoleTags roles(const Config& cfg) {
  const int n = cfg.n();
  RoleTags tags;
  tags.peripheral.assign(n, false);
  tags.paired.assign(n, false);
  tags.peripheral[0] = true;
  tags.peripheral[n - 1] = true;
  for (int i = 0; i < n; ++i) {
    const bool left = i > 0 && cfg.x[i] == cfg.x[i - 1];
    const bool right = i + 1 < n && cfg.x[i] == cfg.x[i + 1];
    tags.paired[i] = left || right;
  }
  return tags;
}

PayoffVector Markets::payoffs() const {
  PayoffVector p(left.size());
  for (std::size_t i = 0; i < left.size(); ++i) p[i] = left[i] + right[i];
  return p;
}

double classic_payoff_at(std::span<const double> xs, std::size_t i,
                         const Segment& seg) {
  const std::size_t n = xs.size();
  const double left = (i == 0) ? xs[0] - seg.a : 0.5 * (xs[i] - xs[i - 1]);
  const double right =
      (i + 1 == n) ? seg.b - xs[n - 1] : 0.5 * (xs[i + 1] - xs[i]);
  return left + right;
}

Markets classic_markets(const Config& cfg, const Segment& seg) {
  const int n = cfg.n();
  Markets m;
  m.left.resize(n);
  m.right.resize(n);
  for (int i = 0; i < n; ++i) {
    // Clients equidistant between isolated servers are assigned to the left
    // market; measure zero, so lengths are unaffected.
    m.left[i] = (i == 0) ? cfg.x[0] - seg.a : 0.5 * (cfg.x[i] - cfg.x[i - 1]);
    m.right[i] =
        (i + 1 == n) ? seg.b - cfg.x[n - 1] : 0.5 * (cfg.x[i + 1] - cfg.x[i]);
  }
  return m;
}

PayoffVector classic_payoffs(const Config& cfg, const Segment& seg) {
  return classic_markets(cfg, seg).payoffs();
}

ConditionReport el_check(const Config& cfg, const Segment& seg) {
  const int n = cfg.n();
  if (n < 2) {
    throw Error(Errc::NotApplicable,
                "single-server game: every position is an equilibrium");
  }
  ConditionReport rep;
  rep.cond1 = true;
  if (cfg.x[0] != cfg.x[1]) {
    rep.cond1 = false;
    rep.violations.push_back({0, 1, "left peripheral server unpaired"});
  }
  if (cfg.x[n - 1] != cfg.x[n - 2]) {
    rep.cond1 = false;
    rep.violations.push_back({n - 2, n - 1, "right peripheral server unpaired"});
  }

  const Markets m = classic_markets(cfg, seg);
  const PayoffVector p = m.payoffs();
  rep.cond2 = true;
  for (int j = 0; j < n; ++j) {
    const double half = std::max(m.left[j], m.right[j]);
    for (int i = 0; i < n; ++i) {
      if (i == j) continue;
      if (p[i] < half - kExactTol) {
        rep.cond2 = false;
        std::ostringstream os;
        os << "whole market of server " << i << " (" << p[i]
           << ") smaller than a half-market of server " << j << " (" << half
           << ")";
        rep.violations.push_back({i, j, os.str()});
      }
    }
  }
  rep.cond3 = true;
  rep.equilibrium = rep.cond1 && rep.cond2;
  return rep;
}

Config classic_equilibrium(int n, const Segment& seg,
                           std::optional<double> family_param) {
  const double a = seg.a;
  const double len = seg.length();
  auto at = [&](double u) { return a + len * u; };
  switch (n) {
    case 1:
      // Any position works; the midpoint is the canonical representative.
      return Config{{at(0.5)}};
    case 2:
      return Config{{at(0.5), at(0.5)}};
    case 3:
      throw Error(Errc::NoEquilibrium, "no three-server equilibrium exists");
    case 4:
      return Config{{at(0.25), at(0.25), at(0.75), at(0.75)}};
    case 5:
      return Config{{at(1.0 / 6), at(1.0 / 6), at(0.5), at(5.0 / 6), at(5.0 / 6)}};
    case 6: {
      if (!family_param) {
        throw Error(Errc::ParamOutOfRange,
                    "six-server family needs the hinterland parameter");
      }
      const double x = *family_param;
      if (!(x >= 0.125 && x < 1.0 / 6)) {
        throw Error(Errc::ParamOutOfRange,
                    "six-server hinterland must lie in [1/8, 1/6)");
      }
      return Config{{at(x), at(x), at(3 * x), at(1 - 3 * x), at(1 - x), at(1 - x)}};
    }
    default:
      if (n < 1) throw Error(Errc::ParamOutOfRange, "need at least one server");
      throw Error(Errc::Unsupported,
                  "no canonical representative for n >= 7; verify explicit "
                  "configurations with el_check");
  }
}

}  // namespace hotelling
