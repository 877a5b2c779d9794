#include "hotelling/line_failure.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hotelling {

namespace {

void require_probability(double r, bool strict) {
  const bool ok = strict ? (r > 0.0 && r < 1.0) : (r >= 0.0 && r <= 1.0);
  if (!ok) {
    std::ostringstream os;
    os << "failure probability r = " << r << " outside "
       << (strict ? "(0, 1)" : "[0, 1]");
    throw Error(Errc::ParamOutOfRange, os.str());
  }
}

double hinterland_value(double x, double r) { return x - 0.5 * r * x * x; }

}  // namespace

double lf_payoff_at(std::span<const double> xs, std::size_t i, double r) {
  const std::size_t n = xs.size();
  const double left =
      (i == 0) ? hinterland_value(xs[0], r) : 0.5 * (xs[i] - xs[i - 1]);
  const double right = (i + 1 == n) ? hinterland_value(1.0 - xs[n - 1], r)
                                    : 0.5 * (xs[i + 1] - xs[i]);
  return left + right;
}

PayoffVector lf_payoffs(const Config& cfg, double r) {
  require_probability(r, false);
  PayoffVector p(cfg.n());
  for (int i = 0; i < cfg.n(); ++i) p[i] = lf_payoff_at(cfg.span(), i, r);
  return p;
}

PayoffVector lf_cut_scenario(const Config& cfg, double f) {
  if (!(f > 0.0 && f < 1.0)) {
    throw Error(Errc::ParamOutOfRange, "cut location must lie in (0, 1)");
  }
  const int n = cfg.n();
  for (double v : cfg.x) {
    if (v == f) {
      throw Error(Errc::CutOnServer, "cut coincides with a server coordinate");
    }
  }
  int k = 0;  // first server right of the cut
  while (k < n && cfg.x[k] < f) ++k;

  PayoffVector p(n, 0.0);
  if (k > 0) {
    const Segment left{0.0, f};
    std::span<const double> xs(cfg.x.data(), static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) p[i] = classic_payoff_at(xs, i, left);
  }
  if (k < n) {
    const Segment right{f, 1.0};
    std::span<const double> xs(cfg.x.data() + k,
                               static_cast<std::size_t>(n - k));
    for (int i = k; i < n; ++i) p[i] = classic_payoff_at(xs, i - k, right);
  }
  return p;
}

PayoffVector lf_payoffs_quadrature(const Config& cfg, double r) {
  require_probability(r, false);
  const int n = cfg.n();

  std::vector<double> cuts;
  cuts.push_back(0.0);
  for (double v : cfg.x) {
    if (cuts.back() != v) cuts.push_back(v);
  }
  if (cuts.back() != 1.0) cuts.push_back(1.0);

  PayoffVector integral(n, 0.0);
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double lo = cuts[k];
    const double hi = cuts[k + 1];
    const double w = hi - lo;
    if (w <= 0.0) continue;
    // Scenario payoffs are linear in f on the open piece, so the average of a
    // symmetric interior pair equals the endpoint average.
    const PayoffVector p1 = lf_cut_scenario(cfg, lo + 0.25 * w);
    const PayoffVector p2 = lf_cut_scenario(cfg, lo + 0.75 * w);
    for (int i = 0; i < n; ++i) integral[i] += w * 0.5 * (p1[i] + p2[i]);
  }

  const PayoffVector base = classic_payoffs(cfg, kUnitSegment);
  PayoffVector out(n);
  for (int i = 0; i < n; ++i) out[i] = (1.0 - r) * base[i] + r * integral[i];
  return out;
}

McResult lf_payoffs_montecarlo(const Config& cfg, double r,
                               std::uint64_t samples, std::uint64_t seed) {
  require_probability(r, false);
  if (samples < 1) {
    throw Error(Errc::ParamOutOfRange, "need at least one sample");
  }
  const int n = cfg.n();
  const PayoffVector base = classic_payoffs(cfg, kUnitSegment);
  const CounterRng rng(seed);
  const Config& c = cfg;

  return mc_accumulate(
      n, samples, [&](std::uint64_t s, std::span<double> out) {
        const std::uint64_t ctr = s * kDrawsPerSample;
        const bool cut = rng.uniform(ctr) < r;
        if (!cut) {
          std::copy(base.begin(), base.end(), out.begin());
          return;
        }
        double f = rng.uniform(ctr + 1);
        if (f <= 0.0) f = std::nextafter(0.0, 1.0);
        // Measure-zero collision with a coordinate: nudge deterministically.
        while (std::binary_search(c.x.begin(), c.x.end(), f)) {
          f = std::nextafter(f, f < 0.5 ? 1.0 : 0.0);
        }
        const PayoffVector p = lf_cut_scenario(c, f);
        std::copy(p.begin(), p.end(), out.begin());
      });
}

double lf_best_hinterland(double neighbor_x, double r) {
  require_probability(r, true);
  if (!(neighbor_x > 0.0 && neighbor_x <= 1.0)) {
    throw Error(Errc::ParamOutOfRange, "neighbor must lie in (0, 1]");
  }
  return std::min(0.5 / r, neighbor_x);
}

double lf_best_hinterland_right(double neighbor_x, double r) {
  require_probability(r, true);
  if (!(neighbor_x >= 0.0 && neighbor_x < 1.0)) {
    throw Error(Errc::ParamOutOfRange, "neighbor must lie in [0, 1)");
  }
  return std::max(1.0 - 0.5 / r, neighbor_x);
}

namespace {

// Root in (0, 1/2) of the five-server balance condition
// 1/2 - x = 2 (x - r x^2 / 2), solved numerically. Algebraically the root is
// 1 / (3 + sqrt(9 - 2r)); the bisection plus Newton polish keeps the
// constructor tied to the condition itself.
double five_server_hinterland(double r) {
  auto g = [r](double x) { return 0.5 - x - 2.0 * (x - 0.5 * r * x * x); };
  double lo = 0.0, hi = 0.5;
  for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 3; ++it) {
    const double dg = -3.0 + 2.0 * r * x;
    x -= g(x) / dg;
  }
  return x;
}

}  // namespace

std::pair<double, double> lf_six_family_bounds(double r) {
  // Lower endpoint: flank half-markets hit the hinterland value
  // (3 r x^2 - 8x + 1 = 0); upper endpoint: the two flanks meet at the center
  // (2 r x^2 - 6x + 1 = 0). Rationalized roots are stable as r -> 0.
  const double lo = 2.0 / (8.0 + std::sqrt(64.0 - 12.0 * r));
  const double hi = 1.0 / (3.0 + std::sqrt(9.0 - 2.0 * r));
  return {lo, hi};
}

Config lf_equilibrium(int n, double r, std::optional<double> family_param) {
  require_probability(r, true);
  switch (n) {
    case 1:
      return Config{{0.5}};
    case 2:
      return Config{{0.5, 0.5}};
    case 3:
      throw Error(Errc::NoEquilibrium,
                  "no three-server equilibrium exists under line failures");
    case 4: {
      // Root in (0,1) of r x^2 - 4x + 1 = 0, written in its stable form.
      const double x = 1.0 / (2.0 + std::sqrt(4.0 - r));
      return Config{{x, x, 1.0 - x, 1.0 - x}};
    }
    case 5: {
      const double x = five_server_hinterland(r);
      return Config{{x, x, 0.5, 1.0 - x, 1.0 - x}};
    }
    default:
      break;
  }
  if (n < 1) throw Error(Errc::ParamOutOfRange, "need at least one server");
  if (!family_param) {
    throw Error(Errc::ParamOutOfRange,
                "families with n >= 6 need the hinterland parameter");
  }
  const double x = *family_param;
  if (!(x > 0.0 && x < 0.5)) {
    throw Error(Errc::ParamOutOfRange, "hinterland must lie in (0, 1/2)");
  }
  const double h = hinterland_value(x, r);
  const int m = n - 4;  // servers strictly between the peripheral pairs
  Positions pos(n);
  pos[0] = pos[1] = x;
  pos[n - 2] = pos[n - 1] = 1.0 - x;
  const double inner_lo = x + 2.0 * h;
  const double inner_hi = 1.0 - x - 2.0 * h;
  if (inner_hi < inner_lo - kExactTol) {
    throw Error(Errc::ParamOutOfRange,
                "hinterland too large: flank positions cross");
  }
  for (int k = 0; k < m; ++k) {
    const double t = (m == 1) ? 0.5 : static_cast<double>(k) / (m - 1);
    pos[2 + k] = inner_lo + t * (inner_hi - inner_lo);
  }
  Config cfg;
  try {
    cfg = validate(std::move(pos), kUnitSegment);
  } catch (const Error&) {
    throw Error(Errc::ParamOutOfRange,
                "hinterland parameter yields a degenerate interior");
  }
  const ConditionReport rep = lf_condition_check(cfg, r);
  if (!rep.equilibrium) {
    throw Error(Errc::ParamOutOfRange,
                "hinterland parameter fails the equilibrium conditions");
  }
  return cfg;
}

ConditionReport lf_condition_check(const Config& cfg, double r) {
  require_probability(r, true);
  const int n = cfg.n();
  if (n < 2) {
    throw Error(Errc::NotApplicable,
                "single-server game: the unique optimum sits at 1/2");
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
  const double x_left = cfg.x[0];
  const double x_right = 1.0 - cfg.x[n - 1];
  if (std::abs(x_left - x_right) > kExactTol) {
    rep.cond1 = false;
    rep.violations.push_back({0, n - 1, "hinterlands differ in length"});
  }

  const double h = hinterland_value(x_left, r);
  const Markets m = classic_markets(cfg, kUnitSegment);
  rep.cond2 = true;
  rep.cond3 = true;
  for (int i = 1; i + 1 < n; ++i) {
    const double whole = m.left[i] + m.right[i];
    const double half = std::max(m.left[i], m.right[i]);
    if (whole < h - kExactTol) {
      rep.cond2 = false;
      std::ostringstream os;
      os << "interior server " << i << " whole market " << whole
         << " below hinterland value " << h;
      rep.violations.push_back({i, -1, os.str()});
    }
    if (half > h + kExactTol) {
      rep.cond3 = false;
      std::ostringstream os;
      os << "interior server " << i << " half-market " << half
         << " above hinterland value " << h;
      rep.violations.push_back({i, -1, os.str()});
    }
  }
  rep.equilibrium = rep.cond1 && rep.cond2 && rep.cond3;
  return rep;
}

Segment lf_equiv_segment(const Config& cfg, double r) {
  require_probability(r, false);
  const double x1 = cfg.x.front();
  const double xn = cfg.x.back();
  return Segment{0.5 * r * x1 * x1, 1.0 - 0.5 * r * (1.0 - xn) * (1.0 - xn)};
}

ScenarioTable lf_appendix_tables(double r, double y) {
  require_probability(r, true);
  const Config eq = lf_equilibrium(4, r);
  const double x = eq.x[0];
  if (!(y >= 0.0 && y < 0.5) || y == x) {
    throw Error(Errc::ParamOutOfRange,
                "deviation target must lie in [0, 1/2) away from x");
  }

  ScenarioTable t;
  t.r = r;
  t.x = x;
  t.y = y;
  t.deviator_in_hinterland = y < x;
  if (y < x) {
    // Deviator enters the hinterland; compare with the server left at x.
    t.rows = {
        {true, 0.0, 0.0, 1.0 - r, x, 0.5 * (x + y)},
        {false, 0.0, y, r * y, x - 0.5 * y, 0.5 * x},
        {false, y, x, r * (x - y), 0.5 * (x - y), 0.5 * (x + y)},
        {false, x, 1.0, r * (1.0 - x), x, 0.5 * (x + y)},
    };
  } else {
    // Deviator moves between the pairs; compare with an inner pair member.
    t.rows = {
        {true, 0.0, 0.0, 1.0 - r, 0.5 - x, 0.5 - x},
        {false, 0.0, x, r * x, 0.5 - x, 0.5 - x},
        {false, x, y, r * (y - x), 0.5 * (y - x), 0.5 - x},
        {false, y, 1.0 - x, r * (1.0 - x - y), 0.5 * (1.0 + y - 3.0 * x),
         0.5 - x},
        {false, 1.0 - x, 1.0, r * x, 0.5 - x, 0.5 - x},
    };
  }
  for (const ScenarioRow& row : t.rows) {
    t.expected_incumbent += row.prob * row.incumbent;
    t.expected_deviator += row.prob * row.deviator;
  }
  return t;
}

}  // namespace hotelling
