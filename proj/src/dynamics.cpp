#include "hotelling/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace hotelling {

Segment variant_segment(const GameVariant& v) {
  if (const auto* c = std::get_if<Classic>(&v)) return c->seg;
  return kUnitSegment;
}

double variant_payoff_at(std::span<const double> xs, std::size_t i,
                         const GameVariant& v) {
  if (const auto* c = std::get_if<Classic>(&v)) {
    return classic_payoff_at(xs, i, c->seg);
  }
  if (const auto* lf = std::get_if<LineFailure>(&v)) {
    return lf_payoff_at(xs, i, lf->r);
  }
  return pf_payoff_at(xs, i, std::get<PlayerFailure>(v).r);
}

PayoffVector variant_payoffs(const Config& cfg, const GameVariant& v) {
  PayoffVector p(cfg.n());
  for (int i = 0; i < cfg.n(); ++i) p[i] = variant_payoff_at(cfg.span(), i, v);
  return p;
}

namespace {

struct Scratch {
  std::vector<double> others;
  std::vector<double> merged;
  std::vector<DeviationCandidate> candidates;
};

void fill_others(std::span<const double> xs, std::size_t player,
                 std::vector<double>& others) {
  others.clear();
  others.reserve(xs.size() - 1);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i != player) others.push_back(xs[i]);
  }
}

// Inserts pos into the sorted list; left_of_equals puts the deviator left of
// any occupants of the same coordinate. Returns the deviator's index.
std::size_t insert_merged(const std::vector<double>& others, double pos,
                          bool left_of_equals, std::vector<double>& merged) {
  const auto it = left_of_equals
                      ? std::lower_bound(others.begin(), others.end(), pos)
                      : std::upper_bound(others.begin(), others.end(), pos);
  const std::size_t idx = static_cast<std::size_t>(it - others.begin());
  merged.clear();
  merged.reserve(others.size() + 1);
  merged.insert(merged.end(), others.begin(), it);
  merged.push_back(pos);
  merged.insert(merged.end(), it, others.end());
  return idx;
}

double eval_deviation(Scratch& sc, double pos, bool left_of_equals,
                      const GameVariant& v) {
  const std::size_t idx = insert_merged(sc.others, pos, left_of_equals, sc.merged);
  return variant_payoff_at(std::span<const double>(sc.merged), idx, v);
}

bool attach_side_is_left(CandidateKind k, double pos, double coord_front,
                         double coord_back) {
  switch (k) {
    case CandidateKind::AttachLeft:
      return true;
    case CandidateKind::AttachRight:
      return false;
    case CandidateKind::HinterlandOptimum:
      // Clipped onto the nearest coordinate: approach from the hinterland.
      if (pos == coord_front) return true;
      if (pos == coord_back) return false;
      return true;  // interior vertex, side irrelevant
    default:
      return true;  // slot interiors never coincide with a coordinate
  }
}

void build_candidates(const std::vector<double>& others, const GameVariant& v,
                      std::vector<DeviationCandidate>& out) {
  out.clear();
  const Segment seg = variant_segment(v);
  if (others.empty()) {
    out.push_back({CandidateKind::SlotInterior, seg.midpoint(), -1, true});
    return;
  }

  // Attach candidates per distinct occupied coordinate.
  for (std::size_t i = 0; i < others.size();) {
    std::size_t j = i;
    while (j < others.size() && others[j] == others[i]) ++j;
    const bool pairable = (j - i) < 2;
    out.push_back({CandidateKind::AttachLeft, others[i],
                   static_cast<int>(i), pairable});
    out.push_back({CandidateKind::AttachRight, others[i],
                   static_cast<int>(j - 1), pairable});
    i = j;
  }

  // One interior sample per open slot, hinterlands included.
  double prev = seg.a;
  for (std::size_t i = 0; i < others.size(); ++i) {
    if (others[i] > prev) {
      out.push_back(
          {CandidateKind::SlotInterior, 0.5 * (prev + others[i]), -1, true});
    }
    prev = std::max(prev, others[i]);
  }
  if (seg.b > prev) {
    out.push_back({CandidateKind::SlotInterior, 0.5 * (prev + seg.b), -1, true});
  }

  // Line-failure hinterland optima, clipped to pairing with the peripheral.
  if (const auto* lf = std::get_if<LineFailure>(&v); lf && lf->r > 0.0) {
    const double front = others.front();
    const double back = others.back();
    const double vleft = std::min(0.5 / lf->r, front);
    const double vright = std::max(1.0 - 0.5 / lf->r, back);
    const bool front_pairable = others.size() < 2 || others[1] != front;
    const bool back_pairable =
        others.size() < 2 || others[others.size() - 2] != back;
    out.push_back({CandidateKind::HinterlandOptimum, vleft, -1,
                   vleft < front ? true : front_pairable});
    out.push_back({CandidateKind::HinterlandOptimum, vright, -1,
                   vright > back ? true : back_pairable});
  }
}

struct EvaluatedCandidate {
  double payoff = 0.0;
  DeviationCandidate cand;
};

// Evaluates the full candidate list, sorted best-first with deterministic
// tie-breaking (higher payoff, then smaller position, then generation order).
void evaluate_candidates(Scratch& sc, const GameVariant& v,
                         std::vector<EvaluatedCandidate>& evals) {
  build_candidates(sc.others, v, sc.candidates);
  const double front = sc.others.empty() ? 0.0 : sc.others.front();
  const double back = sc.others.empty() ? 0.0 : sc.others.back();
  evals.clear();
  evals.reserve(sc.candidates.size());
  for (const DeviationCandidate& c : sc.candidates) {
    const bool left = attach_side_is_left(c.kind, c.position, front, back);
    evals.push_back({eval_deviation(sc, c.position, left, v), c});
  }
  std::stable_sort(evals.begin(), evals.end(),
                   [](const EvaluatedCandidate& a, const EvaluatedCandidate& b) {
                     if (a.payoff != b.payoff) return a.payoff > b.payoff;
                     return a.cand.position < b.cand.position;
                   });
}

BestResponse best_response_impl(std::size_t player, std::span<const double> xs,
                                const GameVariant& v, Scratch& sc,
                                std::vector<EvaluatedCandidate>& evals) {
  const double current = variant_payoff_at(xs, player, v);
  fill_others(xs, player, sc.others);
  evaluate_candidates(sc, v, evals);
  const EvaluatedCandidate& top = evals.front();
  return BestResponse{top.cand.position, top.payoff, top.payoff - current,
                      top.cand.kind, top.cand.realizable};
}

}  // namespace

std::vector<DeviationCandidate> candidate_set(int player, const Config& cfg,
                                              const GameVariant& v) {
  Scratch sc;
  fill_others(cfg.span(), player, sc.others);
  std::vector<DeviationCandidate> out;
  build_candidates(sc.others, v, out);
  return out;
}

BestResponse best_response(int player, const Config& cfg, const GameVariant& v) {
  Scratch sc;
  std::vector<EvaluatedCandidate> evals;
  return best_response_impl(player, cfg.span(), v, sc, evals);
}

NashReport is_nash(const Config& cfg, const GameVariant& v, double delta) {
  NashReport rep;
  rep.delta = delta;
  Scratch sc;
  std::vector<EvaluatedCandidate> evals;
  for (int i = 0; i < cfg.n(); ++i) {
    const BestResponse br = best_response_impl(i, cfg.span(), v, sc, evals);
    if (br.gain > delta) {
      rep.witnesses.push_back({i, cfg.x[i], br.position, br.gain});
    }
  }
  rep.equilibrium = rep.witnesses.empty();
  return rep;
}

std::optional<DeviationWitness> find_profitable_deviation(const Config& cfg,
                                                          const GameVariant& v,
                                                          double delta) {
  Scratch sc;
  std::vector<EvaluatedCandidate> evals;
  for (int i = 0; i < cfg.n(); ++i) {
    const BestResponse br = best_response_impl(i, cfg.span(), v, sc, evals);
    if (br.gain > delta) {
      return DeviationWitness{i, cfg.x[i], br.position, br.gain};
    }
  }
  return std::nullopt;
}

bool is_equilibrium(const Config& cfg, const GameVariant& v, double delta) {
  return !find_profitable_deviation(cfg, v, delta).has_value();
}

// ===== best-response iteration =======================================

namespace {

struct OrderedState {
  std::vector<double> pos;  // market order
  std::vector<int> id;      // stable ids in market order

  std::size_t locate(int pid) const {
    for (std::size_t i = 0; i < id.size(); ++i) {
      if (id[i] == pid) return i;
    }
    return 0;  // unreachable for valid pids
  }
};

// Smallest representable step off an occupied coordinate into the adjacent
// gap. Returns NaN when there is no room.
double step_off(double coord, int dir, const std::vector<double>& others,
                const Segment& seg, double quantum) {
  double bound;
  if (dir > 0) {
    const auto it = std::upper_bound(others.begin(), others.end(), coord);
    bound = it == others.end() ? seg.b : *it;
    const double gap = bound - coord;
    if (gap <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    const double target = coord + quantum;
    if (it == others.end()) return std::min(target, seg.b);
    return target < bound ? target : coord + 0.5 * gap;
  }
  const auto it = std::lower_bound(others.begin(), others.end(), coord);
  bound = it == others.begin() ? seg.a : *(it - 1);
  const double gap = coord - bound;
  if (gap <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  const double target = coord - quantum;
  if (it == others.begin()) return std::max(target, seg.a);
  return target > bound ? target : coord - 0.5 * gap;
}

struct MoveAttempt {
  bool moved = false;
  bool blocked_above_delta = false;  // unrealizable improvement seen
  TraceStep step;
};

// Tries to execute the scheduled player's best realizable improvement.
MoveAttempt try_move(OrderedState& st, int pid, const GameVariant& v,
                     double quantum, double delta, Scratch& sc,
                     std::vector<EvaluatedCandidate>& evals) {
  MoveAttempt res;
  const Segment seg = variant_segment(v);
  const std::size_t mi = st.locate(pid);
  const double old_pos = st.pos[mi];
  std::span<const double> xs(st.pos.data(), st.pos.size());
  const double current = variant_payoff_at(xs, mi, v);

  fill_others(xs, mi, sc.others);
  evaluate_candidates(sc, v, evals);

  for (const EvaluatedCandidate& ec : evals) {
    if (ec.payoff - current <= delta) break;  // sorted: nothing better follows
    double target = ec.cand.position;
    bool left_side = attach_side_is_left(
        ec.cand.kind, target, sc.others.empty() ? 0.0 : sc.others.front(),
        sc.others.empty() ? 0.0 : sc.others.back());
    double realized_payoff = ec.payoff;

    const bool swap_in_place = target == old_pos;
    if (!ec.cand.realizable || swap_in_place) {
      // Leapfrogging a partner or attaching beside a full pair has no exact
      // representation; land one quantum into the adjacent gap.
      int dir;
      if (ec.cand.kind == CandidateKind::AttachRight) {
        dir = +1;
      } else if (ec.cand.kind == CandidateKind::AttachLeft) {
        dir = -1;
      } else {
        dir = target <= sc.others.front() ? -1 : +1;  // clipped hinterland
      }
      const double off = step_off(target, dir, sc.others, seg, quantum);
      if (std::isnan(off) || off == old_pos) {
        res.blocked_above_delta = true;
        continue;
      }
      target = off;
      left_side = true;
      realized_payoff = eval_deviation(sc, target, left_side, v);
      if (realized_payoff - current <= delta) {
        res.blocked_above_delta = true;
        continue;
      }
    }

    // Execute: remove the mover, reinsert at the target with its side order.
    st.pos.erase(st.pos.begin() + mi);
    st.id.erase(st.id.begin() + mi);
    const auto it = left_side
                        ? std::lower_bound(st.pos.begin(), st.pos.end(), target)
                        : std::upper_bound(st.pos.begin(), st.pos.end(), target);
    const std::size_t ni = static_cast<std::size_t>(it - st.pos.begin());
    st.pos.insert(st.pos.begin() + ni, target);
    st.id.insert(st.id.begin() + ni, pid);

    res.moved = true;
    res.step = TraceStep{pid, old_pos, target, realized_payoff - current};
    return res;
  }
  return res;
}

std::vector<std::int64_t> state_key(const OrderedState& st, int sched_token,
                                    double quantum) {
  std::vector<std::int64_t> key;
  key.reserve(1 + 2 * st.pos.size());
  key.push_back(sched_token);
  for (int v : st.id) key.push_back(v);
  for (double p : st.pos) key.push_back(std::llround(p / quantum));
  return key;
}

}  // namespace

DynamicsTrace br_dynamics(const Config& start, const GameVariant& v,
                          ScheduleOrder order, int max_iters, double quantum,
                          double delta) {
  if (max_iters < 1) {
    throw Error(Errc::ParamOutOfRange, "max_iters must be at least 1");
  }
  if (!(quantum > 0.0)) {
    throw Error(Errc::ParamOutOfRange, "quantum must be positive");
  }
  const int n = start.n();
  OrderedState st;
  st.pos = start.x;
  st.id.resize(n);
  for (int i = 0; i < n; ++i) st.id[i] = i;

  Scratch sc;
  std::vector<EvaluatedCandidate> evals;
  DynamicsTrace trace;
  std::map<std::vector<std::int64_t>, int> visited;

  int rr_next = 0;
  int moves = 0;
  visited.emplace(state_key(st, order == ScheduleOrder::RoundRobin ? 0 : -1,
                            quantum),
                  0);

  int idle = 0;
  bool idle_blocked = false;
  trace.outcome = Outcome::BudgetExhausted;

  while (moves < max_iters) {
    MoveAttempt attempt;
    if (order == ScheduleOrder::RoundRobin) {
      const int pid = rr_next;
      rr_next = (rr_next + 1) % n;
      attempt = try_move(st, pid, v, quantum, delta, sc, evals);
    } else {
      // Largest gain first: rank players by their limit best-response gain.
      std::vector<std::pair<double, int>> ranked;
      ranked.reserve(n);
      std::span<const double> xs(st.pos.data(), st.pos.size());
      for (int pid = 0; pid < n; ++pid) {
        const std::size_t mi = st.locate(pid);
        const BestResponse br = best_response_impl(mi, xs, v, sc, evals);
        ranked.emplace_back(br.gain, pid);
      }
      std::stable_sort(ranked.begin(), ranked.end(),
                       [](const auto& a, const auto& b) {
                         if (a.first != b.first) return a.first > b.first;
                         return a.second < b.second;
                       });
      bool any_blocked = false;
      for (const auto& [gain, pid] : ranked) {
        if (gain <= delta) break;
        attempt = try_move(st, pid, v, quantum, delta, sc, evals);
        if (attempt.moved) break;
        any_blocked = true;
      }
      if (!attempt.moved) {
        trace.outcome =
            any_blocked ? Outcome::BudgetExhausted : Outcome::Equilibrium;
        break;
      }
    }

    if (order == ScheduleOrder::RoundRobin && !attempt.moved) {
      idle_blocked = idle_blocked || attempt.blocked_above_delta;
      if (++idle >= n) {
        trace.outcome =
            idle_blocked ? Outcome::BudgetExhausted : Outcome::Equilibrium;
        break;
      }
      continue;
    }

    idle = 0;
    idle_blocked = false;
    ++moves;
    trace.steps.push_back(attempt.step);

    const auto key = state_key(
        st, order == ScheduleOrder::RoundRobin ? rr_next : -1, quantum);
    const auto [it, inserted] = visited.emplace(key, moves);
    if (!inserted) {
      trace.outcome = Outcome::Cycle;
      trace.cycle_period = moves - it->second;
      break;
    }
  }

  trace.distinct_states = visited.size();
  trace.final_positions = st.pos;
  return trace;
}

GridBest grid_best_response_oracle(int player, const Config& cfg,
                                   const GameVariant& v, int resolution) {
  if (resolution < 100) {
    throw Error(Errc::ParamOutOfRange, "oracle resolution must be >= 100");
  }
  const Segment seg = variant_segment(v);
  Scratch sc;
  fill_others(cfg.span(), player, sc.others);

  GridBest best{0.0, -1.0};
  for (int k = 0; k <= resolution; ++k) {
    const double y = seg.a + (seg.b - seg.a) * k / resolution;
    const auto lo = std::lower_bound(sc.others.begin(), sc.others.end(), y);
    const auto hi = std::upper_bound(sc.others.begin(), sc.others.end(), y);
    const auto mult = hi - lo;
    if (mult >= 2) continue;  // would exceed two servers per coordinate
    double payoff;
    if (mult == 1) {
      payoff = std::max(eval_deviation(sc, y, true, v),
                        eval_deviation(sc, y, false, v));
    } else {
      payoff = eval_deviation(sc, y, true, v);
    }
    if (payoff > best.payoff) best = GridBest{y, payoff};
  }
  return best;
}

// ===== player-failure nonexistence probe =============================
// Lives here to reuse the deviation scanner; the interface belongs to the
// player-failure module.

ProbeReport pf_nonexistence_probe(int n, double r, int resolution) {
  if (n < 2) throw Error(Errc::ParamOutOfRange, "probe needs n >= 2");
  if (!(r > 0.0 && r < 1.0)) {
    throw Error(Errc::ParamOutOfRange, "probe needs 0 < r < 1");
  }
  if (resolution < 2) {
    throw Error(Errc::ParamOutOfRange, "probe resolution too small");
  }
  ProbeReport rep;
  rep.n = n;
  rep.r = r;
  rep.resolution = resolution;
  rep.min_witness_gain = std::numeric_limits<double>::infinity();

  const GameVariant variant = PlayerFailure{r};
  std::vector<double> grid(resolution + 1);
  for (int k = 0; k <= resolution; ++k) {
    grid[k] = static_cast<double>(k) / resolution;
  }

  Scratch sc;
  std::vector<EvaluatedCandidate> evals;
  std::vector<int> idx(n, 0);
  Config cfg;
  cfg.x.resize(n);
  std::vector<int> reflected(n);
  constexpr std::size_t kWitnessCap = 10;

  while (true) {
    // Mirror configuration: positions resolution - idx, reversed.
    for (int i = 0; i < n; ++i) reflected[i] = resolution - idx[n - 1 - i];
    bool triple = false;
    for (int i = 2; i < n; ++i) {
      if (idx[i] == idx[i - 2]) {
        triple = true;
        break;
      }
    }
    if (!triple &&
        !std::lexicographical_compare(reflected.begin(), reflected.end(),
                                      idx.begin(), idx.end())) {
      for (int i = 0; i < n; ++i) cfg.x[i] = grid[idx[i]];
      ++rep.configs_scanned;

      bool found = false;
      for (int p = 0; p < n && !found; ++p) {
        const BestResponse br =
            best_response_impl(p, cfg.span(), variant, sc, evals);
        if (br.gain > kDefaultDelta) {
          found = true;
          if (br.gain < rep.min_witness_gain) {
            rep.min_witness_gain = br.gain;
            rep.weakest = ProbeWitness{cfg.x, p, br.position, br.gain};
          }
          if (rep.sample_witnesses.size() < kWitnessCap) {
            rep.sample_witnesses.push_back(
                ProbeWitness{cfg.x, p, br.position, br.gain});
          }
        }
      }
      if (!found) rep.equilibria.push_back(cfg.x);
    }

    // Next non-decreasing index tuple.
    int d = n - 1;
    while (d >= 0 && idx[d] == resolution) --d;
    if (d < 0) break;
    const int v = idx[d] + 1;
    for (int i = d; i < n; ++i) idx[i] = v;
  }
  if (!std::isfinite(rep.min_witness_gain)) rep.min_witness_gain = 0.0;
  return rep;
}

}  // namespace hotelling
