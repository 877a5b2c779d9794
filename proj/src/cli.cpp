#include "hotelling/cli.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hotelling/core.hpp"
#include "hotelling/dynamics.hpp"
#include "hotelling/io.hpp"
#include "hotelling/line_failure.hpp"
#include "hotelling/player_failure.hpp"
#include "hotelling/rng.hpp"

namespace hotelling {

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kFailed = 2;
constexpr int kOracleMismatch = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string variant = "classic";
  double r = -1.0;
  Positions positions;
  std::string config_path;
  std::vector<double> segment;
  int n = 0;
  std::optional<double> family_param;
  int resolution = 0;
  std::uint64_t samples = 0;
  std::optional<std::uint64_t> seed;
  std::string format = "json";
  std::string out_path;
  double delta = kDefaultDelta;
  double quantum = kDefaultQuantum;
  int max_iters = 10000;
  std::string order = "round_robin";
  bool oracles = false;
  bool random_start = false;
  std::optional<double> y;
  int y_count = 50;
  double r_from = 0.0;
  double r_to = 0.0;
  double r_step = 0.0;
};

Segment opt_segment(const Options& o) {
  if (o.segment.empty()) return kUnitSegment;
  return Segment{o.segment[0], o.segment[1]};
}

double require_r(const Options& o) {
  if (!(o.r >= 0.0 && o.r <= 1.0)) {
    throw UsageError("--r is required for this variant (0 <= r <= 1)");
  }
  return o.r;
}

GameVariant make_variant(const Options& o) {
  if (o.variant == "classic") return Classic{opt_segment(o)};
  if (o.variant == "lf") return LineFailure{require_r(o)};
  if (o.variant == "pf") return PlayerFailure{require_r(o)};
  throw UsageError("--variant must be one of classic|lf|pf");
}

// Reads positions from --positions or --config; sorts without the pairing
// cap so that co-location limits (three or more at a point) stay evaluable
// by the payoff engines.
std::pair<Config, Segment> load_profile(const Options& o) {
  Positions pos = o.positions;
  Segment seg = opt_segment(o);
  if (!o.config_path.empty()) {
    if (!pos.empty()) {
      throw UsageError("give either --positions or --config, not both");
    }
    std::ifstream in(o.config_path);
    if (!in) throw UsageError("cannot open config file " + o.config_path);
    std::stringstream ss;
    ss << in.rdbuf();
    auto [p, s] = parse_config_json(ss.str());
    pos = std::move(p);
    if (o.segment.empty()) seg = s;
  }
  if (pos.empty()) {
    throw UsageError("no configuration given (--positions or --config)");
  }
  for (double v : pos) {
    if (!(v >= seg.a && v <= seg.b)) {
      throw Error(Errc::OutOfSegment, "position outside the segment");
    }
  }
  return {ordered(std::move(pos)), seg};
}

class Sink {
 public:
  Sink(const Options& o, std::ostream& fallback) : out_(&fallback) {
    if (!o.out_path.empty()) {
      file_.open(o.out_path);
      if (!file_) throw UsageError("cannot open output file " + o.out_path);
      out_ = &file_;
    }
  }
  std::ostream& stream() { return *out_; }

 private:
  std::ofstream file_;
  std::ostream* out_;
};

// ===== payoff =========================================================

int cmd_payoff(const Options& o, std::ostream& out, std::ostream& err) {
  const GameVariant variant = make_variant(o);
  auto [cfg, seg] = load_profile(o);
  if (std::holds_alternative<Classic>(variant)) {
    (void)validate(cfg.x, seg);  // classic path enforces the pairing cap
  }

  PayoffVector payoffs;
  if (const auto* lf = std::get_if<LineFailure>(&variant)) {
    payoffs = lf_payoffs(cfg, lf->r);
  } else if (const auto* pf = std::get_if<PlayerFailure>(&variant)) {
    payoffs = pf_payoffs(cfg, pf->r);
  } else {
    payoffs = classic_payoffs(cfg, seg);
  }

  PayoffVector quad, enumeration, mc_mean, mc_se;
  bool mismatch = false;
  if (o.oracles) {
    if (const auto* lf = std::get_if<LineFailure>(&variant)) {
      quad = lf_payoffs_quadrature(cfg, lf->r);
      for (int i = 0; i < cfg.n(); ++i) {
        mismatch = mismatch || std::abs(quad[i] - payoffs[i]) > 1e-10;
      }
      if (o.samples > 0) {
        if (!o.seed) throw UsageError("--seed is required with --samples");
        const McResult mc = lf_payoffs_montecarlo(cfg, lf->r, o.samples, *o.seed);
        mc_mean = mc.mean;
        mc_se = mc.std_error;
        for (int i = 0; i < cfg.n(); ++i) {
          mismatch = mismatch || std::abs(mc.mean[i] - payoffs[i]) >
                                     4.0 * mc.std_error[i] + kExactTol;
        }
      }
    } else if (const auto* pf = std::get_if<PlayerFailure>(&variant)) {
      if (cfg.n() <= 20) {
        enumeration = pf_payoffs_exact(cfg, pf->r);
        for (int i = 0; i < cfg.n(); ++i) {
          mismatch =
              mismatch || std::abs(enumeration[i] - payoffs[i]) > kExactTol;
        }
      }
      if (o.samples > 0) {
        if (!o.seed) throw UsageError("--seed is required with --samples");
        const McResult mc = pf_payoffs_montecarlo(cfg, pf->r, o.samples, *o.seed);
        mc_mean = mc.mean;
        mc_se = mc.std_error;
        for (int i = 0; i < cfg.n(); ++i) {
          mismatch = mismatch || std::abs(mc.mean[i] - payoffs[i]) >
                                     4.0 * mc.std_error[i] + kExactTol;
        }
      }
    }
  }

  Sink sink(o, out);
  std::ostream& os = sink.stream();
  if (o.format == "csv") {
    os << "server,payoff";
    if (!quad.empty()) os << ",quadrature,quadrature_delta";
    if (!enumeration.empty()) os << ",enumeration,enumeration_delta";
    if (!mc_mean.empty()) os << ",montecarlo,montecarlo_se";
    os << "\n";
    for (int i = 0; i < cfg.n(); ++i) {
      os << i + 1 << "," << format_double(payoffs[i]);
      if (!quad.empty()) {
        os << "," << format_double(quad[i]) << ","
           << format_double(quad[i] - payoffs[i]);
      }
      if (!enumeration.empty()) {
        os << "," << format_double(enumeration[i]) << ","
           << format_double(enumeration[i] - payoffs[i]);
      }
      if (!mc_mean.empty()) {
        os << "," << format_double(mc_mean[i]) << "," << format_double(mc_se[i]);
      }
      os << "\n";
    }
  } else {
    auto arr = [&](const PayoffVector& v) {
      std::string s = "[";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += format_double(v[i]);
      }
      return s + "]";
    };
    os << "{\"variant\":\"" << o.variant << "\",\"positions\":"
       << arr(cfg.x) << ",\"payoffs\":" << arr(payoffs);
    if (!quad.empty()) os << ",\"quadrature\":" << arr(quad);
    if (!enumeration.empty()) os << ",\"enumeration\":" << arr(enumeration);
    if (!mc_mean.empty()) {
      os << ",\"montecarlo\":" << arr(mc_mean)
         << ",\"montecarlo_se\":" << arr(mc_se);
    }
    os << "}\n";
  }
  if (mismatch) {
    err << "oracle disagreement beyond tolerance\n";
    return kOracleMismatch;
  }
  return kOk;
}

// ===== verify =========================================================

int cmd_verify(const Options& o, std::ostream& out, std::ostream& err) {
  GameVariant variant = make_variant(o);
  auto [raw, seg] = load_profile(o);
  if (auto* c = std::get_if<Classic>(&variant)) c->seg = seg;
  const Config cfg = validate(raw.x, std::holds_alternative<Classic>(variant)
                                         ? seg
                                         : kUnitSegment);
  const NashReport rep = is_nash(cfg, variant, o.delta);

  std::optional<ConditionReport> cond;
  if (cfg.n() >= 2) {
    if (const auto* lf = std::get_if<LineFailure>(&variant)) {
      cond = lf_condition_check(cfg, lf->r);
    } else if (std::holds_alternative<Classic>(variant)) {
      cond = el_check(cfg, seg);
    }
  }

  Sink sink(o, out);
  std::ostream& os = sink.stream();
  os << "{\"variant\":\"" << o.variant
     << "\",\"nash\":" << nash_report_json(rep);
  if (cond) {
    os << ",\"conditions\":{\"cond1\":" << (cond->cond1 ? "true" : "false")
       << ",\"cond2\":" << (cond->cond2 ? "true" : "false")
       << ",\"cond3\":" << (cond->cond3 ? "true" : "false")
       << ",\"equilibrium\":" << (cond->equilibrium ? "true" : "false") << "}";
  }
  os << "}\n";
  if (!rep.equilibrium) {
    err << "not an equilibrium (delta=" << format_double(o.delta) << ")\n";
    return kFailed;
  }
  return kOk;
}

// ===== construct ======================================================

int cmd_construct(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.n < 1) throw UsageError("--n is required");
  Config cfg;
  Segment seg = kUnitSegment;
  if (o.variant == "classic") {
    seg = opt_segment(o);
    cfg = classic_equilibrium(o.n, seg, o.family_param);
  } else if (o.variant == "lf") {
    cfg = lf_equilibrium(o.n, require_r(o), o.family_param);
  } else if (o.variant == "pf") {
    const double r = require_r(o);
    if (!(r > 0.0 && r < 1.0)) {
      throw Error(Errc::ParamOutOfRange, "crash analysis needs 0 < r < 1");
    }
    if (o.n == 1) {
      cfg = Config{{0.5}};  // every position works; midpoint representative
    } else if (o.n == 2) {
      cfg = Config{{0.5, 0.5}};
    } else {
      throw Error(Errc::NoEquilibrium,
                  "no equilibrium exists under server crashes for n >= 3");
    }
  } else {
    throw UsageError("--variant must be one of classic|lf|pf");
  }
  (void)err;
  Sink sink(o, out);
  sink.stream() << config_json(cfg.x, seg) << "\n";
  return kOk;
}

// ===== dynamics =======================================================

int cmd_dynamics(const Options& o, std::ostream& out, std::ostream& err) {
  GameVariant variant = make_variant(o);
  Config start;
  if (o.random_start) {
    if (o.n < 1) throw UsageError("--random-start requires --n");
    if (!o.seed) throw UsageError("--random-start requires --seed");
    const Segment seg = variant_segment(variant);
    const CounterRng rng(*o.seed);
    Positions pos(o.n);
    for (int i = 0; i < o.n; ++i) {
      pos[i] = seg.a + seg.length() * rng.uniform(i);
    }
    start = validate(std::move(pos), seg);
  } else {
    auto [raw, file_seg] = load_profile(o);
    if (auto* c = std::get_if<Classic>(&variant)) c->seg = file_seg;
    start = validate(raw.x, variant_segment(variant));
  }
  const ScheduleOrder order = o.order == "largest_gain"
                                  ? ScheduleOrder::LargestGain
                                  : ScheduleOrder::RoundRobin;
  if (o.order != "largest_gain" && o.order != "round_robin") {
    throw UsageError("--order must be round_robin or largest_gain");
  }
  const DynamicsTrace trace =
      br_dynamics(start, variant, order, o.max_iters, o.quantum, o.delta);
  (void)err;
  Sink sink(o, out);
  sink.stream() << trace_jsonl(trace);
  return kOk;
}

// ===== sweep ==========================================================

int cmd_sweep(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.n != 1 && o.n != 2 && o.n != 4 && o.n != 5 && o.n != 6) {
    throw UsageError("--n must be one of 1,2,4,5,6 for sweep");
  }
  if (!(o.r_from > 0.0 && o.r_to < 1.0 && o.r_from <= o.r_to && o.r_step > 0.0)) {
    throw UsageError("sweep needs 0 < --r-from <= --r-to < 1 and --r-step > 0");
  }
  (void)err;
  Sink sink(o, out);
  std::ostream& os = sink.stream();

  const int steps =
      static_cast<int>(std::floor((o.r_to - o.r_from) / o.r_step + 1e-9));
  auto r_at = [&](int k) { return o.r_from + k * o.r_step; };

  if (o.n == 6) {
    os << "r,x_min,x_max,classic_x_min,classic_x_max\n";
    for (int k = 0; k <= steps; ++k) {
      const double r = r_at(k);
      const auto [lo, hi] = lf_six_family_bounds(r);
      os << format_double(r) << "," << format_double(lo) << ","
         << format_double(hi) << "," << format_double(0.125) << ","
         << format_double(1.0 / 6) << "\n";
    }
    return kOk;
  }
  if (o.n == 5) {
    os << "r,x,payoff_peripheral,payoff_center,classic_x,"
          "printed_root,cond_residual,cond_residual_printed\n";
    auto residual = [](double x, double r) {
      return (0.5 - x) - 2.0 * (x - 0.5 * r * x * x);
    };
    for (int k = 0; k <= steps; ++k) {
      const double r = r_at(k);
      const Config eq = lf_equilibrium(5, r);
      const PayoffVector p = lf_payoffs(eq, r);
      const double printed = (3.0 - std::sqrt(9.0 - 4.0 * r)) / (2.0 * r);
      os << format_double(r) << "," << format_double(eq.x[0]) << ","
         << format_double(p[0]) << "," << format_double(p[2]) << ","
         << format_double(1.0 / 6) << "," << format_double(printed) << ","
         << format_double(residual(eq.x[0], r)) << ","
         << format_double(residual(printed, r)) << "\n";
    }
    return kOk;
  }

  os << "r,x,payoff,classic_x\n";
  const double classic_x = o.n == 4 ? 0.25 : 0.5;
  for (int k = 0; k <= steps; ++k) {
    const double r = r_at(k);
    const Config eq = lf_equilibrium(o.n, r);
    const PayoffVector p = lf_payoffs(eq, r);
    os << format_double(r) << "," << format_double(eq.x[0]) << ","
       << format_double(p[0]) << "," << format_double(classic_x) << "\n";
  }
  return kOk;
}

// ===== table1 =========================================================

// Exhaustive grid scan for three-server equilibria of a variant; mirrors the
// player-failure probe but works for any variant.
bool grid_has_equilibrium_n3(const GameVariant& variant, int resolution,
                             double delta) {
  std::vector<double> grid(resolution + 1);
  for (int k = 0; k <= resolution; ++k) {
    grid[k] = static_cast<double>(k) / resolution;
  }
  Config cfg;
  cfg.x.resize(3);
  for (int a = 0; a <= resolution; ++a) {
    for (int b = a; b <= resolution; ++b) {
      for (int c = b; c <= resolution; ++c) {
        if (a == c) continue;  // triple overlap
        if (a + c > resolution ||
            (a + c == resolution && b > resolution - b)) {
          continue;  // reflection-reduced
        }
        cfg.x = {grid[a], grid[b], grid[c]};
        if (is_equilibrium(cfg, variant, delta)) return true;
      }
    }
  }
  return false;
}

int cmd_table1(const Options& o, std::ostream& out, std::ostream& err) {
  const double r = o.r >= 0.0 ? o.r : 0.5;
  if (!(r > 0.0 && r < 1.0)) throw UsageError("--r must lie in (0, 1)");
  const int res3 = o.resolution > 0 ? o.resolution : 60;
  (void)err;

  auto verified = [&](const Config& cfg, const GameVariant& v) {
    return is_nash(cfg, v, o.delta).equilibrium;
  };

  std::vector<std::array<std::string, 3>> cells(7);

  // Classic column.
  {
    const GameVariant v = Classic{kUnitSegment};
    cells[1][2] = "inf";  // single server: payoff independent of position
    cells[2][2] = verified(classic_equilibrium(2, kUnitSegment), v) ? "1" : "0";
    cells[3][2] = grid_has_equilibrium_n3(v, res3, o.delta) ? "?" : "0";
    cells[4][2] = verified(classic_equilibrium(4, kUnitSegment), v) ? "1" : "0";
    cells[5][2] = verified(classic_equilibrium(5, kUnitSegment), v) ? "1" : "0";
    const bool family =
        verified(classic_equilibrium(6, kUnitSegment, 0.125), v) &&
        verified(classic_equilibrium(6, kUnitSegment, 0.14), v);
    cells[6][2] = family ? "inf" : "?";
  }
  // Line-failure column.
  {
    const GameVariant v = LineFailure{r};
    const bool unique1 = verified(lf_equilibrium(1, r), v) &&
                         !verified(Config{{0.4}}, v);
    cells[1][1] = unique1 ? "1" : "?";
    cells[2][1] = verified(lf_equilibrium(2, r), v) ? "1" : "0";
    cells[3][1] = grid_has_equilibrium_n3(v, res3, o.delta) ? "?" : "0";
    cells[4][1] = verified(lf_equilibrium(4, r), v) ? "1" : "0";
    cells[5][1] = verified(lf_equilibrium(5, r), v) ? "1" : "0";
    const auto [lo, hi] = lf_six_family_bounds(r);
    const bool family = verified(lf_equilibrium(6, r, lo), v) &&
                        verified(lf_equilibrium(6, r, 0.5 * (lo + hi)), v);
    cells[6][1] = family ? "inf" : "?";
  }
  // Player-failure column.
  {
    const GameVariant v = PlayerFailure{r};
    const bool free1 = verified(Config{{0.3}}, v) && verified(Config{{0.7}}, v);
    cells[1][0] = free1 ? "inf" : "?";
    const ProbeReport p2 = pf_nonexistence_probe(2, r, res3);
    cells[2][0] = p2.equilibria.size() == 1 ? "1" : "?";
    const ProbeReport p3 = pf_nonexistence_probe(3, r, res3);
    cells[3][0] = p3.equilibria.empty() ? "0" : "?";
    const ProbeReport p4 =
        pf_nonexistence_probe(4, r, std::min(res3, 30));
    cells[4][0] = p4.equilibria.empty() ? "0" : "?";
    const ProbeReport p5 =
        pf_nonexistence_probe(5, r, std::min(res3, 20));
    cells[5][0] = p5.equilibria.empty() ? "0" : "?";
    const ProbeReport p6 =
        pf_nonexistence_probe(6, r, std::min(res3, 14));
    cells[6][0] = p6.equilibria.empty() ? "0" : "?";
  }

  Sink sink(o, out);
  std::ostream& os = sink.stream();
  os << "n,player_failure,line_failure,classic\n";
  for (int n = 1; n <= 6; ++n) {
    os << n << "," << cells[n][0] << "," << cells[n][1] << "," << cells[n][2]
       << "\n";
  }
  return kOk;
}

// ===== appendixA ======================================================

int cmd_appendix(const Options& o, std::ostream& out, std::ostream& err) {
  const double r = require_r(o);
  Sink sink(o, out);
  std::ostream& os = sink.stream();

  if (o.y) {
    const ScenarioTable t = lf_appendix_tables(r, *o.y);
    os << scenario_table_csv(t);
    if (t.difference() < -kExactTol) {
      err << "incumbent fell below the deviator\n";
      return kOracleMismatch;
    }
    return kOk;
  }

  // Sweep both regions.
  const Config eq = lf_equilibrium(4, r);
  const double x = eq.x[0];
  os << "y,region,expected_incumbent,expected_deviator,difference\n";
  bool violated = false;
  const int m = o.y_count;
  for (int k = 0; k < m; ++k) {
    const double y = x * k / m;  // [0, x)
    const ScenarioTable t = lf_appendix_tables(r, y);
    violated = violated || t.difference() < -kExactTol;
    os << format_double(y) << ",hinterland,"
       << format_double(t.expected_incumbent) << ","
       << format_double(t.expected_deviator) << ","
       << format_double(t.difference()) << "\n";
  }
  for (int k = 1; k <= m; ++k) {
    const double y = x + (0.5 - x) * k / (m + 1);  // (x, 1/2)
    const ScenarioTable t = lf_appendix_tables(r, y);
    violated = violated || t.difference() < -kExactTol;
    os << format_double(y) << ",between_pairs,"
       << format_double(t.expected_incumbent) << ","
       << format_double(t.expected_deviator) << ","
       << format_double(t.difference()) << "\n";
  }
  if (violated) {
    err << "incumbent fell below the deviator\n";
    return kOracleMismatch;
  }
  return kOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Hotelling location games on a segment: exact payoffs, "
               "equilibria and best-response dynamics for the no-failure, "
               "line-failure and server-crash variants"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--variant", o.variant, "classic|lf|pf");
    cmd->add_option("--r", o.r, "failure probability");
    cmd->add_option("--positions", o.positions, "server positions");
    cmd->add_option("--config", o.config_path, "configuration JSON file");
    cmd->add_option("--segment", o.segment, "segment endpoints a b")
        ->expected(2);
    cmd->add_option("--format", o.format, "json|csv");
    cmd->add_option("--out", o.out_path, "output file (default stdout)");
    cmd->add_option("--delta", o.delta, "improvement threshold");
    cmd->add_option("--seed", o.seed, "RNG seed (required when sampling)");
    cmd->add_option("--samples", o.samples, "Monte Carlo sample count");
    return cmd;
  };

  CLI::App* payoff = add_common(app.add_subcommand(
      "payoff", "expected payoffs of a configuration"));
  payoff->add_flag("--oracles", o.oracles,
                   "add oracle columns (quadrature / enumeration / MC)");

  add_common(app.add_subcommand("verify", "equilibrium verification"));

  CLI::App* construct = add_common(
      app.add_subcommand("construct", "build a known equilibrium"));
  construct->add_option("--n", o.n, "number of servers");
  construct->add_option("--family-param", o.family_param,
                        "hinterland parameter for n >= 6 families");

  CLI::App* dynamics = add_common(app.add_subcommand(
      "dynamics", "best-response iteration with cycle detection"));
  dynamics->add_option("--n", o.n, "number of servers (random start)");
  dynamics->add_flag("--random-start", o.random_start,
                     "draw the start configuration from the seed");
  dynamics->add_option("--order", o.order, "round_robin|largest_gain");
  dynamics->add_option("--max-iters", o.max_iters, "move budget");
  dynamics->add_option("--quantum", o.quantum,
                       "cycle-detection quantization step");

  CLI::App* sweep = add_common(app.add_subcommand(
      "sweep", "line-failure equilibrium positions and payoffs vs r"));
  sweep->add_option("--n", o.n, "number of servers (1,2,4,5,6)");
  sweep->add_option("--r-from", o.r_from, "sweep start")->required();
  sweep->add_option("--r-to", o.r_to, "sweep end")->required();
  sweep->add_option("--r-step", o.r_step, "sweep step")->required();

  CLI::App* table1 = add_common(app.add_subcommand(
      "table1", "equilibrium counts per variant for n = 1..6"));
  table1->add_option("--resolution", o.resolution,
                     "grid resolution for the three-server scans");

  CLI::App* appendix = add_common(app.add_subcommand(
      "appendixA", "four-server deviation scenario tables"));
  appendix->add_option("--y", o.y, "deviation target in [0, 1/2)");
  appendix->add_option("--y-count", o.y_count, "sweep points per region");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (payoff->parsed()) return cmd_payoff(o, out, err);
    if (app.get_subcommand("verify")->parsed()) return cmd_verify(o, out, err);
    if (construct->parsed()) return cmd_construct(o, out, err);
    if (dynamics->parsed()) return cmd_dynamics(o, out, err);
    if (sweep->parsed()) return cmd_sweep(o, out, err);
    if (table1->parsed()) return cmd_table1(o, out, err);
    if (appendix->parsed()) return cmd_appendix(o, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kFailed;
  }
  return kUsage;
}

}  // namespace hotelling
