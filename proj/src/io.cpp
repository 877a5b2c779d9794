#include "hotelling/io.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "json.hpp"

namespace hotelling {

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[48];
  const auto res =
      std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 12);
  return std::string(buf, res.ptr);
}

std::pair<Positions, Segment> parse_config_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParamOutOfRange,
                std::string("configuration JSON malformed: ") + e.what());
  }
  if (!j.contains("positions") || !j["positions"].is_array()) {
    throw Error(Errc::ParamOutOfRange,
                "configuration JSON needs a \"positions\" array");
  }
  Positions pos;
  for (const auto& v : j["positions"]) pos.push_back(v.get<double>());
  Segment seg = kUnitSegment;
  if (j.contains("segment")) {
    const auto& s = j["segment"];
    if (!s.is_array() || s.size() != 2) {
      throw Error(Errc::ParamOutOfRange,
                  "\"segment\" must be a two-element array");
    }
    seg = Segment{s[0].get<double>(), s[1].get<double>()};
  }
  return {std::move(pos), seg};
}

std::string config_json(const Positions& positions, const Segment& seg) {
  std::ostringstream os;
  os << "{\"segment\":[" << format_double(seg.a) << "," << format_double(seg.b)
     << "],\"positions\":[";
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (i) os << ",";
    os << format_double(positions[i]);
  }
  os << "]}";
  return os.str();
}

std::string nash_report_json(const NashReport& rep) {
  std::ostringstream os;
  os << "{\"equilibrium\":" << (rep.equilibrium ? "true" : "false")
     << ",\"delta\":" << format_double(rep.delta) << ",\"witnesses\":[";
  for (std::size_t i = 0; i < rep.witnesses.size(); ++i) {
    const auto& w = rep.witnesses[i];
    if (i) os << ",";
    os << "{\"player\":" << w.player << ",\"from\":" << format_double(w.from)
       << ",\"to\":" << format_double(w.to)
       << ",\"gain\":" << format_double(w.gain) << "}";
  }
  os << "]}";
  return os.str();
}

namespace {

void append_positions(std::ostringstream& os, const Positions& pos) {
  os << "[";
  for (std::size_t i = 0; i < pos.size(); ++i) {
    if (i) os << ",";
    os << format_double(pos[i]);
  }
  os << "]";
}

void append_witness(std::ostringstream& os, const ProbeWitness& w) {
  os << "{\"config\":";
  append_positions(os, w.config);
  os << ",\"player\":" << w.player
     << ",\"deviation\":" << format_double(w.deviation)
     << ",\"gain\":" << format_double(w.gain) << "}";
}

}  // namespace

std::string probe_report_json(const ProbeReport& rep) {
  std::ostringstream os;
  os << "{\"n\":" << rep.n << ",\"r\":" << format_double(rep.r)
     << ",\"resolution\":" << rep.resolution
     << ",\"configs_scanned\":" << rep.configs_scanned
     << ",\"equilibria_found\":" << rep.equilibria.size()
     << ",\"equilibria\":[";
  for (std::size_t i = 0; i < rep.equilibria.size(); ++i) {
    if (i) os << ",";
    append_positions(os, rep.equilibria[i]);
  }
  os << "],\"min_witness_gain\":" << format_double(rep.min_witness_gain)
     << ",\"weakest\":";
  append_witness(os, rep.weakest);
  os << ",\"witnesses\":[";
  for (std::size_t i = 0; i < rep.sample_witnesses.size(); ++i) {
    if (i) os << ",";
    append_witness(os, rep.sample_witnesses[i]);
  }
  os << "]}";
  return os.str();
}

std::string trace_jsonl(const DynamicsTrace& trace) {
  std::ostringstream os;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const TraceStep& s = trace.steps[i];
    os << "{\"step\":" << i + 1 << ",\"player\":" << s.player
       << ",\"from\":" << format_double(s.from)
       << ",\"to\":" << format_double(s.to)
       << ",\"gain\":" << format_double(s.gain) << "}\n";
  }
  const char* outcome = trace.outcome == Outcome::Equilibrium ? "equilibrium"
                        : trace.outcome == Outcome::Cycle     ? "cycle"
                                                              : "budget_exhausted";
  os << "{\"outcome\":\"" << outcome << "\"";
  if (trace.outcome == Outcome::Cycle) {
    os << ",\"period\":" << trace.cycle_period;
  }
  os << ",\"steps\":" << trace.steps.size()
     << ",\"distinct_states\":" << trace.distinct_states
     << ",\"final_positions\":";
  append_positions(os, trace.final_positions);
  os << "}\n";
  return os.str();
}

std::string scenario_table_csv(const ScenarioTable& table) {
  std::ostringstream os;
  os << "f_interval_lo,f_interval_hi,prob_mass,payoff_incumbent,"
        "payoff_deviator\n";
  for (const ScenarioRow& row : table.rows) {
    if (row.no_failure) {
      os << ",,";
    } else {
      os << format_double(row.f_lo) << "," << format_double(row.f_hi) << ",";
    }
    os << format_double(row.prob) << "," << format_double(row.incumbent) << ","
       << format_double(row.deviator) << "\n";
  }
  os << "# r=" << format_double(table.r) << " x=" << format_double(table.x)
     << " y=" << format_double(table.y) << "\n";
  os << "# expected_incumbent=" << format_double(table.expected_incumbent)
     << " expected_deviator=" << format_double(table.expected_deviator)
     << " difference=" << format_double(table.difference()) << "\n";
  return os.str();
}

}  // namespace hotelling
