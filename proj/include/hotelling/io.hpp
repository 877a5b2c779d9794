#pragma once

#include <string>
#include <utility>

#include "hotelling/core.hpp"
#include "hotelling/dynamics.hpp"
#include "hotelling/line_failure.hpp"
#include "hotelling/player_failure.hpp"

namespace hotelling {

// Locale-independent formatting, 12 significant digits.
std::string format_double(double v);

// {"segment":[a,b], "positions":[...]}
std::pair<Positions, Segment> parse_config_json(const std::string& text);
std::string config_json(const Positions& positions, const Segment& seg);

std::string nash_report_json(const NashReport& rep);
std::string probe_report_json(const ProbeReport& rep);

// One JSON object per step, then a summary line.
std::string trace_jsonl(const DynamicsTrace& trace);

// Columns: f_interval_lo, f_interval_hi, prob_mass, payoff_incumbent,
// payoff_deviator; the no-failure row leaves the interval columns empty.
// Expected payoffs follow as '#' comment lines.
std::string scenario_table_csv(const ScenarioTable& table);

}  // namespace hotelling
