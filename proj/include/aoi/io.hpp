#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "aoi/calibrate.hpp"
#include "aoi/engine.hpp"

namespace aoi {

/// Shortest text that parses back to the same double.
std::string format_real(double x);

/// Fixed 17 significant digits, the rendering used in every CSV.
std::string format_csv_real(double x);

// CSV writers emit a header row and CRLF line endings.
void write_trace_csv(std::ostream& out, const std::vector<PacketRecord>& trace);
void write_sweep_csv(std::ostream& out, const SweepResult& sweep);
void write_ratio_csv(std::ostream& out, const std::vector<RatioRow>& rows);

/// Flat object with the SimulationResult field names; the trace is omitted.
nlohmann::json to_json(const SimulationResult& result);
/// {best_lambda, best_aoi, seed, n_packets}
nlohmann::json sweep_summary(const SweepResult& sweep);
nlohmann::json to_json(const BetaSolution& beta);

}  // namespace aoi
