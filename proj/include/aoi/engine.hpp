#pragma once

#include <cstdint>
#include <vector>

#include "aoi/distributions.hpp"
#include "aoi/policies.hpp"

namespace aoi {

/// Realized timeline of one packet. W, D, Q and A are defined for k >= 1.
struct PacketRecord {
    std::int64_t k = 0;
    double t = 0.0;  // generation
    double T = 0.0;  // transmission duration
    double a = 0.0;  // arrival at the server, t + T
    double c = 0.0;  // processing start
    double C = 0.0;  // processing duration
    double d = 0.0;  // delivery, c + C
    double W = 0.0;  // source wait after the previous arrival
    double D = 0.0;  // buffer wait, c - a
    double Q = 0.0;  // area of the age trapezoid closed by this delivery
    double A = 0.0;  // peak age, d - t_{k-1}

    friend bool operator==(const PacketRecord&, const PacketRecord&) = default;
};

struct ScenarioConfig {
    Distribution dist_T = Distribution::exponential(0.8);
    Distribution dist_C = Distribution::exponential(0.2);
    PolicySpec policy;
    std::int64_t n_packets = 100000;
    std::uint64_t seed = 0;
    double T0 = 1.0;  // packet 0 transmission
    double C0 = 0.0;  // packet 0 processing

    // Initial condition: packet 0 is delivered at time 0.
    double t0() const noexcept { return -T0 - C0; }
    double c0() const noexcept { return -C0; }

    /// Throws std::invalid_argument when the configuration cannot be simulated.
    void validate() const;
};

struct SimulationResult {
    std::int64_t n = 0;
    double avg_aoi_trapezoid = 0.0;
    double avg_aoi_integral = 0.0;
    double avg_paoi = 0.0;
    double mean_buffer_wait = 0.0;
    double frac_buffered = 0.0;
    std::int64_t max_buffer = 0;  // most packets ever waiting behind the server
    std::vector<PacketRecord> trace;

    friend bool operator==(const SimulationResult&, const SimulationResult&) = default;
};

struct SimulateOptions {
    bool keep_trace = false;
    // Re-check every SourceView against the omniscient timeline and fail with
    // CausalityViolation if it leaks information from the future.
    bool check_causality = false;
};

SimulationResult simulate(const ScenarioConfig& config, const SimulateOptions& options = {});

/// max(t_k + T_k, c_{k-1} + C_{k-1}).
double processing_start(double t, double T, double c_prev, double C_prev) noexcept;

/// Area under the age curve between deliveries d_{k-1} and d_k, written as
/// the difference of the triangles anchored at t_{k-1} and t_k.
double trapezoid_area(double t_prev, double t, double d) noexcept;

struct AverageAoI {
    double trapezoid = 0.0;  // sum Q_k / (t_n - t_0)
    double integral = 0.0;   // time average of the age over [d_0, d_n]
};

/// Both averages from a trace of packets 1..n plus packet 0's generation and
/// delivery times.
AverageAoI average_aoi(const std::vector<PacketRecord>& trace, double t0, double d0);

}  // namespace aoi
