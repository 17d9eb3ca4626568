#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <string>
#include <string_view>
#include <vector>

#include "aoi/distributions.hpp"
#include "aoi/engine.hpp"

namespace aoi {

// ---------------------------------------------------------------------------
// Long-wait threshold

struct BetaSolution {
    double beta = 0.0;
    double residual = 0.0;  // |E[X] - E[X^2] / (2 beta)| / E[X], X = T + C + h(T, C)
    std::int64_t mc_samples = 0;
};

/// Solves E[T + C + h] = E[(T + C + h)^2] / (2 beta) with h = max(C, beta - T)
/// by bisection, using one fixed sample of (T, C) pairs for every iterate.
///
/// Throws NoBracket when no sign change is found (degenerate distributions)
/// and NotConverged when the iteration budget runs out.
BetaSolution solve_beta(const Distribution& dist_T, const Distribution& dist_C,
                        std::int64_t mc_samples, double tol, std::uint64_t seed);

/// Relative fixed-point defect of `beta` on a sample of `samples` pairs drawn
/// from the given streams.
double beta_defect(const Distribution& dist_T, const Distribution& dist_C, double beta,
                   std::int64_t samples, std::uint64_t seed, Stream stream_T, Stream stream_C);

// ---------------------------------------------------------------------------
// Threshold sweeps

enum class SweepKind { PAoIThreshold, PAoIThresholdPostponed, LongWaitByLambda };

/// Parses `paoi-t`, `paoi-tp`, `long-wait`.
SweepKind parse_sweep_kind(std::string_view name);
std::string to_string(SweepKind kind);

/// The policy a sweep evaluates at threshold `lambda`. LongWaitByLambda maps
/// lambda to LongWait(beta = lambda - E[T] - E[C]).
PolicySpec policy_for_lambda(SweepKind kind, double lambda, double mean_T, double mean_C);

/// lo, lo + step, ... up to hi inclusive. Always ends exactly at hi.
std::vector<double> lambda_grid(double lo, double hi, double step);

struct SweepSettings {
    double lo = 1.0;
    double hi = 4.0;
    double step = 0.025;
    std::int64_t n_packets = 100000;
    std::uint64_t seed = 0;
    double T0 = 1.0;
    double C0 = 0.0;
    unsigned threads = 1;
};

struct SweepResult {
    SweepKind kind = SweepKind::PAoIThreshold;
    std::vector<double> grid;
    std::vector<double> avg_aoi;
    double best_lambda = 0.0;
    double best_aoi = 0.0;
    std::uint64_t seed = 0;
    std::int64_t n_packets = 0;
};

/// Simulates every grid point with the same seed, so packet k sees the same
/// (T_k, C_k) at every lambda. Points may run concurrently; results are keyed
/// by grid position.
SweepResult sweep_lambda(SweepKind kind, const Distribution& dist_T, const Distribution& dist_C,
                         const SweepSettings& settings);

/// Runs fn(i) for i in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

// ---------------------------------------------------------------------------
// Ratio sweeps

enum class RatioPolicy { PAoIThreshold, PAoIThresholdPostponed, LongWait, LongWaitBeta };

/// Parses `paoi-t`, `paoi-tp`, `long-wait`, `long-wait-beta`.
RatioPolicy parse_ratio_policy(std::string_view name);
std::string to_string(RatioPolicy policy);

struct RatioSettings {
    double total = 1.0;       // E[T] + E[C]
    SweepSettings sweep;      // interval in absolute time units
    std::int64_t mc_samples = 1000000;
    double beta_tol = 1e-9;
};

struct RatioRow {
    double ratio = 0.0;
    RatioPolicy policy = RatioPolicy::PAoIThresholdPostponed;
    double best_param = 0.0;
    double best_aoi = 0.0;
};

/// Means for E[T]/E[C] = ratio with E[T] + E[C] = total.
std::pair<double, double> split_means(double ratio, double total);

/// Calibrates every policy at every ratio with exponential T and C.
/// `long-wait` is searched on the lambda axis (lambda = beta + E[T] + E[C]);
/// `long-wait-beta` uses the fixed-point threshold from solve_beta.
std::vector<RatioRow> ratio_sweep(const std::vector<RatioPolicy>& policies,
                                  const std::vector<double>& ratios, const RatioSettings& settings);

}  // namespace aoi
