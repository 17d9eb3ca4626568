#include "aoi/calibrate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "aoi/errors.hpp"
#include "aoi/io.hpp"

namespace aoi {
namespace {

struct PairSample {
    std::vector<double> T;
    std::vector<double> C;
};

PairSample draw_pairs(const Distribution& dist_T, const Distribution& dist_C, std::int64_t count,
                      std::uint64_t seed, Stream stream_T, Stream stream_C) {
    PairSample s;
    s.T.resize(static_cast<std::size_t>(count));
    s.C.resize(static_cast<std::size_t>(count));
    for (std::size_t i = 0; i < s.T.size(); ++i) {
        s.T[i] = dist_T.sample_at(seed, stream_T, i);
        s.C[i] = dist_C.sample_at(seed, stream_C, i);
    }
    return s;
}

// Sample means of X and X^2 with X = T + C + max(C, beta - T).
std::pair<double, double> cycle_moments(const PairSample& s, double beta) {
    double m1 = 0.0;
    double m2 = 0.0;
    for (std::size_t i = 0; i < s.T.size(); ++i) {
        const double x = s.T[i] + s.C[i] + std::max(s.C[i], beta - s.T[i]);
        m1 += x;
        m2 += x * x;
    }
    const double n = static_cast<double>(s.T.size());
    return {m1 / n, m2 / n};
}

// G(beta) - beta, positive below the root.
double fixed_point_gap(const PairSample& s, double beta) {
    const auto [m1, m2] = cycle_moments(s, beta);
    return m2 / (2.0 * m1) - beta;
}

double relative_defect(const PairSample& s, double beta) {
    const auto [m1, m2] = cycle_moments(s, beta);
    return std::abs(m1 - m2 / (2.0 * beta)) / m1;
}

}  // namespace

BetaSolution solve_beta(const Distribution& dist_T, const Distribution& dist_C,
                        std::int64_t mc_samples, double tol, std::uint64_t seed) {
    if (mc_samples < 10000) throw std::invalid_argument("mc_samples must be >= 10000");
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be > 0");

    const double total = dist_T.mean() + dist_C.mean();
    if (!(total > 0.0)) {
        throw NoBracket("degenerate distributions: E[T] + E[C] must be > 0");
    }

    const PairSample sample =
        draw_pairs(dist_T, dist_C, mc_samples, seed, Stream::BetaTransmission, Stream::BetaProcessing);

    double lo = total * 1e-3;
    double hi = 10.0 * total;
    constexpr int kGrowthLimit = 64;
    for (int i = 0; i < kGrowthLimit && fixed_point_gap(sample, lo) <= 0.0; ++i) lo *= 0.5;
    for (int i = 0; i < kGrowthLimit && fixed_point_gap(sample, hi) >= 0.0; ++i) hi *= 2.0;
    if (!(fixed_point_gap(sample, lo) > 0.0) || !(fixed_point_gap(sample, hi) < 0.0)) {
        throw NoBracket("no sign change of the fixed-point gap in [" + format_real(lo) + ", " +
                        format_real(hi) + "]");
    }

    constexpr int kIterationBudget = 400;
    double beta = 0.5 * (lo + hi);
    for (int i = 0; i < kIterationBudget; ++i) {
        beta = 0.5 * (lo + hi);
        if (hi - lo <= tol * beta && relative_defect(sample, beta) <= tol) {
            return BetaSolution{beta, relative_defect(sample, beta), mc_samples};
        }
        if (fixed_point_gap(sample, beta) > 0.0) {
            lo = beta;
        } else {
            hi = beta;
        }
        if (!(lo < hi)) break;
    }
    const double residual = relative_defect(sample, beta);
    if (residual <= tol) return BetaSolution{beta, residual, mc_samples};
    throw NotConverged("beta bisection stopped at " + format_real(beta) + " with defect " +
                       format_real(residual));
}

double beta_defect(const Distribution& dist_T, const Distribution& dist_C, double beta,
                   std::int64_t samples, std::uint64_t seed, Stream stream_T, Stream stream_C) {
    return relative_defect(draw_pairs(dist_T, dist_C, samples, seed, stream_T, stream_C), beta);
}

// ---------------------------------------------------------------------------

SweepKind parse_sweep_kind(std::string_view name) {
    if (name == "paoi-t") return SweepKind::PAoIThreshold;
    if (name == "paoi-tp") return SweepKind::PAoIThresholdPostponed;
    if (name == "long-wait") return SweepKind::LongWaitByLambda;
    throw std::invalid_argument("unknown sweep policy '" + std::string(name) + "'");
}

std::string to_string(SweepKind kind) {
    switch (kind) {
        case SweepKind::PAoIThreshold: return "paoi-t";
        case SweepKind::PAoIThresholdPostponed: return "paoi-tp";
        case SweepKind::LongWaitByLambda: return "long-wait";
    }
    return {};
}

PolicySpec policy_for_lambda(SweepKind kind, double lambda, double mean_T, double mean_C) {
    switch (kind) {
        case SweepKind::PAoIThreshold: return {PolicyKind::PAoIThreshold, lambda};
        case SweepKind::PAoIThresholdPostponed: return {PolicyKind::PAoIThresholdPostponed, lambda};
        case SweepKind::LongWaitByLambda:
            return {PolicyKind::LongWait, lambda_to_beta(lambda, mean_T, mean_C)};
    }
    return {};
}

std::vector<double> lambda_grid(double lo, double hi, double step) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || lo < 0.0 || hi < lo) {
        throw std::invalid_argument("interval must satisfy 0 <= lo <= hi");
    }
    if (!std::isfinite(step) || !(step > 0.0)) throw std::invalid_argument("step must be > 0");

    const double span = (hi - lo) / step;
    const auto steps = static_cast<std::int64_t>(std::floor(span + 1e-9));
    if (steps > 10'000'000) throw std::invalid_argument("grid has too many points");
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(steps) + 2);
    for (std::int64_t i = 0; i <= steps; ++i) {
        grid.push_back(lo + static_cast<double>(i) * step);
    }
    if (std::abs(grid.back() - hi) <= 1e-9 * step) {
        grid.back() = hi;
    } else if (grid.back() < hi) {
        grid.push_back(hi);
    }
    return grid;
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(count, 1));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < count; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!error) error = std::current_exception();
                        next = count;
                    }
                }
            });
        }
    }
    if (error) std::rethrow_exception(error);
}

SweepResult sweep_lambda(SweepKind kind, const Distribution& dist_T, const Distribution& dist_C,
                         const SweepSettings& settings) {
    SweepResult result;
    result.kind = kind;
    result.grid = lambda_grid(settings.lo, settings.hi, settings.step);
    result.avg_aoi.assign(result.grid.size(), 0.0);
    result.seed = settings.seed;
    result.n_packets = settings.n_packets;

    ScenarioConfig base;
    base.dist_T = dist_T;
    base.dist_C = dist_C;
    base.n_packets = settings.n_packets;
    base.seed = settings.seed;
    base.T0 = settings.T0;
    base.C0 = settings.C0;
    base.validate();

    parallel_for(result.grid.size(), settings.threads, [&](std::size_t i) {
        ScenarioConfig config = base;
        config.policy = policy_for_lambda(kind, result.grid[i], dist_T.mean(), dist_C.mean());
        result.avg_aoi[i] = simulate(config).avg_aoi_trapezoid;
    });

    const auto best = std::min_element(result.avg_aoi.begin(), result.avg_aoi.end());
    const auto index = static_cast<std::size_t>(best - result.avg_aoi.begin());
    result.best_lambda = result.grid[index];
    result.best_aoi = *best;
    return result;
}

// ---------------------------------------------------------------------------

RatioPolicy parse_ratio_policy(std::string_view name) {
    if (name == "paoi-t") return RatioPolicy::PAoIThreshold;
    if (name == "paoi-tp") return RatioPolicy::PAoIThresholdPostponed;
    if (name == "long-wait") return RatioPolicy::LongWait;
    if (name == "long-wait-beta") return RatioPolicy::LongWaitBeta;
    throw std::invalid_argument("unknown ratio-sweep policy '" + std::string(name) + "'");
}

std::string to_string(RatioPolicy policy) {
    switch (policy) {
        case RatioPolicy::PAoIThreshold: return "paoi-t";
        case RatioPolicy::PAoIThresholdPostponed: return "paoi-tp";
        case RatioPolicy::LongWait: return "long-wait";
        case RatioPolicy::LongWaitBeta: return "long-wait-beta";
    }
    return {};
}

std::pair<double, double> split_means(double ratio, double total) {
    if (!std::isfinite(ratio) || !(ratio > 0.0)) throw std::invalid_argument("ratios must be > 0");
    if (!std::isfinite(total) || !(total > 0.0)) throw std::invalid_argument("total must be > 0");
    return {total * ratio / (1.0 + ratio), total / (1.0 + ratio)};
}

std::vector<RatioRow> ratio_sweep(const std::vector<RatioPolicy>& policies,
                                  const std::vector<double>& ratios, const RatioSettings& settings) {
    std::vector<RatioRow> rows;
    for (const double ratio : ratios) {
        const auto [mean_T, mean_C] = split_means(ratio, settings.total);
        const auto dist_T = Distribution::exponential(mean_T);
        const auto dist_C = Distribution::exponential(mean_C);
        for (const RatioPolicy policy : policies) {
            RatioRow row;
            row.ratio = ratio;
            row.policy = policy;
            if (policy == RatioPolicy::LongWaitBeta) {
                const BetaSolution beta = solve_beta(dist_T, dist_C, settings.mc_samples,
                                                     settings.beta_tol, settings.sweep.seed);
                ScenarioConfig config;
                config.dist_T = dist_T;
                config.dist_C = dist_C;
                config.policy = {PolicyKind::LongWait, beta.beta};
                config.n_packets = settings.sweep.n_packets;
                config.seed = settings.sweep.seed;
                config.T0 = settings.sweep.T0;
                config.C0 = settings.sweep.C0;
                row.best_param = beta.beta;
                row.best_aoi = simulate(config).avg_aoi_trapezoid;
            } else {
                const SweepKind kind = policy == RatioPolicy::PAoIThreshold
                                           ? SweepKind::PAoIThreshold
                                       : policy == RatioPolicy::PAoIThresholdPostponed
                                           ? SweepKind::PAoIThresholdPostponed
                                           : SweepKind::LongWaitByLambda;
                const SweepResult sweep = sweep_lambda(kind, dist_T, dist_C, settings.sweep);
                row.best_param = sweep.best_lambda;
                row.best_aoi = sweep.best_aoi;
            }
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace aoi
