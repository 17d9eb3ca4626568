#include "aoi/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "aoi/errors.hpp"
#include "aoi/io.hpp"

namespace aoi {

void ScenarioConfig::validate() const {
    if (n_packets < 1) throw std::invalid_argument("n must be >= 1");
    if (!std::isfinite(T0) || T0 < 0.0) throw std::invalid_argument("t0 must be finite and >= 0");
    if (!std::isfinite(C0) || C0 < 0.0) throw std::invalid_argument("c0 must be finite and >= 0");
    if (!(dist_T.mean() + dist_C.mean() > 0.0)) {
        throw std::invalid_argument("E[T] + E[C] must be > 0");
    }
    policy.validate();
}

double processing_start(double t, double T, double c_prev, double C_prev) noexcept {
    return std::max(t + T, c_prev + C_prev);
}

double trapezoid_area(double t_prev, double t, double d) noexcept {
    // 1/2 (d - t_prev)^2 - 1/2 (d - t)^2, factored to avoid cancellation
    // between two large squares late in a run.
    return 0.5 * (t - t_prev) * ((d - t_prev) + (d - t));
}

namespace {

// Area under the age curve on [d_prev, d] while the freshest delivered packet
// was generated at t_gen.
double sawtooth_area(double t_gen, double d_prev, double d) noexcept {
    return 0.5 * (d - d_prev) * ((d - t_gen) + (d_prev - t_gen));
}

struct Timeline {
    double t, T, a, c, C, d;
};

SourceView view_at(const Timeline& prev, double now, bool delivered, const ScenarioConfig& config) {
    SourceView view;
    view.now = now;
    view.last_generation = prev.t;
    view.last_transmission = prev.T;
    view.processing_start = prev.c;
    if (delivered) {
        view.last_processing = prev.C;
        view.delivery = prev.d;
    }
    view.channel_busy = false;
    view.server_busy = !delivered;
    view.buffer_count = 0;
    view.dist_T = config.dist_T;
    view.dist_C = config.dist_C;
    return view;
}

// Compares a view with the omniscient record of packets 0..k-1.
void check_view(const SourceView& view, const Timeline& prev, std::int64_t k) {
    const double now = view.now;
    auto fail = [&](const char* what) {
        throw CausalityViolation(std::string("view for packet ") + std::to_string(k) + " at time " +
                                 format_real(now) + ": " + what);
    };
    if (view.last_generation > now) fail("generation time from the future");
    if (view.last_transmission && !(prev.a <= now)) fail("T_{k-1} before the arrival feedback");
    if (view.processing_start && !(prev.c <= now)) fail("c_{k-1} before processing started");
    if (view.last_processing && !(prev.d <= now)) fail("C_{k-1} before the delivery feedback");
    if (view.delivery && !(prev.d <= now)) fail("d_{k-1} before the delivery feedback");
    if ((view.last_transmission && *view.last_transmission != prev.T) ||
        (view.processing_start && *view.processing_start != prev.c) ||
        (view.last_processing && *view.last_processing != prev.C) ||
        (view.delivery && *view.delivery != prev.d)) {
        fail("field disagrees with the realized timeline");
    }
    // Packets 0..k-1 have all arrived; k-1 of them are delivered before the
    // current one, which is in service on [c, d).
    const std::int64_t arrived = k;
    const std::int64_t delivered = (k - 1) + (prev.d <= now ? 1 : 0);
    const std::int64_t busy = (prev.c <= now && now < prev.d) ? 1 : 0;
    if (view.buffer_count != arrived - delivered - busy) fail("buffer count");
    if (view.server_busy != (busy == 1)) fail("server state");
}

}  // namespace

AverageAoI average_aoi(const std::vector<PacketRecord>& trace, double t0, double d0) {
    if (trace.empty()) throw std::invalid_argument("average_aoi needs at least one packet");
    double area_q = 0.0;
    double area_curve = 0.0;
    double t_prev = t0;
    double d_prev = d0;
    for (const auto& p : trace) {
        area_q += trapezoid_area(t_prev, p.t, p.d);
        area_curve += sawtooth_area(t_prev, d_prev, p.d);
        t_prev = p.t;
        d_prev = p.d;
    }
    AverageAoI out;
    out.trapezoid = area_q / (trace.back().t - t0);
    out.integral = area_curve / (trace.back().d - d0);
    return out;
}

SimulationResult simulate(const ScenarioConfig& config, const SimulateOptions& options) {
    config.validate();
    const Policy policy(config.policy, config.dist_T, config.dist_C);

    Timeline prev;
    prev.t = config.t0();
    prev.T = config.T0;
    prev.c = config.c0();
    prev.a = prev.c;  // packet 0 starts processing on arrival; t0 + T0 can round away from c0
    prev.C = config.C0;
    prev.d = prev.c + prev.C;
    const double t0 = prev.t;
    const double d0 = prev.d;

    SimulationResult result;
    result.n = config.n_packets;
    if (options.keep_trace) result.trace.reserve(static_cast<std::size_t>(config.n_packets));

    double area_q = 0.0;
    double area_curve = 0.0;
    double sum_peak = 0.0;
    double sum_buffer_wait = 0.0;
    std::int64_t buffered = 0;

    for (std::int64_t k = 1; k <= config.n_packets; ++k) {
        std::optional<double> send;

        // Epoch (i): packet k-1 starts processing. Skipped when it is delivered
        // at the same instant; both feedback bits then arrive together.
        if (prev.d > prev.c) {
            const SourceView view = view_at(prev, prev.c, false, config);
            if (options.check_causality) check_view(view, prev, k);
            const PlanDecision plan = policy.at_processing_start(view);
            if (plan.action != PlanDecision::Action::DeferUntilDelivery) {
                if (!(plan.time >= prev.c)) {
                    throw CausalityViolation("plan for packet " + std::to_string(k) +
                                             " precedes its decision epoch");
                }
                // A plan fires unless the delivery strictly precedes it.
                if (plan.time <= prev.d) send = plan.time;
            }
        }

        // Epoch (ii): packet k-1 delivered with no plan fired yet.
        if (!send) {
            const SourceView view = view_at(prev, prev.d, true, config);
            if (options.check_causality) check_view(view, prev, k);
            const PlanDecision plan = policy.at_delivery(view);
            if (plan.action != PlanDecision::Action::SendAt || !(plan.time >= prev.d)) {
                throw CausalityViolation("delivery-epoch plan for packet " + std::to_string(k) +
                                         " must send at or after the delivery");
            }
            send = plan.time;
        }

        PacketRecord p;
        p.k = k;
        p.t = *send;
        p.W = p.t - prev.a;  // a_{k-1} = t_{k-1} + T_{k-1}
        if (!(p.W >= 0.0) || !(p.t > prev.t)) {
            throw NonPositiveWait("packet " + std::to_string(k) + " generated at " +
                                  format_real(p.t) + " after packet generated at " +
                                  format_real(prev.t) + " with transmission " + format_real(prev.T));
        }
        p.T = config.dist_T.sample_at(config.seed, Stream::Transmission, static_cast<std::uint64_t>(k));
        p.a = p.t + p.T;
        p.c = processing_start(p.t, p.T, prev.c, prev.C);
        p.C = config.dist_C.sample_at(config.seed, Stream::Processing, static_cast<std::uint64_t>(k));
        p.d = p.c + p.C;
        p.D = p.c - p.a;
        p.Q = trapezoid_area(prev.t, p.t, p.d);
        p.A = p.d - prev.t;

        area_q += p.Q;
        area_curve += sawtooth_area(prev.t, prev.d, p.d);
        sum_peak += p.A;
        sum_buffer_wait += p.D;
        // Every plan is at or after c_{k-1}, so earlier packets are out of the
        // buffer by the time packet k arrives; only packet k itself can wait.
        if (p.D > 0.0) {
            ++buffered;
            result.max_buffer = 1;
        }

        prev = Timeline{p.t, p.T, p.a, p.c, p.C, p.d};
        if (options.keep_trace) result.trace.push_back(p);
    }

    const double n = static_cast<double>(config.n_packets);
    result.avg_aoi_trapezoid = area_q / (prev.t - t0);
    result.avg_aoi_integral = area_curve / (prev.d - d0);
    result.avg_paoi = sum_peak / n;
    result.mean_buffer_wait = sum_buffer_wait / n;
    result.frac_buffered = static_cast<double>(buffered) / n;
    return result;
}

}  // namespace aoi
