#include "aoi/policies.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

#include "aoi/errors.hpp"
#include "aoi/io.hpp"

namespace aoi {
namespace {

constexpr double kRootTolerance = 1e-9;

double require(const std::optional<double>& field, const char* name, double now) {
    if (!field) {
        throw CausalityViolation(std::string(name) + " is not known to the source at time " +
                                 format_real(now));
    }
    return *field;
}

}  // namespace

double SourceView::require_transmission() const {
    return require(last_transmission, "T_{k-1}", now);
}
double SourceView::require_processing_start() const {
    return require(processing_start, "c_{k-1}", now);
}
double SourceView::require_processing() const { return require(last_processing, "C_{k-1}", now); }
double SourceView::require_delivery() const { return require(delivery, "d_{k-1}", now); }

// ---------------------------------------------------------------------------
// PolicySpec

PolicySpec PolicySpec::parse(std::string_view text) {
    const auto colon = text.find(':');
    const auto name = text.substr(0, colon);
    std::optional<double> param;
    if (colon != std::string_view::npos) {
        const auto arg = text.substr(colon + 1);
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), value);
        if (arg.empty() || ec != std::errc{} || ptr != arg.data() + arg.size()) {
            throw std::invalid_argument("invalid policy parameter in '" + std::string(text) + "'");
        }
        param = value;
    }

    PolicySpec spec;
    if (name == "zero-wait") {
        if (param) throw std::invalid_argument("zero-wait takes no parameter");
        spec.kind = PolicyKind::ZeroWait;
    } else if (name == "long-wait") {
        spec.kind = PolicyKind::LongWait;
    } else if (name == "paoi-t") {
        spec.kind = PolicyKind::PAoIThreshold;
    } else if (name == "paoi-tp") {
        spec.kind = PolicyKind::PAoIThresholdPostponed;
    } else {
        throw std::invalid_argument("unknown policy '" + std::string(name) + "'");
    }
    if (spec.kind != PolicyKind::ZeroWait) {
        if (!param) throw std::invalid_argument("policy '" + std::string(name) + "' needs a parameter");
        spec.param = *param;
    }
    spec.validate();
    return spec;
}

std::string PolicySpec::to_string() const {
    switch (kind) {
        case PolicyKind::ZeroWait: return "zero-wait";
        case PolicyKind::LongWait: return "long-wait:" + format_real(param);
        case PolicyKind::PAoIThreshold: return "paoi-t:" + format_real(param);
        case PolicyKind::PAoIThresholdPostponed: return "paoi-tp:" + format_real(param);
    }
    return {};
}

void PolicySpec::validate() const {
    if (!std::isfinite(param)) throw std::invalid_argument("policy parameter must be finite");
    if ((kind == PolicyKind::PAoIThreshold || kind == PolicyKind::PAoIThresholdPostponed) &&
        param < 0.0) {
        throw std::invalid_argument("peak-age threshold must be >= 0");
    }
}

// ---------------------------------------------------------------------------
// Rules

double long_wait_send_time(const SourceView& view, double beta) {
    // t_{k-1} + max(beta, T_{k-1} + C_{k-1}) when D_{k-1} = 0, which always
    // holds under this policy. Written against d_{k-1} so that it rounds the
    // same way as the h-plan of the threshold policies.
    return std::max(view.require_delivery(), view.last_generation + beta);
}

double estimate_peak_age_h(const SourceView& view, double t) {
    return t + view.dist_T.mean() + view.dist_C.mean() - view.last_generation;
}

double estimate_peak_age_g(const SourceView& view, double t) {
    const double c = view.require_processing_start();
    if (t < c) {
        throw std::invalid_argument("g-estimate needs t >= c_{k-1}");
    }
    const double expected_start =
        std::max(t + view.dist_T.mean(), c + view.dist_C.tail_conditional_mean(t - c));
    return expected_start + view.dist_C.mean() - view.last_generation;
}

PlanDecision plan_at_processing_start(const SourceView& view, double lambda) {
    const double c = view.require_processing_start();
    if (!(view.dist_C.support_sup() > 0.0)) {
        // Zero processing time: the packet is delivered the instant it starts.
        return PlanDecision::defer_until_delivery();
    }
    if (estimate_peak_age_g(view, c) >= lambda) {
        return PlanDecision::send_at(c);
    }

    const double mean_T = view.dist_T.mean();
    const double mean_C = view.dist_C.mean();
    // The g-estimate is at least t + E[T] + E[C] - t_{k-1}, so the threshold is
    // crossed no later than c + horizon.
    const double horizon = lambda + 10.0 * (mean_T + mean_C);
    double hi = c + horizon;

    const double sup = view.dist_C.support_sup();
    if (sup <= horizon) {
        // Past c + sup packet k-1 is certainly delivered. Use the left limit of
        // the estimate at the support edge instead of conditioning on an
        // impossible event.
        const double edge = std::max(c + sup + mean_T, c + sup) + mean_C - view.last_generation;
        if (edge < lambda) {
            return PlanDecision::defer_until_delivery();
        }
        hi = c + sup;
    }

    double lo = c;
    while (hi - lo > kRootTolerance) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) break;
        if (estimate_peak_age_g(view, mid) >= lambda) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return PlanDecision::send_at(hi);
}

PlanDecision plan_at_delivery(const SourceView& view, double lambda) {
    const double offset = lambda_to_beta(lambda, view.dist_T.mean(), view.dist_C.mean());
    return PlanDecision::send_at(std::max(view.require_delivery(), view.last_generation + offset));
}

PlanDecision zero_wait_plan(const SourceView& view) {
    return PlanDecision::send_at(view.require_processing_start());
}

bool postponed_gate(double mean_T, const Distribution& dist_C, double l) {
    if (dist_C.family() == Family::Exponential) {
        // E[C | C > l] = E[C] + l, so the l terms cancel.
        return mean_T >= dist_C.mean();
    }
    return l + mean_T >= dist_C.tail_conditional_mean(l);
}

std::optional<double> gate_opening(double mean_T, const Distribution& dist_C) {
    if (dist_C.family() == Family::Exponential) {
        return mean_T >= dist_C.mean() ? std::optional<double>(0.0) : std::nullopt;
    }
    if (postponed_gate(mean_T, dist_C, 0.0)) {
        return 0.0;
    }
    // Bounded support: l + E[T] - E[C | C > l] tends to E[T] at the edge.
    const double sup = dist_C.support_sup();
    if (!(mean_T > 0.0)) {
        return std::nullopt;
    }
    double lo = 0.0;
    double hi = sup;
    for (int i = 0; i < 200 && hi - lo > 1e-12 * std::max(1.0, sup); ++i) {
        const double mid = lo + 0.5 * (hi - lo);
        if (postponed_gate(mean_T, dist_C, mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

PlanDecision plan_at_processing_start_postponed(const SourceView& view, double lambda,
                                                std::optional<double> opening) {
    if (!opening) {
        return PlanDecision::defer_until_delivery();
    }
    const PlanDecision planned = plan_at_processing_start(view, lambda);
    if (planned.action != PlanDecision::Action::SendAt) {
        return planned;
    }
    const double c = view.require_processing_start();
    const double elapsed = planned.time - c;
    if (elapsed >= view.dist_C.support_sup() ||
        postponed_gate(view.dist_T.mean(), view.dist_C, elapsed)) {
        return planned;
    }
    return PlanDecision::defer_until(c + *opening);
}

// ---------------------------------------------------------------------------
// Policy

Policy::Policy(PolicySpec spec, const Distribution& dist_T, const Distribution& dist_C)
    : spec_(spec) {
    spec_.validate();
    if (spec_.kind == PolicyKind::PAoIThresholdPostponed) {
        opening_ = gate_opening(dist_T.mean(), dist_C);
    }
}

PlanDecision Policy::at_processing_start(const SourceView& view) const {
    switch (spec_.kind) {
        case PolicyKind::ZeroWait: return zero_wait_plan(view);
        case PolicyKind::LongWait: return PlanDecision::defer_until_delivery();
        case PolicyKind::PAoIThreshold: return plan_at_processing_start(view, spec_.param);
        case PolicyKind::PAoIThresholdPostponed:
            return plan_at_processing_start_postponed(view, spec_.param, opening_);
    }
    return PlanDecision::defer_until_delivery();
}

PlanDecision Policy::at_delivery(const SourceView& view) const {
    switch (spec_.kind) {
        case PolicyKind::ZeroWait: return PlanDecision::send_at(view.require_delivery());
        case PolicyKind::LongWait: return PlanDecision::send_at(long_wait_send_time(view, spec_.param));
        case PolicyKind::PAoIThreshold:
        case PolicyKind::PAoIThresholdPostponed: return plan_at_delivery(view, spec_.param);
    }
    return PlanDecision::send_at(view.require_delivery());
}

}  // namespace aoi
