#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "aoi/distributions.hpp"

namespace aoi {

/// What the source knows at a decision epoch. Optional fields are filled only
/// once the corresponding feedback has reached the source.
struct SourceView {
    double now = 0.0;
    double last_generation = 0.0;                 // t_{k-1}
    std::optional<double> last_transmission;      // T_{k-1}, from the arrival bit
    std::optional<double> processing_start;       // c_{k-1}
    std::optional<double> last_processing;        // C_{k-1}, from the delivery bit
    std::optional<double> delivery;               // d_{k-1}
    bool channel_busy = false;
    bool server_busy = false;
    int buffer_count = 0;
    Distribution dist_T = Distribution::exponential(1.0);
    Distribution dist_C = Distribution::exponential(1.0);

    // Throw CausalityViolation when the field is not yet known.
    double require_transmission() const;
    double require_processing_start() const;
    double require_processing() const;
    double require_delivery() const;
};

enum class PolicyKind { ZeroWait, LongWait, PAoIThreshold, PAoIThresholdPostponed };

struct PolicySpec {
    PolicyKind kind = PolicyKind::ZeroWait;
    double param = 0.0;  // beta for LongWait, lambda for the PAoI kinds

    /// Parses `zero-wait`, `long-wait:<beta>`, `paoi-t:<lambda>`, `paoi-tp:<lambda>`.
    static PolicySpec parse(std::string_view text);
    std::string to_string() const;
    void validate() const;

    friend bool operator==(const PolicySpec&, const PolicySpec&) = default;
};

struct PlanDecision {
    enum class Action { SendAt, DeferUntilDelivery, DeferUntilTime };
    Action action = Action::DeferUntilDelivery;
    double time = 0.0;  // meaningful for SendAt and DeferUntilTime

    static PlanDecision send_at(double t) { return {Action::SendAt, t}; }
    static PlanDecision defer_until_delivery() { return {Action::DeferUntilDelivery, 0.0}; }
    static PlanDecision defer_until(double t) { return {Action::DeferUntilTime, t}; }

    friend bool operator==(const PlanDecision&, const PlanDecision&) = default;
};

/// Threshold offset lambda - (E[T] + E[C]). Shared by the h-plan and by the
/// lambda axis of the long-wait policy so both round identically.
inline double lambda_to_beta(double lambda, double mean_T, double mean_C) noexcept {
    return lambda - (mean_T + mean_C);
}

// Individual rules. Each is a pure function of its arguments.

double long_wait_send_time(const SourceView& view, double beta);

/// Estimated peak age if packet k is sent at t once packet k-1 is delivered.
double estimate_peak_age_h(const SourceView& view, double t);

/// Estimated peak age if packet k is sent at t while packet k-1 is still in
/// service. Requires t >= c_{k-1}.
double estimate_peak_age_g(const SourceView& view, double t);

PlanDecision plan_at_processing_start(const SourceView& view, double lambda);
PlanDecision plan_at_delivery(const SourceView& view, double lambda);
PlanDecision zero_wait_plan(const SourceView& view);

/// True iff elapsed processing time l lies in the gate set, i.e.
/// l + E[T] >= E[C | C > l].
bool postponed_gate(double mean_T, const Distribution& dist_C, double l);

/// Smallest l in the gate set, or nullopt if the set is empty. Assumes the gate
/// condition switches at most once, which holds for every supported family.
std::optional<double> gate_opening(double mean_T, const Distribution& dist_C);

PlanDecision plan_at_processing_start_postponed(const SourceView& view, double lambda,
                                                std::optional<double> opening);

/// A configured policy bound to the distributions it was built for. Immutable;
/// safe to share between threads.
class Policy {
public:
    Policy(PolicySpec spec, const Distribution& dist_T, const Distribution& dist_C);

    const PolicySpec& spec() const noexcept { return spec_; }

    /// Consulted when packet k-1 starts processing.
    PlanDecision at_processing_start(const SourceView& view) const;
    /// Consulted when packet k-1 is delivered and no earlier plan has fired.
    /// Always returns SendAt.
    PlanDecision at_delivery(const SourceView& view) const;

private:
    PolicySpec spec_;
    std::optional<double> opening_;
};

}  // namespace aoi
