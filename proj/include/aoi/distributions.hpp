#pragma once

#include <string>
#include <string_view>

#include "aoi/random.hpp"

namespace aoi {

enum class Family { Exponential, Uniform, Deterministic };

/// A nonnegative delay law with closed-form mean and tail-conditional mean.
///
/// Instances are validated on construction and immutable afterwards, so every
/// query below is a pure function of the parameters.
class Distribution {
public:
    static Distribution exponential(double mean);
    static Distribution uniform(double lower, double upper);
    static Distribution deterministic(double value);

    /// Parses `exp:<mean>`, `uniform:<a>,<b>` or `det:<v>`.
    /// Throws std::invalid_argument on malformed text or invalid parameters.
    static Distribution parse(std::string_view text);

    Family family() const noexcept { return family_; }
    double mean() const noexcept;

    /// Smallest value outside the support from above: +inf for Exponential.
    double support_sup() const noexcept;

    /// E[X | X > l]. Throws QueryBeyondSupport when l >= support_sup().
    double tail_conditional_mean(double l) const;

    /// Inverse-CDF transform of a uniform variate in (0, 1).
    double quantile(double u) const noexcept;

    double sample(RandomStream& rng) const noexcept { return quantile(rng.next_uniform()); }

    /// Draw for a fixed counter position; the basis of index-keyed sampling.
    double sample_at(std::uint64_t seed, Stream stream, std::uint64_t index) const noexcept {
        return quantile(uniform_at(seed, stream, index));
    }

    /// Round-trips through parse().
    std::string to_string() const;

    /// Same law with every time multiplied by `factor` (> 0).
    Distribution scaled(double factor) const;

    friend bool operator==(const Distribution&, const Distribution&) = default;

private:
    Distribution(Family family, double p0, double p1) : family_(family), p0_(p0), p1_(p1) {}

    Family family_;
    double p0_;  // mean | lower | value
    double p1_;  // unused | upper | unused
};

}  // namespace aoi
