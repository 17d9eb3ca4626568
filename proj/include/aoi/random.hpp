#pragma once

#include <cstdint>

namespace aoi {

// Independent draw families. Each (seed, stream, index) triple maps to one
// fixed uniform variate, so simulations that share a seed see the same
// per-packet draws no matter in which order they are evaluated.
enum class Stream : std::uint64_t {
    Transmission = 1,
    Processing = 2,
    BetaTransmission = 3,
    BetaProcessing = 4,
    BetaCheckTransmission = 5,
    BetaCheckProcessing = 6,
    Test = 15,
};

/// Stateless counter-based generator: returns a uniform variate in the open
/// interval (0, 1) determined only by its arguments.
double uniform_at(std::uint64_t seed, Stream stream, std::uint64_t index) noexcept;

/// Sequential view over one counter-based stream. Copying a stream copies its
/// position; two copies produce the same continuation.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, Stream stream, std::uint64_t start = 0) noexcept
        : seed_(seed), stream_(stream), counter_(start) {}

    double next_uniform() noexcept { return uniform_at(seed_, stream_, counter_++); }

    std::uint64_t position() const noexcept { return counter_; }
    void seek(std::uint64_t position) noexcept { counter_ = position; }

private:
    std::uint64_t seed_;
    Stream stream_;
    std::uint64_t counter_;
};

}  // namespace aoi
