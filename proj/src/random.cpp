#include "aoi/random.hpp"

namespace aoi {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// SplitMix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

double uniform_at(std::uint64_t seed, Stream stream, std::uint64_t index) noexcept {
    std::uint64_t h = mix64(seed + kGolden);
    h = mix64(h ^ (static_cast<std::uint64_t>(stream) * 0xD1B54A32D192ED03ULL));
    h = mix64(h + (index + 1) * kGolden);
    // 53 random bits centred in their cell: never exactly 0 or 1.
    return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace aoi
