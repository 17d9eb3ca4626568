#include "aoi/distributions.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "aoi/errors.hpp"
#include "aoi/io.hpp"

namespace aoi {
namespace {

double parse_real(std::string_view text, std::string_view what) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || text.empty()) {
        throw std::invalid_argument("invalid " + std::string(what) + " '" + std::string(text) + "'");
    }
    return value;
}

}  // namespace

Distribution Distribution::exponential(double mean) {
    if (!std::isfinite(mean) || mean <= 0.0) {
        throw std::invalid_argument("exponential mean must be finite and > 0");
    }
    return Distribution(Family::Exponential, mean, 0.0);
}

Distribution Distribution::uniform(double lower, double upper) {
    if (!std::isfinite(lower) || !std::isfinite(upper) || lower < 0.0 || upper <= lower) {
        throw std::invalid_argument("uniform bounds must satisfy 0 <= a < b < inf");
    }
    return Distribution(Family::Uniform, lower, upper);
}

Distribution Distribution::deterministic(double value) {
    if (!std::isfinite(value) || value < 0.0) {
        throw std::invalid_argument("deterministic value must be finite and >= 0");
    }
    return Distribution(Family::Deterministic, value, 0.0);
}

Distribution Distribution::parse(std::string_view text) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) {
        throw std::invalid_argument("distribution '" + std::string(text) +
                                    "' must look like exp:<mean>, uniform:<a>,<b> or det:<v>");
    }
    const auto name = text.substr(0, colon);
    const auto args = text.substr(colon + 1);
    if (name == "exp") {
        return exponential(parse_real(args, "exponential mean"));
    }
    if (name == "det") {
        return deterministic(parse_real(args, "deterministic value"));
    }
    if (name == "uniform") {
        const auto comma = args.find(',');
        if (comma == std::string_view::npos) {
            throw std::invalid_argument("uniform needs two bounds: uniform:<a>,<b>");
        }
        return uniform(parse_real(args.substr(0, comma), "uniform lower bound"),
                       parse_real(args.substr(comma + 1), "uniform upper bound"));
    }
    throw std::invalid_argument("unknown distribution family '" + std::string(name) + "'");
}

double Distribution::mean() const noexcept {
    switch (family_) {
        case Family::Exponential: return p0_;
        case Family::Uniform: return 0.5 * (p0_ + p1_);
        case Family::Deterministic: return p0_;
    }
    return 0.0;
}

double Distribution::support_sup() const noexcept {
    switch (family_) {
        case Family::Exponential: return std::numeric_limits<double>::infinity();
        case Family::Uniform: return p1_;
        case Family::Deterministic: return p0_;
    }
    return 0.0;
}

double Distribution::tail_conditional_mean(double l) const {
    if (!(l < support_sup())) {
        throw QueryBeyondSupport("E[X | X > " + format_real(l) + "] is undefined for " + to_string());
    }
    switch (family_) {
        case Family::Exponential:
            // Memoryless: the overshoot above any l >= 0 is again Exp(mean).
            return l <= 0.0 ? p0_ : p0_ + l;
        case Family::Uniform:
            return l <= p0_ ? mean() : 0.5 * (l + p1_);
        case Family::Deterministic:
            return p0_;
    }
    return 0.0;
}

double Distribution::quantile(double u) const noexcept {
    switch (family_) {
        case Family::Exponential: return -p0_ * std::log(u);
        case Family::Uniform: return p0_ + (p1_ - p0_) * u;
        case Family::Deterministic: return p0_;
    }
    return 0.0;
}

std::string Distribution::to_string() const {
    switch (family_) {
        case Family::Exponential: return "exp:" + format_real(p0_);
        case Family::Uniform: return "uniform:" + format_real(p0_) + "," + format_real(p1_);
        case Family::Deterministic: return "det:" + format_real(p0_);
    }
    return {};
}

Distribution Distribution::scaled(double factor) const {
    if (!std::isfinite(factor) || factor <= 0.0) {
        throw std::invalid_argument("scale factor must be finite and > 0");
    }
    switch (family_) {
        case Family::Exponential: return exponential(p0_ * factor);
        case Family::Uniform: return uniform(p0_ * factor, p1_ * factor);
        case Family::Deterministic: return deterministic(p0_ * factor);
    }
    return *this;
}

}  // namespace aoi
