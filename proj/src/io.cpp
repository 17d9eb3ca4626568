#include "aoi/io.hpp"

#include <array>
#include <charconv>
#include <ostream>

namespace aoi {
namespace {

constexpr const char* kEol = "\r\n";

}  // namespace

std::string format_real(double x) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), ptr);
}

std::string format_csv_real(double x) {
    std::array<char, 64> buf{};
    auto [ptr, ec] =
        std::to_chars(buf.data(), buf.data() + buf.size(), x, std::chars_format::general, 17);
    return std::string(buf.data(), ptr);
}

void write_trace_csv(std::ostream& out, const std::vector<PacketRecord>& trace) {
    out << "k,t,T,a,c,C,d,W,D,Q,A" << kEol;
    for (const auto& p : trace) {
        out << p.k;
        for (const double v : {p.t, p.T, p.a, p.c, p.C, p.d, p.W, p.D, p.Q, p.A}) {
            out << ',' << format_csv_real(v);
        }
        out << kEol;
    }
}

void write_sweep_csv(std::ostream& out, const SweepResult& sweep) {
    out << "lambda,avg_aoi" << kEol;
    for (std::size_t i = 0; i < sweep.grid.size(); ++i) {
        out << format_csv_real(sweep.grid[i]) << ',' << format_csv_real(sweep.avg_aoi[i]) << kEol;
    }
}

void write_ratio_csv(std::ostream& out, const std::vector<RatioRow>& rows) {
    out << "ratio,policy,best_param,best_aoi" << kEol;
    for (const auto& row : rows) {
        out << format_csv_real(row.ratio) << ',' << to_string(row.policy) << ','
            << format_csv_real(row.best_param) << ',' << format_csv_real(row.best_aoi) << kEol;
    }
}

nlohmann::json to_json(const SimulationResult& result) {
    return nlohmann::json{
        {"n", result.n},
        {"avg_aoi_trapezoid", result.avg_aoi_trapezoid},
        {"avg_aoi_integral", result.avg_aoi_integral},
        {"avg_paoi", result.avg_paoi},
        {"mean_buffer_wait", result.mean_buffer_wait},
        {"frac_buffered", result.frac_buffered},
        {"max_buffer", result.max_buffer},
    };
}

nlohmann::json sweep_summary(const SweepResult& sweep) {
    return nlohmann::json{
        {"best_lambda", sweep.best_lambda},
        {"best_aoi", sweep.best_aoi},
        {"seed", sweep.seed},
        {"n_packets", sweep.n_packets},
    };
}

nlohmann::json to_json(const BetaSolution& beta) {
    return nlohmann::json{
        {"beta", beta.beta},
        {"residual", beta.residual},
        {"mc_samples", beta.mc_samples},
    };
}

}  // namespace aoi
