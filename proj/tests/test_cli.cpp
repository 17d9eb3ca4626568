#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "aoi/calibrate.hpp"
#include "aoi/cli.hpp"
#include "aoi/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = aoi::run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

class TempDir {
public:
    TempDir() {
        static int counter = 0;
        path_ = fs::temp_directory_path() /
                ("aoi_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    std::string str() const { return path_.string(); }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

double value_after(const std::string& text, const std::string& key) {
    const auto pos = text.find(key + " ");
    REQUIRE(pos != std::string::npos);
    return std::stod(text.substr(pos + key.size() + 1));
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        const auto end = text.find("\r\n", start);
        REQUIRE(end != std::string::npos);  // every record ends in CRLF
        lines.push_back(text.substr(start, end - start));
        start = end + 2;
    }
    return lines;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    return fields;
}

// Checks header, CRLF, field count and the %.17g rendering of every number.
void check_csv(const std::string& text, const std::string& header, std::size_t text_columns = 0) {
    const auto lines = split_lines(text);
    REQUIRE(!lines.empty());
    CHECK(lines.front() == header);
    const auto width = split_fields(header).size();
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto fields = split_fields(lines[i]);
        REQUIRE(fields.size() == width);
        for (std::size_t j = 0; j < fields.size(); ++j) {
            if (j == text_columns && text_columns != 0) continue;
            CHECK(fields[j].find_first_of("\",\r\n") == std::string::npos);
            const double v = std::stod(fields[j]);
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            CHECK(fields[j] == buf);
        }
    }
}

}  // namespace

TEST_CASE("cli: deterministic simulate examples") {
    TempDir dir;
    const auto lw = run({"simulate", "--policy", "long-wait:2", "--t", "det:2", "--c", "det:1", "--n", "10000",
                         "--seed", "1", "--out", dir.str()});
    REQUIRE(lw.code == 0);
    CHECK(std::abs(value_after(lw.out, "avg_aoi") - 4.5) <= 3.0 / 10000);

    const auto zw = run({"simulate", "--policy", "zero-wait", "--t", "det:2", "--c", "det:1", "--n", "10000",
                         "--seed", "1", "--out", dir.str()});
    REQUIRE(zw.code == 0);
    CHECK(std::abs(value_after(zw.out, "avg_aoi") - 4.0) <= 3.0 / 10000);

    const auto result = json::parse(slurp(dir / "simulate_result.json"));
    CHECK(result["avg_aoi_trapezoid"].get<double>() == doctest::Approx(4.0).epsilon(1e-3));
    CHECK(result["n"] == 10000);
    CHECK_FALSE(fs::exists(dir / "simulate_trace.csv"));
}

TEST_CASE("cli: usage and runtime errors") {
    TempDir dir;
    const auto zero = run({"simulate", "--policy", "zero-wait", "--n", "0", "--out", dir.str()});
    CHECK(zero.code == 2);
    CHECK(zero.err.find("n must be >= 1") != std::string::npos);
    CHECK(std::count(zero.err.begin(), zero.err.end(), '\n') == 1);

    CHECK(run({"simulate", "--out", dir.str()}).code == 2);
    CHECK(run({"simulate", "--policy", "paoi-t:x", "--out", dir.str()}).code == 2);
    CHECK(run({"simulate", "--policy", "zero-wait", "--t", "gamma:1", "--out", dir.str()}).code == 2);
    CHECK(run({"bogus"}).code == 2);
    CHECK(run({"sweep", "--interval", "4:1", "--n", "10", "--out", dir.str()}).code == 2);
    CHECK(run({"sweep", "--scenario", "fig9", "--n", "10", "--out", dir.str()}).code == 2);
    CHECK(run({"ratio-sweep", "--ratios", "0,1", "--n", "10", "--out", dir.str()}).code == 2);
    // Zero transmission time with zero wait sends twice at one instant.
    CHECK(run({"simulate", "--policy", "zero-wait", "--t", "det:0", "--c", "det:1", "--n", "10", "--out",
               dir.str()})
              .code == 1);
    CHECK(run({"--version"}).out == std::string(aoi::kToolVersion) + "\n");
}

TEST_CASE("cli: trace and result artifacts") {
    TempDir dir;
    REQUIRE(run({"simulate", "--policy", "paoi-tp:2.4", "--n", "500", "--seed", "3", "--trace", "--out",
                 dir.str()})
                .code == 0);
    const auto csv = slurp(dir / "simulate_trace.csv");
    check_csv(csv, "k,t,T,a,c,C,d,W,D,Q,A");
    CHECK(split_lines(csv).size() == 501);
    const auto manifest = json::parse(slurp(dir / "simulate_manifest.json"));
    CHECK(manifest["command"] == "simulate");
    CHECK(manifest["seed"] == 3);
    CHECK(manifest["version"] == aoi::kToolVersion);
    CHECK(manifest["config"]["policy"] == "paoi-tp:2.4");
    CHECK(manifest["outputs"] == json::array({"simulate_result.json", "simulate_trace.csv"}));
}

TEST_CASE("cli: sweep equivalences") {
    TempDir fig3, fig4;
    REQUIRE(run({"sweep", "--policies", "paoi-t,paoi-tp,long-wait", "--t", "exp:0.8", "--c", "exp:0.2",
                 "--interval", "1:4", "--step", "0.1", "--n", "3000", "--seed", "7", "--out", fig3.str()})
                .code == 0);
    const auto t = slurp(fig3 / "sweep_paoi-t.csv");
    CHECK(t == slurp(fig3 / "sweep_paoi-tp.csv"));
    CHECK(t != slurp(fig3 / "sweep_long-wait.csv"));
    check_csv(t, "lambda,avg_aoi");
    CHECK(split_lines(t).size() == 32);
    const auto summary = json::parse(slurp(fig3 / "sweep_paoi-t.json"));
    CHECK(summary["seed"] == 7);
    CHECK(summary["n_packets"] == 3000);

    REQUIRE(run({"sweep", "--scenario", "fig4", "--step", "0.1", "--n", "3000", "--seed", "7", "--out",
                 fig4.str()})
                .code == 0);
    CHECK(slurp(fig4 / "sweep_paoi-tp.csv") == slurp(fig4 / "sweep_long-wait.csv"));
    CHECK(slurp(fig4 / "sweep_paoi-t.csv") != slurp(fig4 / "sweep_long-wait.csv"));
    const auto manifest = json::parse(slurp(fig4 / "sweep_manifest.json"));
    CHECK(manifest["outputs"].size() == 6);
}

TEST_CASE("cli: ratio sweep") {
    TempDir dir;
    const auto single = run({"ratio-sweep", "--ratios", "4", "--step", "0.25", "--n", "2000", "--out", dir.str()});
    REQUIRE(single.code == 0);
    const auto csv = slurp(dir / "ratio_sweep.csv");
    CHECK(single.out == csv);
    check_csv(csv, "ratio,policy,best_param,best_aoi", 1);
    const auto lines = split_lines(csv);
    REQUIRE(lines.size() == 3);
    CHECK(split_fields(lines[1])[1] == "paoi-tp");
    CHECK(split_fields(lines[2])[1] == "long-wait");
}

TEST_CASE("cli: ratio sweep scales with the total") {
    // Doubling every mean doubles every draw exactly, so thresholds and ages double.
    TempDir unit, doubled;
    const std::vector<std::string> common = {"ratio-sweep", "--ratios", "0.25,4", "--policies",
                                             "long-wait,paoi-tp", "--n", "4000", "--seed", "9"};
    auto unit_args = common;
    unit_args.insert(unit_args.end(), {"--step", "0.05", "--out", unit.str()});
    auto doubled_args = common;
    doubled_args.insert(doubled_args.end(), {"--total", "2", "--t0", "2", "--step", "0.1", "--out", doubled.str()});
    REQUIRE(run(unit_args).code == 0);
    REQUIRE(run(doubled_args).code == 0);

    const auto a = split_lines(slurp(unit / "ratio_sweep.csv"));
    const auto b = split_lines(slurp(doubled / "ratio_sweep.csv"));
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 1; i < a.size(); ++i) {
        const auto fa = split_fields(a[i]);
        const auto fb = split_fields(b[i]);
        CAPTURE(a[i]);
        CHECK(fa[1] == fb[1]);
        CHECK(std::stod(fb[2]) == doctest::Approx(2 * std::stod(fa[2])).epsilon(1e-12));
        CHECK(std::stod(fb[3]) == doctest::Approx(2 * std::stod(fa[3])).epsilon(1e-6));
    }
}

TEST_CASE("time rescaling of a simulation trace") {
    for (const char* policy : {"long-wait", "paoi-t", "paoi-tp"}) {
        CAPTURE(policy);
        aoi::ScenarioConfig unit;
        unit.dist_T = aoi::Distribution::exponential(0.3);
        unit.dist_C = aoi::Distribution::uniform(0.0, 1.4);
        unit.policy = aoi::PolicySpec::parse(std::string(policy) + ":1.9");
        unit.n_packets = 3000;
        unit.seed = 4;
        aoi::ScenarioConfig scaled = unit;
        scaled.dist_T = unit.dist_T.scaled(2.0);
        scaled.dist_C = unit.dist_C.scaled(2.0);
        scaled.policy.param *= 2.0;
        scaled.T0 = 2.0 * unit.T0;
        const auto a = aoi::simulate(unit, {true, false});
        const auto b = aoi::simulate(scaled, {true, false});
        for (std::size_t k = 0; k < a.trace.size(); ++k) {
            REQUIRE(b.trace[k].T == 2.0 * a.trace[k].T);
            REQUIRE(b.trace[k].C == 2.0 * a.trace[k].C);
            REQUIRE(b.trace[k].t == doctest::Approx(2.0 * a.trace[k].t).epsilon(1e-9));
        }
        CHECK(b.avg_aoi_trapezoid == doctest::Approx(2.0 * a.avg_aoi_trapezoid).epsilon(1e-9));
    }
}

TEST_CASE("cli: calibrate-beta") {
    const auto det = run({"calibrate-beta", "--t", "det:2", "--c", "det:1", "--mc", "10000"});
    REQUIRE(det.code == 0);
    const auto report = json::parse(det.out);
    CHECK(report["beta"].get<double>() == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(report["lambda"].get<double>() == doctest::Approx(5.0).epsilon(1e-8));
    CHECK(report["mc_samples"] == 10000);

    // The exact root for this pair is 0.90227 (see the calibrate tests).
    const auto e = run({"calibrate-beta", "--t", "exp:0.8", "--c", "exp:0.2", "--mc", "1000000"});
    REQUIRE(e.code == 0);
    CHECK(std::abs(json::parse(e.out)["beta"].get<double>() - 0.9022662126407663) < 0.005);

    const auto degenerate = run({"calibrate-beta", "--t", "det:0", "--c", "det:0"});
    CHECK(degenerate.code == 1);
    CHECK(degenerate.err.find("degenerate") != std::string::npos);
    CHECK(run({"calibrate-beta", "--mc", "10"}).code == 2);
}

TEST_CASE("cli: replay reproduces outputs byte for byte") {
    const std::vector<std::vector<std::string>> commands = {
        {"simulate", "--policy", "paoi-t:2.2", "--t", "uniform:0,1.6", "--c", "exp:0.2", "--n", "800",
         "--seed", "12", "--trace"},
        {"sweep", "--scenario", "fig5", "--policies", "paoi-tp,long-wait", "--step", "0.5", "--n", "800"},
        {"ratio-sweep", "--ratios", "0.5,2", "--policies", "paoi-t,long-wait-beta", "--step", "0.5", "--n",
         "800", "--mc", "20000"},
        {"calibrate-beta", "--t", "exp:0.5", "--c", "uniform:0,1", "--mc", "20000"},
    };
    const std::vector<std::string> manifests = {"simulate_manifest.json", "sweep_manifest.json",
                                                "ratio_sweep_manifest.json", "calibrate_beta_manifest.json"};
    for (std::size_t i = 0; i < commands.size(); ++i) {
        CAPTURE(commands[i][0]);
        TempDir first, second;
        auto args = commands[i];
        args.insert(args.end(), {"--out", first.str()});
        REQUIRE(run(args).code == 0);
        const auto manifest_path = first / manifests[i];
        REQUIRE(fs::exists(manifest_path));
        REQUIRE(run({"replay", manifest_path.string(), "--out", second.str()}).code == 0);

        std::size_t files = 0;
        for (const auto& entry : fs::directory_iterator(first.str())) {
            const auto name = entry.path().filename().string();
            CAPTURE(name);
            REQUIRE(fs::exists(second / name));
            CHECK(slurp(entry.path()) == slurp(second / name));
            ++files;
        }
        CHECK(files >= 2);
        const auto listed = json::parse(slurp(manifest_path))["outputs"];
        CHECK(listed.size() + 1 == files);
    }
    CHECK(run({"replay", "/nonexistent/manifest.json"}).code == 2);
}
