#include "aoi/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "aoi/calibrate.hpp"
#include "aoi/distributions.hpp"
#include "aoi/engine.hpp"
#include "aoi/errors.hpp"
#include "aoi/io.hpp"

namespace aoi {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Scenario {
    std::string t;
    std::string c;
};

// Figure set-ups with E[T] + E[C] = 1. Uniform processing is Uniform(0, 2 E[C]).
const std::map<std::string, Scenario>& sweep_scenarios() {
    static const std::map<std::string, Scenario> table = {
        {"fig3", {"exp:0.8", "exp:0.2"}},
        {"fig4", {"exp:0.2", "exp:0.8"}},
        {"fig5", {"exp:0.8", "uniform:0,0.4"}},
        {"fig6", {"exp:0.2", "uniform:0,1.6"}},
    };
    return table;
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, sep)) parts.push_back(item);
    if (!text.empty() && text.back() == sep) parts.emplace_back();
    return parts;
}

double to_real(const std::string& text, const std::string& what) {
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size()) {
        throw std::invalid_argument("invalid " + what + " '" + text + "'");
    }
    return value;
}

std::pair<double, double> parse_interval(const std::string& text) {
    const auto parts = split(text, ':');
    if (parts.size() != 2) throw std::invalid_argument("interval must look like lo:hi");
    const double lo = to_real(parts[0], "interval bound");
    const double hi = to_real(parts[1], "interval bound");
    if (!(lo >= 0.0) || !(hi >= lo) || !std::isfinite(hi)) {
        throw std::invalid_argument("interval " + text + " must satisfy 0 <= lo <= hi");
    }
    return {lo, hi};
}

std::vector<double> parse_reals(const std::string& text, const std::string& what) {
    std::vector<double> values;
    for (const auto& part : split(text, ',')) values.push_back(to_real(part, what));
    if (values.empty()) throw std::invalid_argument(what + " list is empty");
    return values;
}

unsigned sweep_threads() {
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    if (const char* cap = std::getenv("AOI_SCHED_THREADS")) {
        char* end = nullptr;
        const long value = std::strtol(cap, &end, 10);
        if (end != cap && *end == '\0' && value >= 1) {
            threads = std::min<unsigned>(threads, static_cast<unsigned>(value));
        }
    }
    return threads;
}

class OutputDir {
public:
    explicit OutputDir(fs::path root) : root_(std::move(root)) { fs::create_directories(root_); }

    std::ofstream open(const std::string& name) {
        std::ofstream file(root_ / name, std::ios::binary | std::ios::trunc);
        if (!file) throw Error("cannot write " + (root_ / name).string());
        written_.push_back(name);
        return file;
    }

    void write_json(const std::string& name, const json& value) {
        auto file = open(name);
        file << value.dump(2) << '\n';
    }

    // The manifest lists every file written so far.
    void write_manifest(const std::string& name, const std::string& command,
                        const std::vector<std::string>& args, const json& config,
                        std::uint64_t seed) {
        json manifest{
            {"command", command},
            {"version", kToolVersion},
            {"seed", seed},
            {"config", config},
            {"args", args},
            {"outputs", written_},
        };
        std::ofstream file(root_ / name, std::ios::binary | std::ios::trunc);
        if (!file) throw Error("cannot write " + (root_ / name).string());
        file << manifest.dump(2) << '\n';
    }

private:
    fs::path root_;
    std::vector<std::string> written_;
};

// ---------------------------------------------------------------------------

struct SimulateArgs {
    std::string policy;
    std::string t = "exp:0.8";
    std::string c = "exp:0.2";
    std::int64_t n = 100000;
    std::uint64_t seed = 0;
    double t0 = 1.0;
    double c0 = 0.0;
    std::string out = ".";
    bool trace = false;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
    ScenarioConfig config;
    config.dist_T = Distribution::parse(a.t);
    config.dist_C = Distribution::parse(a.c);
    config.policy = PolicySpec::parse(a.policy);
    config.n_packets = a.n;
    config.seed = a.seed;
    config.T0 = a.t0;
    config.C0 = a.c0;
    config.validate();

    const SimulationResult result = simulate(config, SimulateOptions{a.trace, false});

    OutputDir dir(a.out);
    dir.write_json("simulate_result.json", to_json(result));
    if (a.trace) {
        auto file = dir.open("simulate_trace.csv");
        write_trace_csv(file, result.trace);
    }
    std::vector<std::string> args = {
        "simulate", "--policy", config.policy.to_string(), "--t", config.dist_T.to_string(),
        "--c", config.dist_C.to_string(), "--n", std::to_string(config.n_packets),
        "--seed", std::to_string(config.seed), "--t0", format_real(config.T0),
        "--c0", format_real(config.C0)};
    if (a.trace) args.emplace_back("--trace");
    const json resolved{{"policy", config.policy.to_string()},
                        {"t", config.dist_T.to_string()},
                        {"c", config.dist_C.to_string()},
                        {"n", config.n_packets},
                        {"t0", config.T0},
                        {"c0", config.C0},
                        {"trace", a.trace}};
    dir.write_manifest("simulate_manifest.json", "simulate", args, resolved, config.seed);

    out << "avg_aoi " << format_csv_real(result.avg_aoi_trapezoid) << '\n'
        << "avg_aoi_integral " << format_csv_real(result.avg_aoi_integral) << '\n'
        << "avg_paoi " << format_csv_real(result.avg_paoi) << '\n'
        << "frac_buffered " << format_csv_real(result.frac_buffered) << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct SweepArgs {
    std::string scenario;
    std::string policies = "paoi-t,paoi-tp,long-wait";
    std::string t = "exp:0.8";
    std::string c = "exp:0.2";
    std::string interval;  // default E[T]+E[C] : 4 (E[T]+E[C])
    std::optional<double> step;
    std::int64_t n = 100000;
    std::uint64_t seed = 0;
    double t0 = 1.0;
    double c0 = 0.0;
    std::string out = ".";
};

int cmd_sweep(SweepArgs a, const CLI::App& app, std::ostream& out) {
    if (!a.scenario.empty()) {
        const auto& table = sweep_scenarios();
        const auto it = table.find(a.scenario);
        if (it == table.end()) {
            throw std::invalid_argument("sweep scenario must be one of fig3, fig4, fig5, fig6");
        }
        if (app.count("--t") == 0) a.t = it->second.t;
        if (app.count("--c") == 0) a.c = it->second.c;
    }
    const auto dist_T = Distribution::parse(a.t);
    const auto dist_C = Distribution::parse(a.c);
    const double total = dist_T.mean() + dist_C.mean();
    if (!(total > 0.0)) throw std::invalid_argument("E[T] + E[C] must be > 0");

    std::vector<SweepKind> kinds;
    for (const auto& name : split(a.policies, ',')) kinds.push_back(parse_sweep_kind(name));
    if (kinds.empty()) throw std::invalid_argument("no policies given");

    SweepSettings settings;
    std::tie(settings.lo, settings.hi) =
        a.interval.empty() ? std::pair{total, 4.0 * total} : parse_interval(a.interval);
    settings.step = a.step.value_or(0.025 * total);
    settings.n_packets = a.n;
    settings.seed = a.seed;
    settings.T0 = a.t0;
    settings.C0 = a.c0;
    settings.threads = sweep_threads();
    lambda_grid(settings.lo, settings.hi, settings.step);  // validates before any work
    if (a.n < 1) throw std::invalid_argument("n must be >= 1");

    std::vector<SweepResult> sweeps;
    for (const SweepKind kind : kinds) sweeps.push_back(sweep_lambda(kind, dist_T, dist_C, settings));

    OutputDir dir(a.out);
    std::string policy_list;
    for (const auto& sweep : sweeps) {
        const std::string name = to_string(sweep.kind);
        {
            auto file = dir.open("sweep_" + name + ".csv");
            write_sweep_csv(file, sweep);
        }
        dir.write_json("sweep_" + name + ".json", sweep_summary(sweep));
        policy_list += (policy_list.empty() ? "" : ",") + name;
        out << name << " best_lambda " << format_csv_real(sweep.best_lambda) << " best_aoi "
            << format_csv_real(sweep.best_aoi) << '\n';
    }
    const std::string interval = format_real(settings.lo) + ":" + format_real(settings.hi);
    std::vector<std::string> args = {
        "sweep", "--policies", policy_list, "--t", dist_T.to_string(), "--c", dist_C.to_string(),
        "--interval", interval, "--step", format_real(settings.step), "--n",
        std::to_string(settings.n_packets), "--seed", std::to_string(settings.seed), "--t0",
        format_real(settings.T0), "--c0", format_real(settings.C0)};
    if (!a.scenario.empty()) args.insert(args.end(), {"--scenario", a.scenario});
    const json resolved{{"policies", policy_list},   {"t", dist_T.to_string()},
                        {"c", dist_C.to_string()},   {"interval", interval},
                        {"step", settings.step},     {"n", settings.n_packets},
                        {"t0", settings.T0},         {"c0", settings.C0},
                        {"scenario", a.scenario}};
    dir.write_manifest("sweep_manifest.json", "sweep", args, resolved, settings.seed);
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct RatioArgs {
    std::string scenario;
    std::string ratios = "0.25,0.5,1,2,4,6";
    std::string policies = "paoi-tp,long-wait";
    double total = 1.0;
    std::string interval;
    std::optional<double> step;
    std::int64_t n = 100000;
    std::uint64_t seed = 0;
    double t0 = 1.0;
    double c0 = 0.0;
    std::int64_t mc = 1000000;
    double tol = 1e-9;
    std::string out = ".";
};

int cmd_ratio_sweep(const RatioArgs& a, std::ostream& out) {
    if (!a.scenario.empty() && a.scenario != "fig7") {
        throw std::invalid_argument("ratio-sweep scenario must be fig7");
    }
    // fig7 is the default configuration; the flag only documents intent.
    if (!std::isfinite(a.total) || !(a.total > 0.0)) throw std::invalid_argument("total must be > 0");
    const auto ratios = parse_reals(a.ratios, "ratio");
    for (const double r : ratios) {
        if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("ratios must be > 0");
    }
    std::vector<RatioPolicy> policies;
    for (const auto& name : split(a.policies, ',')) policies.push_back(parse_ratio_policy(name));
    if (policies.empty()) throw std::invalid_argument("no policies given");
    if (a.n < 1) throw std::invalid_argument("n must be >= 1");

    RatioSettings settings;
    settings.total = a.total;
    std::tie(settings.sweep.lo, settings.sweep.hi) =
        a.interval.empty() ? std::pair{a.total, 4.0 * a.total} : parse_interval(a.interval);
    settings.sweep.step = a.step.value_or(0.025 * a.total);
    settings.sweep.n_packets = a.n;
    settings.sweep.seed = a.seed;
    settings.sweep.T0 = a.t0;
    settings.sweep.C0 = a.c0;
    settings.sweep.threads = sweep_threads();
    settings.mc_samples = a.mc;
    settings.beta_tol = a.tol;
    lambda_grid(settings.sweep.lo, settings.sweep.hi, settings.sweep.step);

    const auto rows = ratio_sweep(policies, ratios, settings);

    OutputDir dir(a.out);
    {
        auto file = dir.open("ratio_sweep.csv");
        write_ratio_csv(file, rows);
    }
    write_ratio_csv(out, rows);

    std::string ratio_list;
    for (const double r : ratios) ratio_list += (ratio_list.empty() ? "" : ",") + format_real(r);
    std::string policy_list;
    for (const auto p : policies) policy_list += (policy_list.empty() ? "" : ",") + to_string(p);
    const std::string interval = format_real(settings.sweep.lo) + ":" + format_real(settings.sweep.hi);
    std::vector<std::string> args = {
        "ratio-sweep", "--ratios", ratio_list, "--policies", policy_list, "--total",
        format_real(a.total), "--interval", interval, "--step", format_real(settings.sweep.step),
        "--n", std::to_string(a.n), "--seed", std::to_string(a.seed), "--t0", format_real(a.t0),
        "--c0", format_real(a.c0), "--mc", std::to_string(a.mc), "--tol", format_real(a.tol)};
    if (!a.scenario.empty()) args.insert(args.end(), {"--scenario", a.scenario});
    const json resolved{{"ratios", ratio_list}, {"policies", policy_list},
                        {"total", a.total},     {"interval", interval},
                        {"step", settings.sweep.step}, {"n", a.n},
                        {"t0", a.t0},           {"c0", a.c0},
                        {"mc", a.mc},           {"tol", a.tol},
                        {"scenario", a.scenario}};
    dir.write_manifest("ratio_sweep_manifest.json", "ratio-sweep", args, resolved, a.seed);
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct BetaArgs {
    std::string t = "exp:0.8";
    std::string c = "exp:0.2";
    std::int64_t mc = 1000000;
    double tol = 1e-9;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_calibrate_beta(const BetaArgs& a, std::ostream& out) {
    const auto dist_T = Distribution::parse(a.t);
    const auto dist_C = Distribution::parse(a.c);
    const BetaSolution solution = solve_beta(dist_T, dist_C, a.mc, a.tol, a.seed);
    json report = to_json(solution);
    report["lambda"] = solution.beta + dist_T.mean() + dist_C.mean();
    report["seed"] = a.seed;
    out << report.dump(2) << '\n';

    if (!a.out.empty()) {
        OutputDir dir(a.out);
        dir.write_json("beta.json", report);
        const std::vector<std::string> args = {
            "calibrate-beta", "--t", dist_T.to_string(), "--c", dist_C.to_string(), "--mc",
            std::to_string(a.mc), "--tol", format_real(a.tol), "--seed", std::to_string(a.seed)};
        const json resolved{{"t", dist_T.to_string()}, {"c", dist_C.to_string()},
                            {"mc", a.mc}, {"tol", a.tol}};
        dir.write_manifest("calibrate_beta_manifest.json", "calibrate-beta", args, resolved, a.seed);
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_replay(const std::string& manifest_path, const std::string& out_override,
               std::ostream& out, std::ostream& err) {
    std::ifstream file(manifest_path);
    if (!file) throw std::invalid_argument("cannot read manifest " + manifest_path);
    json manifest;
    try {
        manifest = json::parse(file);
    } catch (const json::exception& e) {
        throw std::invalid_argument("malformed manifest: " + std::string(e.what()));
    }
    if (!manifest.contains("args") || !manifest["args"].is_array()) {
        throw std::invalid_argument("manifest has no args list");
    }
    auto args = manifest["args"].get<std::vector<std::string>>();
    if (args.empty() || args.front() == "replay") throw std::invalid_argument("manifest args invalid");
    const std::string out_dir =
        out_override.empty() ? fs::path(manifest_path).parent_path().string() : out_override;
    args.emplace_back("--out");
    args.push_back(out_dir.empty() ? "." : out_dir);
    return run_cli(args, out, err);
}

void add_scenario_flags(CLI::App* cmd, std::string& t, std::string& c, std::int64_t& n,
                        std::uint64_t& seed, double& t0, double& c0) {
    cmd->add_option("--t", t, "transmission time law: exp:<mean> | uniform:<a>,<b> | det:<v>")
        ->capture_default_str();
    cmd->add_option("--c", c, "processing time law")->capture_default_str();
    cmd->add_option("--n", n, "packets per simulation")->capture_default_str();
    cmd->add_option("--seed", seed, "random seed")->capture_default_str();
    cmd->add_option("--t0", t0, "transmission time of packet 0")->capture_default_str();
    cmd->add_option("--c0", c0, "processing time of packet 0")->capture_default_str();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Age-of-information scheduling simulator", "aoi_sched"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    SimulateArgs sim;
    auto* simulate_cmd = app.add_subcommand("simulate", "simulate one policy");
    simulate_cmd->add_option("--policy", sim.policy,
                             "zero-wait | long-wait:<beta> | paoi-t:<lambda> | paoi-tp:<lambda>")
        ->required();
    add_scenario_flags(simulate_cmd, sim.t, sim.c, sim.n, sim.seed, sim.t0, sim.c0);
    simulate_cmd->add_option("--out", sim.out, "output directory")->capture_default_str();
    simulate_cmd->add_flag("--trace", sim.trace, "write the per-packet trace CSV");

    SweepArgs sweep;
    double sweep_step = 0.0;
    auto* sweep_cmd = app.add_subcommand("sweep", "average AoI over a grid of thresholds");
    sweep_cmd->add_option("--scenario", sweep.scenario, "fig3 | fig4 | fig5 | fig6");
    sweep_cmd->add_option("--policies", sweep.policies, "comma list of paoi-t, paoi-tp, long-wait")
        ->capture_default_str();
    add_scenario_flags(sweep_cmd, sweep.t, sweep.c, sweep.n, sweep.seed, sweep.t0, sweep.c0);
    sweep_cmd->add_option("--interval", sweep.interval, "lo:hi (default E[T]+E[C] : 4(E[T]+E[C]))");
    sweep_cmd->add_option("--step", sweep_step, "grid step (default 0.025 (E[T]+E[C]))");
    sweep_cmd->add_option("--out", sweep.out, "output directory")->capture_default_str();

    RatioArgs ratio;
    double ratio_step = 0.0;
    auto* ratio_cmd = app.add_subcommand("ratio-sweep", "optimal average AoI across E[T]/E[C]");
    ratio_cmd->add_option("--scenario", ratio.scenario, "fig7");
    ratio_cmd->add_option("--ratios", ratio.ratios, "comma list of E[T]/E[C]")->capture_default_str();
    ratio_cmd->add_option("--policies", ratio.policies,
                          "comma list of paoi-t, paoi-tp, long-wait, long-wait-beta")
        ->capture_default_str();
    ratio_cmd->add_option("--total", ratio.total, "E[T] + E[C]")->capture_default_str();
    ratio_cmd->add_option("--interval", ratio.interval, "lo:hi (default total : 4 total)");
    ratio_cmd->add_option("--step", ratio_step, "grid step (default 0.025 total)");
    ratio_cmd->add_option("--n", ratio.n, "packets per simulation")->capture_default_str();
    ratio_cmd->add_option("--seed", ratio.seed, "random seed")->capture_default_str();
    ratio_cmd->add_option("--t0", ratio.t0, "transmission time of packet 0")->capture_default_str();
    ratio_cmd->add_option("--c0", ratio.c0, "processing time of packet 0")->capture_default_str();
    ratio_cmd->add_option("--mc", ratio.mc, "Monte-Carlo pairs for long-wait-beta")
        ->capture_default_str();
    ratio_cmd->add_option("--tol", ratio.tol, "beta tolerance")->capture_default_str();
    ratio_cmd->add_option("--out", ratio.out, "output directory")->capture_default_str();

    BetaArgs beta;
    auto* beta_cmd = app.add_subcommand("calibrate-beta", "long-wait threshold fixed point");
    beta_cmd->add_option("--t", beta.t, "transmission time law")->capture_default_str();
    beta_cmd->add_option("--c", beta.c, "processing time law")->capture_default_str();
    beta_cmd->add_option("--mc", beta.mc, "Monte-Carlo pairs")->capture_default_str();
    beta_cmd->add_option("--tol", beta.tol, "relative tolerance")->capture_default_str();
    beta_cmd->add_option("--seed", beta.seed, "random seed")->capture_default_str();
    beta_cmd->add_option("--out", beta.out, "also write beta.json and a manifest here");

    std::string manifest_path;
    std::string replay_out;
    auto* replay_cmd = app.add_subcommand("replay", "re-run the command recorded in a manifest");
    replay_cmd->add_option("manifest", manifest_path, "manifest JSON file")->required();
    replay_cmd->add_option("--out", replay_out, "output directory (default: the manifest's)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << (dynamic_cast<const CLI::CallForVersion*>(&e) ? std::string(kToolVersion) + "\n"
                                                                   : app.help());
            return kExitOk;
        }
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (simulate_cmd->parsed()) return cmd_simulate(sim, out);
        if (sweep_cmd->parsed()) {
            if (sweep_cmd->count("--step") > 0) sweep.step = sweep_step;
            return cmd_sweep(sweep, *sweep_cmd, out);
        }
        if (ratio_cmd->parsed()) {
            if (ratio_cmd->count("--step") > 0) ratio.step = ratio_step;
            return cmd_ratio_sweep(ratio, out);
        }
        if (beta_cmd->parsed()) return cmd_calibrate_beta(beta, out);
        if (replay_cmd->parsed()) return cmd_replay(manifest_path, replay_out, out, err);
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}

}  // namespace aoi
