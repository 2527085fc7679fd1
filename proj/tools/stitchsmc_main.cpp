#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stitchsmc/stitchsmc.hpp"

using namespace stitchsmc;

namespace {

RoadNetwork read_network_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open network file '" + path + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError("network file '" + path + "' is not valid json: " + e.what());
    }
    return load_network(doc);
}

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open file '" + path + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError("file '" + path + "' is not valid json: " + e.what());
    }
    return doc;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw SchemaError("cannot open '" + path + "' for writing");
    out << text;
}

// Flags shared by every subcommand that builds the road model.
void attach_model_flags(CLI::App* cmd, MapMatchParams& p) {
    cmd->add_option("--p0", p.p0, "probability of staying put across one gap")
        ->capture_default_str();
    cmd->add_option("--lambda", p.lambda, "step distance rate per metre at the reference gap")
        ->capture_default_str();
    cmd->add_option("--beta", p.beta, "winding penalty per metre of route indirection")
        ->capture_default_str();
    cmd->add_option("--sigma-gps", p.sigma_gps, "gps noise standard deviation in metres")
        ->capture_default_str();
    cmd->add_option("--d-max", p.d_max, "route search horizon in metres")
        ->capture_default_str();
    cmd->add_option("--resolution", p.resolution, "candidate lattice spacing in metres")
        ->capture_default_str();
}

struct SeedFlag {
    std::uint64_t value = 0;
    CLI::Option* opt = nullptr;

    void attach(CLI::App* cmd) {
        opt = cmd->add_option("--seed", value, "rng seed; drawn from entropy when absent");
    }

    // Resolves to the flag or fresh entropy, and echoes the outcome.
    std::uint64_t resolve() {
        if (!opt->count()) {
            std::random_device rd;
            value = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
        }
        std::cout << "seed: " << value << '\n';
        return value;
    }
};

void run_simulate(const std::string& network_path, const std::string& trace_path,
                  const std::string& truth_path, std::size_t n_obs, MapMatchParams params,
                  std::uint64_t seed) {
    auto net = read_network_file(network_path);
    MapMatchModel model(net, params);
    RngStream rng(seed);
    auto synth = synth_route(model, n_obs, rng);
    write_trace_file(trace_path, synth.trace);
    if (!truth_path.empty()) {
        TrajectorySample<RouteState> truth;
        truth.trajectories.push_back(synth.states);
        nlohmann::json extra{{"algorithm", "synthetic-truth"}, {"seed", seed}};
        write_text_file(truth_path, trajectory_document(net, truth, params, extra).dump(2) + "\n");
    }
}

void run_match_cmd(const std::string& network_path, const std::string& trace_path,
                   const std::string& out_path, std::string diag_path, MapMatchParams params,
                   MatchConfig cfg) {
    auto net = read_network_file(network_path);
    MapMatchModel model(net, params);
    std::ifstream in(trace_path);
    if (!in) throw SchemaError("cannot open trace file '" + trace_path + "'");
    TraceReader reader(in);
    auto result = run_match(model, [&] { return reader.next(); }, cfg);

    nlohmann::json extra{{"algorithm", algorithm_name(cfg.algorithm)},
                         {"seed", cfg.seed},
                         {"n_particles", cfg.n_particles},
                         {"lag", cfg.lag},
                         {"max_rejections", cfg.max_rejections},
                         {"ess_threshold", cfg.ess_threshold}};
    write_text_file(out_path, trajectory_document(net, result.sample, params, extra).dump(2) + "\n");

    if (diag_path.empty()) diag_path = out_path + ".diag.csv";
    std::ofstream diag(diag_path);
    if (!diag) throw SchemaError("cannot open '" + diag_path + "' for writing");
    write_metric_csv(diag, result.diagnostics);
}

// Matched block boundaries: index of the last observation inside each
// block-seconds window, starting from the record's first timestamp.
std::vector<std::size_t> block_boundaries(const std::vector<RouteState>& traj,
                                          double block_seconds) {
    std::vector<std::size_t> bounds{0};
    double t0 = traj.front().timestamp;
    for (long k = 1;; ++k) {
        double target = t0 + static_cast<double>(k) * block_seconds;
        std::size_t b = bounds.back();
        while (b + 1 < traj.size() && traj[b + 1].timestamp <= target + 1e-9) ++b;
        if (b > bounds.back()) bounds.push_back(b);
        if (bounds.back() + 1 >= traj.size()) break;
    }
    return bounds;
}

void run_eval(const std::string& network_path, const std::string& path_a,
              const std::string& path_b, const std::string& out_path, double bin_width,
              double block_seconds, std::uint64_t seed) {
    auto net = read_network_file(network_path);
    auto a = trajectories_from_json(net, read_json_file(path_a));
    auto b = trajectories_from_json(net, read_json_file(path_b));
    if (a.length() != b.length())
        throw SchemaError("trajectory documents cover different record lengths");
    for (std::size_t t = 0; t < a.length(); ++t)
        if (std::abs(a.trajectories[0][t].timestamp - b.trajectories[0][t].timestamp) > 1e-9)
            throw SchemaError("trajectory documents cover different time grids");

    // binned_tv compares unweighted samples; resample weighted inputs first.
    // Each input gets its own identically seeded stream so a file compared
    // against itself always scores zero.
    for (auto* s : {&a, &b}) {
        RngStream rng(seed);
        if (!s->uniform()) detail::resample_trajectories(*s, rng);
    }

    auto bounds = block_boundaries(a.trajectories[0], block_seconds);
    std::vector<MetricRow> rows;
    double sum = 0.0;
    for (std::size_t k = 1; k < bounds.size(); ++k) {
        auto block_sample = [&](const TrajectorySample<RouteState>& s) {
            std::vector<double> d;
            d.reserve(s.size());
            for (const auto& traj : s.trajectories)
                d.push_back(block_distance(traj, bounds[k - 1], bounds[k]));
            return d;
        };
        double tv = binned_tv(block_sample(a), block_sample(b), bin_width);
        rows.push_back({"binned_tv", a.trajectories[0][bounds[k]].timestamp, tv});
        sum += tv;
    }
    if (!rows.empty())
        rows.push_back({"binned_tv_mean", rows.back().t,
                        sum / static_cast<double>(rows.size())});

    if (out_path.empty() || out_path == "-") {
        write_metric_csv(std::cout, rows);
    } else {
        std::ofstream out(out_path);
        if (!out) throw SchemaError("cannot open '" + out_path + "' for writing");
        write_metric_csv(out, rows);
    }
}

void run_bench(const std::string& network_path, const std::string& trace_path,
               const std::string& out_path, const std::string& algorithm,
               std::vector<std::size_t> ns, std::vector<int> rejections, std::size_t n_seeds,
               int lag, double ess_threshold, int threads, std::uint64_t seed) {
    auto net = read_network_file(network_path);
    MapMatchParams params;  // benchmark uses library defaults; scenario comes from the trace
    auto trace = read_trace_file(trace_path);
    if (trace.size() < 2) throw std::invalid_argument("benchmark traces need at least 2 rows");
    MatchAlgorithm algo = parse_algorithm(algorithm);
    if (algo == MatchAlgorithm::FfbsiOffline || algo == MatchAlgorithm::Viterbi)
        throw std::invalid_argument("benchmark times streaming algorithms only");

    auto run_once = [&](std::size_t n, int r, std::uint64_t run_seed) {
        MapMatchModel model(net, params);  // fresh caches so every run pays the same costs
        MatchConfig cfg;
        cfg.algorithm = algo;
        cfg.n_particles = n;
        cfg.lag = lag;
        cfg.max_rejections = r;
        cfg.ess_threshold = ess_threshold;
        cfg.threads = threads;
        cfg.seed = seed ^ (run_seed + 1);
        cfg.with_diagnostics = false;
        std::size_t i = 0;
        std::vector<double> times;
        times.reserve(trace.size());
        auto clock = [] { return std::chrono::steady_clock::now(); };
        // the interval between successive pulls is exactly one update
        auto last = clock();
        auto timed_feed = [&]() -> std::optional<GpsObservation> {
            auto now = clock();
            times.push_back(std::chrono::duration<double>(now - last).count());
            std::optional<GpsObservation> y;
            if (i < trace.size()) y = trace[i++];
            last = clock();
            return y;
        };
        run_match(model, timed_feed, cfg);
        // the first interval precedes any work; drop it here, bench_update
        // drops the next one (the init step) as warmup
        times.erase(times.begin());
        return times;
    };

    auto rows = bench_update(run_once, ns, rejections, n_seeds);
    if (out_path.empty() || out_path == "-") {
        write_bench_csv(std::cout, rows);
    } else {
        std::ofstream out(out_path);
        if (!out) throw SchemaError("cannot open '" + out_path + "' for writing");
        write_bench_csv(out, rows);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Online particle smoothing on road networks"};
    app.require_subcommand(1);
    std::function<void()> action;

    // simulate
    {
        auto* cmd = app.add_subcommand("simulate", "draw a synthetic drive and its gps trace");
        auto network = std::make_shared<std::string>();
        auto trace = std::make_shared<std::string>();
        auto truth = std::make_shared<std::string>();
        auto n_obs = std::make_shared<std::size_t>(20);
        auto params = std::make_shared<MapMatchParams>();
        auto seed = std::make_shared<SeedFlag>();
        cmd->add_option("--network", *network, "road network json")->required();
        cmd->add_option("--out", *trace, "trace csv to write")->required();
        cmd->add_option("--truth", *truth, "trajectory document for the generating drive");
        cmd->add_option("--n-obs", *n_obs, "observations to simulate")->capture_default_str();
        attach_model_flags(cmd, *params);
        seed->attach(cmd);
        cmd->callback([=, &action] {
            action = [=] {
                run_simulate(*network, *trace, *truth, *n_obs, *params, seed->resolve());
            };
        });
    }

    // match
    {
        auto* cmd = app.add_subcommand("match", "fit particle trajectories to a gps trace");
        auto network = std::make_shared<std::string>();
        auto trace = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        auto diag = std::make_shared<std::string>();
        auto algorithm = std::make_shared<std::string>("online");
        auto params = std::make_shared<MapMatchParams>();
        auto cfg = std::make_shared<MatchConfig>();
        auto seed = std::make_shared<SeedFlag>();
        cmd->add_option("--network", *network, "road network json")->required();
        cmd->add_option("--trace", *trace, "trace csv to read")->required();
        cmd->add_option("--out", *out, "trajectory document to write")->required();
        cmd->add_option("--diagnostics", *diag, "per-step metric csv (default <out>.diag.csv)");
        cmd->add_option("--algorithm", *algorithm,
                        "pf | marginal-fixed-lag | online | online-bsi | ffbsi-offline | viterbi")
            ->capture_default_str();
        cmd->add_option("--n-particles", cfg->n_particles, "particle count")
            ->capture_default_str();
        cmd->add_option("--lag", cfg->lag, "smoothing lag in observations")->capture_default_str();
        cmd->add_option("--max-rejections", cfg->max_rejections,
                        "rejection budget before the categorical fallback")
            ->capture_default_str();
        cmd->add_option("--ess-threshold", cfg->ess_threshold, "resample when ESS/N drops below")
            ->capture_default_str();
        cmd->add_option("--threads", cfg->threads, "worker cap")->capture_default_str();
        attach_model_flags(cmd, *params);
        seed->attach(cmd);
        cmd->callback([=, &action] {
            action = [=] {
                MatchConfig c = *cfg;
                c.algorithm = parse_algorithm(*algorithm);
                c.seed = seed->resolve();
                run_match_cmd(*network, *trace, *out, *diag, *params, c);
            };
        });
    }

    // evaluate
    {
        auto* cmd = app.add_subcommand("evaluate",
                                       "per-block distance agreement between two matches");
        auto network = std::make_shared<std::string>();
        auto file_a = std::make_shared<std::string>();
        auto file_b = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>("-");
        auto bin_width = std::make_shared<double>(5.0);
        auto block_seconds = std::make_shared<double>(60.0);
        auto seed = std::make_shared<SeedFlag>();
        cmd->add_option("--network", *network, "road network json")->required();
        cmd->add_option("file_a", *file_a, "trajectory document")->required();
        cmd->add_option("file_b", *file_b, "trajectory document")->required();
        cmd->add_option("--out", *out, "metric csv (default stdout)")->capture_default_str();
        cmd->add_option("--bin-width", *bin_width, "distance bin width in metres")
            ->capture_default_str();
        cmd->add_option("--block-seconds", *block_seconds, "block length in seconds")
            ->capture_default_str();
        seed->attach(cmd);
        cmd->callback([=, &action] {
            action = [=] {
                run_eval(*network, *file_a, *file_b, *out, *bin_width, *block_seconds,
                         seed->opt->count() ? seed->value : 0);
            };
        });
    }

    // benchmark
    {
        auto* cmd = app.add_subcommand("benchmark", "per-update wall times across N and R");
        auto network = std::make_shared<std::string>();
        auto trace = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>("-");
        auto algorithm = std::make_shared<std::string>("online");
        auto ns = std::make_shared<std::vector<std::size_t>>();
        auto rejections = std::make_shared<std::vector<int>>();
        auto n_seeds = std::make_shared<std::size_t>(5);
        auto lag = std::make_shared<int>(3);
        auto ess = std::make_shared<double>(0.5);
        auto threads = std::make_shared<int>(1);
        auto seed = std::make_shared<SeedFlag>();
        cmd->add_option("--network", *network, "road network json")->required();
        cmd->add_option("--trace", *trace, "trace csv to read")->required();
        cmd->add_option("--out", *out, "timing csv (default stdout)")->capture_default_str();
        cmd->add_option("--algorithm", *algorithm, "streaming algorithm to time")
            ->capture_default_str();
        cmd->add_option("--n-particles", *ns, "particle counts (repeatable)");
        cmd->add_option("--max-rejections", *rejections, "rejection budgets (repeatable)");
        cmd->add_option("--n-seeds", *n_seeds, "seeds per configuration")->capture_default_str();
        cmd->add_option("--lag", *lag, "smoothing lag")->capture_default_str();
        cmd->add_option("--ess-threshold", *ess, "resample threshold")->capture_default_str();
        cmd->add_option("--threads", *threads, "worker cap")->capture_default_str();
        seed->attach(cmd);
        cmd->callback([=, &action] {
            action = [=] {
                run_bench(*network, *trace, *out, *algorithm,
                          ns->empty() ? std::vector<std::size_t>{250, 500, 1000} : *ns,
                          rejections->empty() ? std::vector<int>{0, 20} : *rejections, *n_seeds,
                          *lag, *ess, *threads, seed->resolve());
            };
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        action();
    } catch (const ModelRuntimeError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::logic_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
