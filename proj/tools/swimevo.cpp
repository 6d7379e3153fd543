#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <pthread.h>

#include <CLI11.hpp>
#include <httplib.h>

#include <fmt/format.h>

#include "swimevo/http_api.hpp"
#include "swimevo/optimizer.hpp"
#include "swimevo/session_store.hpp"
#include "swimevo/space_io.hpp"
#include "swimevo/sweep.hpp"

using namespace swimevo;

namespace {

constexpr int kOk = 0;
constexpr int kRuntime = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SpaceOptions {
    std::string file;
    bool json = false;
};

struct EngineFlags {
    std::string algo = "ga";
    std::optional<std::string> selection, pool;
    std::optional<double> m_min, m_max, rate;
    bool adaptive = false;
    std::optional<double> w, c1, c2;

    void add_to(CLI::App& cmd) {
        cmd.add_option("--algo", algo, "ga or pso")->check(CLI::IsMember({"ga", "pso"}));
        cmd.add_option("--selection", selection, "GA: rank or roulette");
        cmd.add_option("--pool", pool, "GA: elite8 or all_history");
        cmd.add_option("--m-min", m_min, "GA: lower mutation rate");
        cmd.add_option("--m-max", m_max, "GA: upper mutation rate");
        cmd.add_option("--rate", rate, "GA: constant mutation rate");
        cmd.add_flag("--adaptive", adaptive, "GA: fitness-adaptive mutation rate");
        cmd.add_option("--w", w, "PSO: inertia weight");
        cmd.add_option("--c1", c1, "PSO: cognitive coefficient");
        cmd.add_option("--c2", c2, "PSO: social coefficient");
    }

    nlohmann::json config_doc() const {
        nlohmann::json doc = nlohmann::json::object();
        const bool ga = algo == "ga";
        auto put = [&](const char* key, const auto& v, bool belongs) {
            if (!v) return;
            if (!belongs) throw UsageError(fmt::format("--{} does not apply to --algo {}", key, algo));
            doc[key] = *v;
        };
        put("selection", selection, ga);
        put("pool", pool, ga);
        put("rate", rate, ga);
        put("m_min", m_min, ga);
        put("m_max", m_max, ga);
        if (adaptive) {
            if (!ga) throw UsageError("--adaptive does not apply to --algo pso");
            doc["adaptive"] = true;
        }
        put("w", w, !ga);
        put("c1", c1, !ga);
        put("c2", c2, !ga);
        if (rate && (m_min || m_max)) throw UsageError("--rate cannot be combined with --m-min/--m-max");
        return doc;
    }
};

ParameterSpace load_space(const std::string& file) {
    if (file.empty()) return build_default_space();
    try {
        return load_space_file(file);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
}

int cmd_space(const SpaceOptions& opt) {
    const auto space = load_space(opt.file);
    if (opt.json) {
        std::cout << space_to_json(space).dump(2) << "\n";
        return kOk;
    }
    for (const auto& d : space.dimensions()) {
        std::vector<std::string> values;
        for (double v : d.values) values.push_back(format_number(v));
        std::cout << fmt::format("{:<20} {:<5} {:>3} values{}: {}\n", d.name, d.unit.empty() ? "-" : d.unit,
                                 d.size(), d.periodic() ? fmt::format(" (period {})", format_number(*d.period)) : "",
                                 fmt::join(values, " "));
    }
    std::cout << "cardinality " << cardinality(space) << "\n";
    return kOk;
}

struct TrialOptions {
    EngineFlags engine;
    double sigma = 0.25;
    std::uint64_t seed = 0;
    std::size_t iterations = 5;
    std::string space_file;
};

int cmd_trial(const TrialOptions& opt) {
    if (opt.iterations == 0) throw UsageError("--iterations must be at least 1");
    if (!(opt.sigma > 0)) throw UsageError("--sigma must be positive");
    const auto space = load_space(opt.space_file);
    TrialSpec spec;
    spec.config = config_from_json(parse_algorithm(opt.engine.algo), opt.engine.config_doc());
    spec.sigma = opt.sigma;
    spec.seed = opt.seed;
    spec.iterations = opt.iterations;
    const auto result = run_trial(spec, space);
    std::cout << "generation\tbest_fitness\tbest_genotype\n";
    for (std::size_t g = 0; g < result.per_generation_best.size(); ++g)
        std::cout << fmt::format("{}\t{:.9g}\t{}\n", g, result.per_generation_best[g],
                                 describe(space, result.per_generation_best_genotype[g]));
    return kOk;
}

struct SweepOptions {
    EngineFlags engine;
    std::string spec_file, preset, out;
    std::vector<double> sigmas;
    std::vector<std::string> grid;
    std::optional<long long> reps;
    std::optional<std::uint64_t> seed;
    std::optional<long long> iterations;
    std::size_t parallel = 1;
};

// "w=0:3:0.2" or "selection=rank,roulette"
nlohmann::json parse_grid_flag(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError(fmt::format("--grid '{}': expected name=values", text));
    nlohmann::json axis = {{"parameter", text.substr(0, eq)}};
    const auto rest = text.substr(eq + 1);
    auto split = [](const std::string& s, char sep) {
        std::vector<std::string> parts;
        std::stringstream ss(s);
        for (std::string p; std::getline(ss, p, sep);) parts.push_back(p);
        return parts;
    };
    auto scalar = [](const std::string& s) -> nlohmann::json {
        try {
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            if (used == s.size()) return v;
        } catch (const std::exception&) {
        }
        return s;
    };
    if (rest.find(':') != std::string::npos) {
        const auto parts = split(rest, ':');
        if (parts.size() != 3) throw UsageError(fmt::format("--grid '{}': expected from:to:step", text));
        axis["from"] = scalar(parts[0]);
        axis["to"] = scalar(parts[1]);
        axis["step"] = scalar(parts[2]);
    } else {
        nlohmann::json values = nlohmann::json::array();
        for (const auto& p : split(rest, ',')) values.push_back(scalar(p));
        axis["values"] = values;
    }
    return axis;
}

SweepSpec build_sweep_spec(const SweepOptions& opt) {
    nlohmann::json doc;
    if (!opt.spec_file.empty()) {
        std::ifstream in(opt.spec_file);
        if (!in) throw UsageError(fmt::format("cannot read sweep spec '{}'", opt.spec_file));
        try {
            doc = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw UsageError(fmt::format("{}: {}", opt.spec_file, e.what()));
        }
    } else if (!opt.preset.empty()) {
        doc = sweep_spec_to_json(opt.preset == "ga-study" ? study_ga_sweep() : study_pso_sweep());
    } else {
        doc = {{"algorithm", opt.engine.algo}, {"config", opt.engine.config_doc()}};
        nlohmann::json grid = nlohmann::json::array();
        for (const auto& g : opt.grid) grid.push_back(parse_grid_flag(g));
        doc["grid"] = grid;
    }
    if (!opt.sigmas.empty()) doc["sigmas"] = opt.sigmas;
    if (opt.reps) doc["repetitions"] = *opt.reps;
    if (opt.seed) doc["base_seed"] = *opt.seed;
    if (opt.iterations) doc["iterations"] = *opt.iterations;
    return parse_sweep_spec(doc);
}

int cmd_sweep(const SweepOptions& opt) {
    if (opt.parallel == 0) throw UsageError("--parallel must be at least 1");
    const auto spec = build_sweep_spec(opt);

    std::ofstream file;
    if (!opt.out.empty()) {
        file.open(opt.out, std::ios::binary | std::ios::trunc);
        if (!file) {
            std::cerr << fmt::format("error: cannot write '{}'\n", opt.out);
            return kRuntime;
        }
    }

    std::size_t last_percent = 101;
    const auto cells = run_sweep(spec, opt.parallel, [&](std::size_t done, std::size_t total) {
        const std::size_t percent = done * 100 / total;
        if (percent != last_percent) {
            last_percent = percent;
            std::cerr << fmt::format("\rsweep {}/{} units ({}%)", done, total, percent) << std::flush;
        }
    });
    std::cerr << "\n";

    const auto csv = sweep_csv(cells, spec.algorithm());
    if (opt.out.empty()) {
        std::cout << csv;
        return kOk;
    }
    file << csv;
    file.close();
    if (!file) {
        std::cerr << fmt::format("error: writing '{}' failed\n", opt.out);
        return kRuntime;
    }
    return kOk;
}

struct ServeOptions {
    int port = 8080;
    std::string host = "127.0.0.1";
    std::string journal_dir = "journals";
    std::string assets_dir;
};

int cmd_serve(const ServeOptions& opt) {
    // Block termination signals before any thread starts so sigwait sees them.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGTERM);
    sigaddset(&signals, SIGINT);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    SessionStore store(opt.journal_dir);
    for (const auto& w : store.recover_all()) std::cerr << "recovery: " << w << "\n";

    httplib::Server server;
    install_routes(server, store, opt.assets_dir);
    // No SO_REUSEPORT: a second instance on the same port must fail to bind.
    server.set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });
    if (!server.bind_to_port(opt.host, opt.port)) {
        std::cerr << fmt::format("error: cannot listen on {}:{}\n", opt.host, opt.port);
        return kRuntime;
    }
    std::cerr << fmt::format("listening on http://{}:{} (journals in {})\n", opt.host, opt.port, opt.journal_dir);

    std::thread listener([&] { server.listen_after_bind(); });
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
    listener.join();
    store.flush();
    std::cerr << "shut down\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robot parameter search: surrogate studies and the measurement session service"};
    app.require_subcommand(1);

    SpaceOptions space_opt;
    auto* space = app.add_subcommand("space", "Print the parameter space");
    space->add_option("--file", space_opt.file, "Space description file (text or JSON)");
    space->add_flag("--json", space_opt.json, "Print JSON");

    TrialOptions trial_opt;
    auto* trial = app.add_subcommand("trial", "Run one surrogate trial");
    trial_opt.engine.add_to(*trial);
    trial->add_option("--sigma", trial_opt.sigma, "Surrogate width");
    trial->add_option("--seed", trial_opt.seed, "Random seed");
    trial->add_option("--iterations", trial_opt.iterations, "Generations including the random one");
    trial->add_option("--space", trial_opt.space_file, "Space description file");

    SweepOptions sweep_opt;
    auto* sweep = app.add_subcommand("sweep", "Run a configuration sweep and write CSV");
    sweep_opt.engine.add_to(*sweep);
    auto* spec_flag = sweep->add_option("--spec", sweep_opt.spec_file, "Sweep JSON document");
    sweep->add_option("--preset", sweep_opt.preset, "ga-study or pso-study")
        ->check(CLI::IsMember({"ga-study", "pso-study"}))
        ->excludes(spec_flag);
    sweep->add_option("--grid", sweep_opt.grid, "Swept field: name=from:to:step or name=a,b,...");
    sweep->add_option("--sigma", sweep_opt.sigmas, "Surrogate width(s)");
    sweep->add_option("--reps", sweep_opt.reps, "Repetitions per cell");
    sweep->add_option("--iterations", sweep_opt.iterations, "Generations per trial");
    sweep->add_option("--seed", sweep_opt.seed, "Base seed");
    sweep->add_option("--parallel", sweep_opt.parallel, "Worker threads");
    sweep->add_option("--out", sweep_opt.out, "Output CSV (default stdout)");

    ServeOptions serve_opt;
    if (const char* v = std::getenv("SWIMEVO_PORT")) serve_opt.port = std::atoi(v);
    if (const char* v = std::getenv("SWIMEVO_JOURNAL_DIR")) serve_opt.journal_dir = v;
    if (const char* v = std::getenv("SWIMEVO_ASSETS_DIR")) serve_opt.assets_dir = v;
    auto* serve = app.add_subcommand("serve", "Serve the session API");
    serve->add_option("--port", serve_opt.port, "TCP port (env SWIMEVO_PORT)");
    serve->add_option("--host", serve_opt.host, "Bind address");
    serve->add_option("--journal-dir", serve_opt.journal_dir, "Journal directory (env SWIMEVO_JOURNAL_DIR)");
    serve->add_option("--assets-dir", serve_opt.assets_dir, "Static files for the console (env SWIMEVO_ASSETS_DIR)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*space) return cmd_space(space_opt);
        if (*trial) return cmd_trial(trial_opt);
        if (*sweep) return cmd_sweep(sweep_opt);
        if (*serve) return cmd_serve(serve_opt);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntime;
    }
    return kUsage;
}
