#include "swimevo/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include <fmt/format.h>

namespace swimevo {

TrialResult run_trial(const TrialSpec& spec, const ParameterSpace& space) {
    if (spec.iterations < 1) throw ConfigError({"iterations: must be at least 1"});
    const SurrogateParams params{spec.sigma, spec.peak_fraction};

    Optimizer opt(space, spec.config, spec.seed);
    TrialResult result;
    for (std::size_t it = 0; it < spec.iterations; ++it) {
        if (it > 0) opt.propose();
        std::vector<double> fitness;
        fitness.reserve(opt.proposal().size());
        for (const auto& g : opt.proposal()) fitness.push_back(gaussian_sum(space, g, params));
        opt.tell(fitness);
        result.per_generation_best.push_back(opt.best_fitness());
        result.per_generation_best_genotype.push_back(opt.best_genotype());
    }
    result.best_fitness = opt.best_fitness();
    result.best_genotype = opt.best_genotype();
    return result;
}

TrialResult run_trial(const TrialSpec& spec) { return run_trial(spec, build_default_space()); }

std::vector<nlohmann::json> numeric_range(double from, double to, double step) {
    if (!(step > 0) || !(to >= from)) throw ConfigError({"grid: range needs step > 0 and to >= from"});
    const auto count = static_cast<std::size_t>(std::floor((to - from) / step + 1e-9)) + 1;
    std::vector<nlohmann::json> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const double v = from + static_cast<double>(k) * step;
        out.emplace_back(std::round(v * 1e9) / 1e9);
    }
    return out;
}

std::vector<EngineConfig> SweepSpec::cells() const {
    std::vector<EngineConfig> out;
    std::vector<std::size_t> pos(grid.size(), 0);
    for (const auto& axis : grid)
        if (axis.values.empty()) throw ConfigError({fmt::format("{}: grid axis has no values", axis.parameter)});

    while (true) {
        EngineConfig c = base;
        for (std::size_t a = 0; a < grid.size(); ++a) set_config_field(c, grid[a].parameter, grid[a].values[pos[a]]);

        const auto* g = std::get_if<ga::GaConfig>(&c);
        if (!(g && g->m_max < g->m_min)) {
            if (auto problems = config_problems(c); !problems.empty()) throw ConfigError(std::move(problems));
            out.push_back(std::move(c));
        }

        std::size_t a = grid.size();
        while (a > 0) {
            --a;
            if (++pos[a] < grid[a].values.size()) break;
            pos[a] = 0;
            if (a == 0) return out;
        }
        if (grid.empty()) return out;
    }
}

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t cell, std::uint64_t repetition) {
    return mix64(mix64(mix64(base_seed) ^ cell) ^ repetition);
}

std::vector<SweepCell> normalize_within_sigma(std::vector<SweepCell> cells) {
    if (cells.empty()) throw std::invalid_argument("normalize_within_sigma: no cells");
    double best = cells.front().mean_best;
    for (const auto& c : cells) {
        if (c.sigma != cells.front().sigma)
            throw std::invalid_argument("normalize_within_sigma: cells span more than one sigma");
        best = std::max(best, c.mean_best);
    }
    for (auto& c : cells) c.normalized_mean = best > 0 ? c.mean_best / best : 1.0;
    return cells;
}

std::vector<SweepCell> run_sweep(const SweepSpec& spec, std::size_t parallel, const SweepProgress& progress) {
    if (spec.repetitions < 1) throw ConfigError({"repetitions: must be at least 1"});
    if (spec.iterations < 1) throw ConfigError({"iterations: must be at least 1"});
    if (spec.sigmas.empty()) throw ConfigError({"sigmas: at least one sigma required"});
    for (double s : spec.sigmas)
        if (!(s > 0)) throw ConfigError({"sigmas: every sigma must be > 0"});

    const auto configs = spec.cells();
    const auto space = build_default_space();
    const std::size_t total = spec.sigmas.size() * configs.size();
    std::vector<SweepCell> results(total);

    std::atomic<std::size_t> next{0};
    std::size_t done = 0;
    std::mutex guard;
    std::exception_ptr failure;

    auto work = [&] {
        for (std::size_t unit = next++; unit < total; unit = next++) {
            try {
                const std::size_t s = unit / configs.size();
                const std::size_t c = unit % configs.size();
                std::vector<double> best(spec.repetitions);
                for (std::size_t r = 0; r < spec.repetitions; ++r) {
                    TrialSpec trial{configs[c], spec.sigmas[s], spec.iterations, trial_seed(spec.base_seed, c, r),
                                    spec.peak_fraction};
                    best[r] = run_trial(trial, space).best_fitness;
                }
                double sum = 0;
                for (double b : best) sum += b;
                const double mean = sum / static_cast<double>(best.size());
                double sq = 0;
                for (double b : best) sq += (b - mean) * (b - mean);
                const double sd = best.size() > 1 ? std::sqrt(sq / static_cast<double>(best.size() - 1)) : 0.0;
                results[unit] = SweepCell{spec.sigmas[s], configs[c], mean, sd, 0.0, spec.repetitions};
            } catch (...) {
                std::lock_guard lock(guard);
                if (!failure) failure = std::current_exception();
                next = total;
                return;
            }
            std::lock_guard lock(guard);
            ++done;
            if (progress) progress(done, total);
        }
    };

    const std::size_t threads = std::clamp<std::size_t>(parallel, 1, std::max<std::size_t>(total, 1));
    if (threads == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<SweepCell> out;
    out.reserve(total);
    for (std::size_t s = 0; s < spec.sigmas.size(); ++s) {
        std::vector<SweepCell> group(results.begin() + static_cast<std::ptrdiff_t>(s * configs.size()),
                                     results.begin() + static_cast<std::ptrdiff_t>((s + 1) * configs.size()));
        if (group.empty()) continue;
        for (auto& c : normalize_within_sigma(std::move(group))) out.push_back(std::move(c));
    }
    return out;
}

namespace {

std::string csv_number(double v) { return fmt::format("{:.9g}", v); }

std::string csv_value(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    return csv_number(v.get<double>());
}

}  // namespace

std::string sweep_csv_header(Algorithm algorithm) {
    std::string out = "sigma,algorithm";
    for (const auto& f : config_fields(algorithm)) out += "," + f;
    return out + ",mean_best,std_best,normalized_mean,repetitions\n";
}

std::string sweep_csv(const std::vector<SweepCell>& cells, Algorithm algorithm) {
    std::string out = sweep_csv_header(algorithm);
    const auto fields = config_fields(algorithm);
    for (const auto& c : cells) {
        const auto doc = config_to_json(c.config);
        out += csv_number(c.sigma) + "," + to_string(algorithm);
        for (const auto& f : fields) out += "," + csv_value(doc.at(f));
        out += fmt::format(",{},{},{},{}\n", csv_number(c.mean_best), csv_number(c.std_best),
                           csv_number(c.normalized_mean), c.repetitions);
    }
    return out;
}

SweepSpec parse_sweep_spec(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ConfigError({"sweep: expected a JSON object"});
    std::vector<std::string> problems;
    SweepSpec spec;
    try {
        const auto algorithm = parse_algorithm(doc.at("algorithm").get<std::string>());
        spec.base = config_from_json(algorithm, doc.value("config", nlohmann::json::object()));
        if (doc.contains("sigmas")) spec.sigmas = doc["sigmas"].get<std::vector<double>>();
        else if (doc.contains("sigma")) spec.sigmas = {doc["sigma"].get<double>()};
        const auto iterations = doc.value("iterations", static_cast<long long>(spec.iterations));
        const auto repetitions = doc.value("repetitions", static_cast<long long>(spec.repetitions));
        if (iterations < 1) problems.push_back("iterations: must be at least 1");
        if (repetitions < 1) problems.push_back("repetitions: must be at least 1");
        spec.iterations = static_cast<std::size_t>(std::max(iterations, 1LL));
        spec.repetitions = static_cast<std::size_t>(std::max(repetitions, 1LL));
        spec.base_seed = doc.value("base_seed", spec.base_seed);
        spec.peak_fraction = doc.value("peak_fraction", spec.peak_fraction);
        for (const auto& axis : doc.value("grid", nlohmann::json::array())) {
            GridAxis a;
            a.parameter = axis.at("parameter").get<std::string>();
            if (axis.contains("values")) {
                for (const auto& v : axis["values"]) a.values.push_back(v);
            } else {
                a.values = numeric_range(axis.at("from").get<double>(), axis.at("to").get<double>(),
                                         axis.at("step").get<double>());
            }
            spec.grid.push_back(std::move(a));
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError({fmt::format("sweep: {}", e.what())});
    }
    if (spec.sigmas.empty()) problems.push_back("sigmas: at least one sigma required");
    for (double s : spec.sigmas)
        if (!(s > 0)) problems.push_back("sigmas: every sigma must be > 0");
    if (!problems.empty()) throw ConfigError(std::move(problems));
    spec.cells();  // surfaces invalid grid fields early
    return spec;
}

nlohmann::json sweep_spec_to_json(const SweepSpec& spec) {
    auto grid = nlohmann::json::array();
    for (const auto& a : spec.grid) grid.push_back({{"parameter", a.parameter}, {"values", a.values}});
    return {{"algorithm", to_string(spec.algorithm())},
            {"sigmas", spec.sigmas},
            {"iterations", spec.iterations},
            {"repetitions", spec.repetitions},
            {"base_seed", spec.base_seed},
            {"peak_fraction", spec.peak_fraction},
            {"config", config_to_json(spec.base)},
            {"grid", grid}};
}

SweepSpec study_ga_sweep() {
    SweepSpec spec;
    ga::GaConfig base;
    base.adaptive = true;
    spec.base = base;
    spec.sigmas = {0.05, 0.1, 0.25, 0.5};
    spec.grid = {
        {"selection", {"rank", "roulette"}},
        {"pool", {"elite8", "all_history"}},
        {"m_min", numeric_range(0, 2, 0.1)},
        {"m_max", numeric_range(0, 3, 0.1)},
    };
    return spec;
}

SweepSpec study_pso_sweep() {
    SweepSpec spec;
    spec.base = pso::PsoConfig{};
    spec.sigmas = {0.05, 0.1, 0.25, 0.5};
    spec.grid = {
        {"w", numeric_range(0, 3, 0.2)},
        {"c1", numeric_range(0, 3, 0.2)},
        {"c2", numeric_range(0, 3, 0.2)},
    };
    return spec;
}

}  // namespace swimevo
