#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "swimevo/fitness.hpp"
#include "swimevo/optimizer.hpp"

namespace swimevo {

/// One simulated optimization run against the surrogate landscape.
struct TrialSpec {
    EngineConfig config = ga::GaConfig{};
    double sigma = 0.25;
    std::size_t iterations = 5;  // randomized generation + optimized ones
    std::uint64_t seed = 0;
    double peak_fraction = 0.75;

    Algorithm algorithm() const { return algorithm_of(config); }
    std::size_t population() const { return population_of(config); }
};

struct TrialResult {
    double best_fitness = 0;
    Genotype best_genotype;
    /// Best fitness seen up to and including each generation.
    std::vector<double> per_generation_best;
    std::vector<Genotype> per_generation_best_genotype;

    bool operator==(const TrialResult&) const = default;
};

TrialResult run_trial(const TrialSpec& spec, const ParameterSpace& space);
TrialResult run_trial(const TrialSpec& spec);

/// One swept configuration field. `values` are JSON scalars so that string
/// fields (selection, pool) and numeric fields share one representation.
struct GridAxis {
    std::string parameter;
    std::vector<nlohmann::json> values;
};

/// from, from + step, ..., to (inclusive), each rounded to 9 decimals so that
/// 0.2-step grids produce the intended decimals.
std::vector<nlohmann::json> numeric_range(double from, double to, double step);

struct SweepSpec {
    EngineConfig base = ga::GaConfig{};
    std::vector<double> sigmas = {0.25};
    std::size_t iterations = 5;
    std::vector<GridAxis> grid;
    std::size_t repetitions = 1000;
    std::uint64_t base_seed = 0;
    double peak_fraction = 0.75;

    Algorithm algorithm() const { return algorithm_of(base); }

    /// Configurations in grid order (last axis varies fastest). Combinations
    /// with m_max < m_min are left out; any other invalid combination throws
    /// ConfigError.
    std::vector<EngineConfig> cells() const;
};

struct SweepCell {
    double sigma = 0;
    EngineConfig config;
    double mean_best = 0;
    double std_best = 0;  // sample standard deviation, 0 for one repetition
    double normalized_mean = 0;
    std::size_t repetitions = 0;
};

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Seed of one repetition: mix64(mix64(mix64(base_seed) ^ cell) ^ repetition).
std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t cell, std::uint64_t repetition);

using SweepProgress = std::function<void(std::size_t done, std::size_t total)>;

/// Runs every (sigma, cell) unit on `parallel` worker threads. Each unit
/// accumulates its repetitions in index order, so results do not depend on
/// the degree of parallelism. Output is grouped by sigma, then cell order,
/// with normalized_mean filled in per sigma.
std::vector<SweepCell> run_sweep(const SweepSpec& spec, std::size_t parallel = 1,
                                 const SweepProgress& progress = {});

/// mean_best / max(mean_best) over the given cells, which must share sigma.
std::vector<SweepCell> normalize_within_sigma(std::vector<SweepCell> cells);

std::string sweep_csv_header(Algorithm algorithm);
std::string sweep_csv(const std::vector<SweepCell>& cells, Algorithm algorithm);

/// Reads a JSON sweep document:
///   {"algorithm": "pso", "sigmas": [0.1], "repetitions": 1000, "base_seed": 1,
///    "iterations": 5, "config": {...},
///    "grid": [{"parameter": "w", "from": 0, "to": 3, "step": 0.2},
///             {"parameter": "selection", "values": ["rank", "roulette"]}]}
SweepSpec parse_sweep_spec(const nlohmann::json& doc);
nlohmann::json sweep_spec_to_json(const SweepSpec& spec);

/// selection x pool x m_min (0..2) x m_max (0..3), 0.1 steps, adaptive rate,
/// sigma in {0.05, 0.1, 0.25, 0.5}, 1000 repetitions.
SweepSpec study_ga_sweep();
/// w x c1 x c2 over 0..3 in 0.2 steps, same sigmas and repetitions.
SweepSpec study_pso_sweep();

}  // namespace swimevo
