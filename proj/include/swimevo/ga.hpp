#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "swimevo/genome.hpp"

namespace swimevo::ga {

enum class Selection { rank, roulette };
enum class Pool { elite8, all_history };

inline constexpr std::size_t kEliteSize = 8;

struct GaConfig {
    Selection selection = Selection::rank;
    Pool pool = Pool::elite8;
    double m_min = 1.0;
    double m_max = 1.0;
    bool adaptive = false;
    std::size_t population = 8;
    std::size_t pairs = 4;

    /// Field-level problems, empty when the configuration is usable.
    std::vector<std::string> problems() const;

    bool operator==(const GaConfig&) const = default;
};

/// Everything evaluated so far in one run.
struct GaState {
    std::vector<EvaluatedIndividual> history;
    std::uint32_t generation = 0;
    double f_max_seen = 0;

    /// Appends one evaluated generation and advances the generation counter.
    void record(const std::vector<Genotype>& genotypes, const std::vector<double>& fitness);

    bool operator==(const GaState&) const = default;
};

std::string to_string(Selection s);
std::string to_string(Pool p);
Selection parse_selection(const std::string& s);
Pool parse_pool(const std::string& s);

/// Rank-selection weights for a pool of n sorted best-first:
/// P(k) = B (1 - B)^k + (1 - B)^n / n with B = n^(-2/3).
std::vector<double> rank_probabilities(std::size_t n);

/// Fitness-proportional weights; uniform when every fitness is zero.
/// Throws std::invalid_argument for negative or non-finite fitness.
std::vector<double> roulette_probabilities(const std::vector<double>& fitnesses);

/// Selection candidates sorted by fitness (descending), ties by lower id.
std::vector<EvaluatedIndividual> selection_pool(const GaState& state, const GaConfig& config);

using Parents = std::pair<EvaluatedIndividual, EvaluatedIndividual>;

/// Draws `pairs` parent pairs with replacement; the two members of a pair are
/// always distinct pool entries.
std::vector<Parents> select_pairs(const std::vector<EvaluatedIndividual>& pool,
                                  const std::vector<double>& probs, std::size_t pairs, Rng& rng);

/// floor(m) genes, plus one more with probability m - floor(m).
std::size_t mutation_count(double rate, Rng& rng);

/// Adaptive rate (f_max - f)(m_max - m_min)/f_max + m_min; m_max when f_max is 0.
double adaptive_rate(double f, double f_max, double m_min, double m_max);

/// Half of the positions (a uniform random subset) come from `a` in the first
/// child and from `b` in the second; the rest the other way round.
std::pair<Genotype, Genotype> uniform_crossover(const Genotype& a, const Genotype& b, Rng& rng);

/// Proposes `config.population` distinct, never-evaluated genotypes.
/// Draw order: pair selection, then per pair mutation of both parents and
/// crossover, then duplicate resolution.
/// Throws std::runtime_error("search space exhausted") when too few unseen
/// genotypes remain.
std::vector<Genotype> next_generation(const GaState& state, const GaConfig& config,
                                      const ParameterSpace& space, Rng& rng);

}  // namespace swimevo::ga
