#include "swimevo/ga.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include <fmt/format.h>

namespace swimevo::ga {

std::vector<std::string> GaConfig::problems() const {
    std::vector<std::string> out;
    if (!std::isfinite(m_min) || m_min < 0) out.push_back("m_min: must be a finite number >= 0");
    if (!std::isfinite(m_max) || m_max < m_min) out.push_back("m_max: must be a finite number >= m_min");
    if (!adaptive && m_min != m_max)
        out.push_back("m_max: a constant (non-adaptive) rate requires m_min == m_max");
    if (pairs < 1) out.push_back("pairs: must be at least 1");
    if (population != 2 * pairs) out.push_back("population: must equal 2 * pairs");
    return out;
}

void GaState::record(const std::vector<Genotype>& genotypes, const std::vector<double>& fitness) {
    if (genotypes.size() != fitness.size())
        throw std::invalid_argument("record: genotype and fitness counts differ");
    for (std::size_t i = 0; i < genotypes.size(); ++i) {
        if (history.empty() || fitness[i] > f_max_seen) f_max_seen = fitness[i];
        history.push_back({history.size(), genotypes[i], fitness[i], generation});
    }
    ++generation;
}

std::string to_string(Selection s) { return s == Selection::rank ? "rank" : "roulette"; }
std::string to_string(Pool p) { return p == Pool::elite8 ? "elite8" : "all_history"; }

Selection parse_selection(const std::string& s) {
    if (s == "rank") return Selection::rank;
    if (s == "roulette") return Selection::roulette;
    throw std::invalid_argument(fmt::format("selection: unknown method '{}' (rank|roulette)", s));
}

Pool parse_pool(const std::string& s) {
    if (s == "elite8") return Pool::elite8;
    if (s == "all_history") return Pool::all_history;
    throw std::invalid_argument(fmt::format("pool: unknown strategy '{}' (elite8|all_history)", s));
}

std::vector<double> rank_probabilities(std::size_t n) {
    if (n == 0) throw std::invalid_argument("rank_probabilities: empty pool");
    const double nn = static_cast<double>(n);
    const double b = std::pow(nn, -2.0 / 3.0);
    const double floor_share = std::pow(1.0 - b, nn) / nn;
    std::vector<double> p(n);
    for (std::size_t k = 0; k < n; ++k) p[k] = b * std::pow(1.0 - b, static_cast<double>(k)) + floor_share;
    return p;
}

std::vector<double> roulette_probabilities(const std::vector<double>& fitnesses) {
    if (fitnesses.empty()) throw std::invalid_argument("roulette_probabilities: empty pool");
    double total = 0;
    for (double f : fitnesses) {
        if (!std::isfinite(f) || f < 0)
            throw std::invalid_argument("roulette_probabilities: fitness must be finite and >= 0");
        total += f;
    }
    std::vector<double> p(fitnesses.size());
    if (total == 0) {
        std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(p.size()));
    } else {
        for (std::size_t k = 0; k < p.size(); ++k) p[k] = fitnesses[k] / total;
    }
    return p;
}

std::vector<EvaluatedIndividual> selection_pool(const GaState& state, const GaConfig& config) {
    std::vector<EvaluatedIndividual> pool = state.history;
    std::stable_sort(pool.begin(), pool.end(), [](const auto& a, const auto& b) {
        if (a.fitness != b.fitness) return a.fitness > b.fitness;
        return a.id < b.id;
    });
    if (config.pool == Pool::elite8 && pool.size() > kEliteSize) pool.resize(kEliteSize);
    return pool;
}

std::vector<Parents> select_pairs(const std::vector<EvaluatedIndividual>& pool, const std::vector<double>& probs,
                                  std::size_t pairs, Rng& rng) {
    if (pool.size() < 2) throw std::invalid_argument("select_pairs: a pool of fewer than 2 cannot form a pair");
    if (probs.size() != pool.size()) throw std::invalid_argument("select_pairs: probability vector size mismatch");

    std::vector<Parents> out;
    out.reserve(pairs);
    for (std::size_t i = 0; i < pairs; ++i) {
        std::discrete_distribution<std::size_t> first_pick(probs.begin(), probs.end());
        const std::size_t first = first_pick(rng);

        // The second member is drawn from the same weights with the first
        // excluded, which is the redraw-until-different rule without the
        // rejection loop. All-zero remaining mass falls back to uniform.
        std::vector<double> rest = probs;
        rest[first] = 0;
        if (std::all_of(rest.begin(), rest.end(), [](double w) { return w <= 0; })) {
            std::fill(rest.begin(), rest.end(), 1.0);
            rest[first] = 0;
        }
        std::discrete_distribution<std::size_t> second_pick(rest.begin(), rest.end());
        const std::size_t second = second_pick(rng);
        out.emplace_back(pool[first], pool[second]);
    }
    return out;
}

std::size_t mutation_count(double rate, Rng& rng) {
    if (!(rate >= 0)) throw std::invalid_argument("mutation_count: rate must be >= 0");
    const double whole = std::floor(rate);
    const double fraction = rate - whole;
    auto count = static_cast<std::size_t>(whole);
    if (fraction > 0) {
        std::bernoulli_distribution extra(fraction);
        if (extra(rng)) ++count;
    }
    return count;
}

double adaptive_rate(double f, double f_max, double m_min, double m_max) {
    if (f_max <= 0) return m_max;
    return (f_max - f) * (m_max - m_min) / f_max + m_min;
}

std::pair<Genotype, Genotype> uniform_crossover(const Genotype& a, const Genotype& b, Rng& rng) {
    if (a.size() != b.size()) throw std::invalid_argument("uniform_crossover: parents differ in length");
    const std::size_t n = a.size();
    std::vector<std::size_t> positions(n);
    std::iota(positions.begin(), positions.end(), std::size_t{0});
    for (std::size_t i = 0; i < n / 2; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(positions[i], positions[pick(rng)]);
    }
    Genotype first = b;
    Genotype second = a;
    for (std::size_t i = 0; i < n / 2; ++i) {
        first[positions[i]] = a[positions[i]];
        second[positions[i]] = b[positions[i]];
    }
    return {std::move(first), std::move(second)};
}

namespace {

double parent_rate(const EvaluatedIndividual& parent, const GaState& state, const GaConfig& config) {
    if (!config.adaptive) return config.m_min;
    const double f = std::clamp(parent.fitness, 0.0, std::max(state.f_max_seen, 0.0));
    return adaptive_rate(f, state.f_max_seen, config.m_min, config.m_max);
}

}  // namespace

std::vector<Genotype> next_generation(const GaState& state, const GaConfig& config, const ParameterSpace& space,
                                      Rng& rng) {
    if (auto issues = config.problems(); !issues.empty())
        throw std::invalid_argument(fmt::format("invalid GA config: {}", fmt::join(issues, "; ")));
    if (state.history.size() + config.population > cardinality(space))
        throw std::runtime_error("search space exhausted");

    std::unordered_set<Genotype, GenotypeHash> seen;
    for (const auto& ind : state.history) seen.insert(ind.genotype);
    if (seen.size() < 2) throw std::invalid_argument("next_generation: history needs 2 distinct individuals");

    const auto pool = selection_pool(state, config);
    std::vector<double> probs;
    if (config.selection == Selection::rank) {
        probs = rank_probabilities(pool.size());
    } else {
        std::vector<double> f;
        for (const auto& ind : pool) f.push_back(ind.fitness);
        probs = roulette_probabilities(f);
    }
    const auto parents = select_pairs(pool, probs, config.pairs, rng);

    std::vector<Genotype> children;
    children.reserve(config.population);
    for (const auto& [a, b] : parents) {
        const auto mutated_a = mutate_genes(space, a.genotype, mutation_count(parent_rate(a, state, config), rng), rng);
        const auto mutated_b = mutate_genes(space, b.genotype, mutation_count(parent_rate(b, state, config), rng), rng);
        auto [c1, c2] = uniform_crossover(mutated_a, mutated_b, rng);
        children.push_back(std::move(c1));
        children.push_back(std::move(c2));
    }

    // A child must be new to the run and to this batch; duplicates take single
    // random gene mutations until they are.
    for (auto& child : children) {
        while (seen.contains(child)) child = mutate_random_gene(space, child, rng);
        seen.insert(child);
    }
    return children;
}

}  // namespace swimevo::ga
