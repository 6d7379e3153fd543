#include "swimevo/pso.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace swimevo::pso {

std::vector<std::string> PsoConfig::problems() const {
    std::vector<std::string> out;
    if (!std::isfinite(w)) out.push_back("w: must be finite");
    if (!std::isfinite(c1)) out.push_back("c1: must be finite");
    if (!std::isfinite(c2)) out.push_back("c2: must be finite");
    if (swarm < 2) out.push_back("swarm: must be at least 2");
    return out;
}

SwarmState initialize(const ParameterSpace& space, const std::vector<Genotype>& first_generation) {
    SwarmState state;
    for (const auto& g : first_generation) {
        space.check(g);
        Particle p;
        p.position = space.values_of(g);
        p.velocity.assign(space.size(), 0.0);
        p.pbest_position = p.position;
        p.genotype = g;
        state.particles.push_back(std::move(p));
    }
    return state;
}

std::vector<double> velocity_update(const Particle& p, const std::vector<double>& gbest, const PsoConfig& config,
                                    const ParameterSpace& space, Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double r1 = unit(rng);
    const double r2 = unit(rng);
    std::vector<double> v(space.size());
    for (std::size_t d = 0; d < space.size(); ++d) {
        const double limit = space[d].range();
        const double raw = config.w * p.velocity[d] + config.c1 * r1 * (p.pbest_position[d] - p.position[d]) +
                           config.c2 * r2 * (gbest[d] - p.position[d]);
        v[d] = std::clamp(raw, -limit, limit);
    }
    return v;
}

std::pair<std::vector<double>, Genotype> position_update(const Particle& p, const std::vector<double>& velocity,
                                                         const ParameterSpace& space) {
    std::vector<double> x(space.size());
    for (std::size_t d = 0; d < space.size(); ++d) {
        const auto& dim = space[d];
        const double moved = p.position[d] + velocity[d];
        if (dim.period) {
            double wrapped = std::fmod(moved, *dim.period);
            if (wrapped < 0) wrapped += *dim.period;
            x[d] = wrapped;
        } else {
            x[d] = std::clamp(moved, dim.min(), dim.max());
        }
    }
    auto g = quantize(space, x);
    return {std::move(x), std::move(g)};
}

std::vector<double> gbest_reset_velocity(const ParameterSpace& space, Rng& rng) {
    std::uniform_real_distribution<double> sym(-1.0, 1.0);
    const double u = sym(rng);
    auto v = space.ranges();
    for (auto& c : v) c *= u;
    return v;
}

void register_fitness(SwarmState& state, std::size_t index, double fitness, const ParameterSpace& space, Rng& rng) {
    auto& p = state.particles.at(index);
    state.evaluated.insert(p.genotype);
    const auto evaluated_point = space.values_of(p.genotype);
    if (fitness > p.pbest_fitness) {
        p.pbest_fitness = fitness;
        p.pbest_position = evaluated_point;
    }
    if (fitness > state.gbest_fitness) {
        state.gbest_fitness = fitness;
        state.gbest_position = evaluated_point;
        p.velocity = gbest_reset_velocity(space, rng);
    }
}

void register_generation(SwarmState& state, const std::vector<double>& fitness, const ParameterSpace& space,
                         Rng& rng) {
    if (fitness.size() != state.particles.size())
        throw std::invalid_argument("register_generation: one fitness per particle required");
    for (std::size_t i = 0; i < fitness.size(); ++i) register_fitness(state, i, fitness[i], space, rng);
    ++state.generation;
}

std::vector<Genotype> next_generation(SwarmState& state, const PsoConfig& config, const ParameterSpace& space,
                                      Rng& rng) {
    if (auto issues = config.problems(); !issues.empty())
        throw std::invalid_argument(fmt::format("invalid PSO config: {}", fmt::join(issues, "; ")));
    if (state.gbest_position.empty())
        throw std::invalid_argument("next_generation: register the current generation's fitness first");
    if (state.evaluated.size() >= cardinality(space)) throw std::runtime_error("search space exhausted");

    std::vector<Genotype> out;
    out.reserve(state.particles.size());
    for (auto& p : state.particles) {
        for (std::size_t step = 0;; ++step) {
            p.velocity = velocity_update(p, state.gbest_position, config, space, rng);
            auto [x, g] = position_update(p, p.velocity, space);
            p.position = std::move(x);
            p.genotype = std::move(g);
            if (!state.evaluated.contains(p.genotype) || step >= config.max_dedup_steps) break;
        }
        if (state.evaluated.contains(p.genotype)) {
            while (state.evaluated.contains(p.genotype)) p.genotype = mutate_random_gene(space, p.genotype, rng);
            p.position = space.values_of(p.genotype);
        }
        out.push_back(p.genotype);
    }
    return out;
}

}  // namespace swimevo::pso
