#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "swimevo/genome.hpp"

namespace swimevo::pso {

struct PsoConfig {
    double w = 0.0;   // inertia weight
    double c1 = 0.2;  // cognitive coefficient
    double c2 = 1.4;  // social coefficient
    std::size_t swarm = 8;
    std::size_t max_dedup_steps = 5;

    std::vector<std::string> problems() const;

    bool operator==(const PsoConfig&) const = default;
};

/// Positions and velocities are kept in raw units; the genotype is the
/// quantized view of the position.
struct Particle {
    std::vector<double> position;
    std::vector<double> velocity;
    std::vector<double> pbest_position;
    double pbest_fitness = -std::numeric_limits<double>::infinity();
    Genotype genotype;

    bool operator==(const Particle&) const = default;
};

struct SwarmState {
    std::vector<Particle> particles;
    std::vector<double> gbest_position;
    double gbest_fitness = -std::numeric_limits<double>::infinity();
    std::unordered_set<Genotype, GenotypeHash> evaluated;
    std::uint32_t generation = 0;

    bool operator==(const SwarmState&) const = default;
};

/// Places one particle on each genotype of the random first generation, at
/// rest.
SwarmState initialize(const ParameterSpace& space, const std::vector<Genotype>& first_generation);

/// w v + c1 r1 (pbest - x) + c2 r2 (gbest - x) with scalar r1, r2 ~ U[0,1],
/// then each component clamped to +/- the dimension's range.
std::vector<double> velocity_update(const Particle& p, const std::vector<double>& gbest, const PsoConfig& config,
                                    const ParameterSpace& space, Rng& rng);

/// x + v, clipped to [min, max] (non-periodic) or wrapped by the period, then
/// quantized.
std::pair<std::vector<double>, Genotype> position_update(const Particle& p, const std::vector<double>& velocity,
                                                         const ParameterSpace& space);

/// u * (range_1, ..., range_D) for a single u ~ U[-1, 1].
std::vector<double> gbest_reset_velocity(const ParameterSpace& space, Rng& rng);

/// Records the fitness of particle `index`'s current genotype. A new global
/// best re-energizes that particle with gbest_reset_velocity. Callers feed
/// particles in index order.
void register_fitness(SwarmState& state, std::size_t index, double fitness, const ParameterSpace& space, Rng& rng);

/// Feeds a whole generation (one fitness per particle, in index order) and
/// advances the generation counter.
void register_generation(SwarmState& state, const std::vector<double>& fitness, const ParameterSpace& space,
                         Rng& rng);

/// Moves every particle and returns the new genotypes (one per particle).
/// A genotype seen in an earlier generation triggers up to
/// `max_dedup_steps` further PSO steps, then single random gene mutations.
/// Repeats inside the returned generation are allowed.
std::vector<Genotype> next_generation(SwarmState& state, const PsoConfig& config, const ParameterSpace& space,
                                      Rng& rng);

}  // namespace swimevo::pso
