#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "swimevo/ga.hpp"
#include "swimevo/genome.hpp"
#include "swimevo/pso.hpp"

namespace swimevo {

enum class Algorithm { ga, pso };

using EngineConfig = std::variant<ga::GaConfig, pso::PsoConfig>;

std::string to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& s);
Algorithm algorithm_of(const EngineConfig& config);
std::size_t population_of(const EngineConfig& config);

/// Thrown for unusable configurations; carries one message per offending field.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const { return problems_; }

private:
    std::vector<std::string> problems_;
};

std::vector<std::string> config_problems(const EngineConfig& config);

nlohmann::json config_to_json(const EngineConfig& config);

/// Starts from the defaults of `algorithm` and overrides every field present
/// in `doc`. Unknown fields and wrong types raise ConfigError.
EngineConfig config_from_json(Algorithm algorithm, const nlohmann::json& doc);

/// Sets one named field ("m_min", "selection", "w", ...) from a JSON value.
void set_config_field(EngineConfig& config, const std::string& field, const nlohmann::json& value);

/// Column names of config_to_json, in the fixed CSV order.
std::vector<std::string> config_fields(Algorithm algorithm);

/// Ask/tell driver over either engine. Construction draws the randomized
/// first generation; afterwards the caller alternates tell() and propose().
class Optimizer {
public:
    Optimizer(ParameterSpace space, EngineConfig config, std::uint64_t seed);

    const ParameterSpace& space() const { return space_; }
    const EngineConfig& config() const { return config_; }
    Algorithm algorithm() const { return algorithm_of(config_); }
    std::size_t population() const { return population_of(config_); }

    /// Generation currently waiting for (or holding) fitness values.
    std::uint32_t generation() const { return generation_; }
    const std::vector<Genotype>& proposal() const { return proposal_; }
    bool awaiting_fitness() const { return awaiting_; }

    /// Feeds fitness for every genotype of the current proposal, in order.
    void tell(const std::vector<double>& fitness);

    /// Draws the next generation from the engine.
    void propose();

    bool has_best() const { return has_best_; }
    double best_fitness() const { return best_fitness_; }
    const Genotype& best_genotype() const { return best_genotype_; }

    /// Highest fitness the engine has recorded (GA f_max / PSO gbest).
    double engine_best() const;

    const ga::GaState* ga_state() const { return std::get_if<ga::GaState>(&engine_); }
    const pso::SwarmState* swarm_state() const { return std::get_if<pso::SwarmState>(&engine_); }

    bool operator==(const Optimizer&) const = default;

private:
    ParameterSpace space_;
    EngineConfig config_;
    Rng rng_;
    std::variant<ga::GaState, pso::SwarmState> engine_;
    std::vector<Genotype> proposal_;
    std::uint32_t generation_ = 0;
    bool awaiting_ = true;
    bool has_best_ = false;
    double best_fitness_ = 0;
    Genotype best_genotype_;
};

}  // namespace swimevo
