#include "swimevo/optimizer.hpp"

#include <fmt/format.h>

namespace swimevo {

std::string to_string(Algorithm a) { return a == Algorithm::ga ? "ga" : "pso"; }

Algorithm parse_algorithm(const std::string& s) {
    if (s == "ga") return Algorithm::ga;
    if (s == "pso") return Algorithm::pso;
    throw ConfigError({fmt::format("algorithm: unknown algorithm '{}' (ga|pso)", s)});
}

Algorithm algorithm_of(const EngineConfig& config) {
    return std::holds_alternative<ga::GaConfig>(config) ? Algorithm::ga : Algorithm::pso;
}

std::size_t population_of(const EngineConfig& config) {
    if (const auto* g = std::get_if<ga::GaConfig>(&config)) return g->population;
    return std::get<pso::PsoConfig>(config).swarm;
}

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::invalid_argument(fmt::format("invalid configuration: {}", fmt::join(problems, "; "))),
      problems_(std::move(problems)) {}

std::vector<std::string> config_problems(const EngineConfig& config) {
    return std::visit([](const auto& c) { return c.problems(); }, config);
}

nlohmann::json config_to_json(const EngineConfig& config) {
    if (const auto* g = std::get_if<ga::GaConfig>(&config)) {
        return {{"selection", ga::to_string(g->selection)},
                {"pool", ga::to_string(g->pool)},
                {"m_min", g->m_min},
                {"m_max", g->m_max},
                {"adaptive", g->adaptive},
                {"population", g->population},
                {"pairs", g->pairs}};
    }
    const auto& p = std::get<pso::PsoConfig>(config);
    return {{"w", p.w}, {"c1", p.c1}, {"c2", p.c2}, {"swarm", p.swarm}, {"max_dedup_steps", p.max_dedup_steps}};
}

std::vector<std::string> config_fields(Algorithm algorithm) {
    if (algorithm == Algorithm::ga) return {"selection", "pool", "m_min", "m_max", "adaptive", "population", "pairs"};
    return {"w", "c1", "c2", "swarm", "max_dedup_steps"};
}

namespace {

double as_number(const std::string& field, const nlohmann::json& v) {
    if (!v.is_number()) throw ConfigError({fmt::format("{}: expected a number", field)});
    return v.get<double>();
}

std::size_t as_count(const std::string& field, const nlohmann::json& v) {
    if (!v.is_number_integer() || v.get<long long>() < 0)
        throw ConfigError({fmt::format("{}: expected a non-negative integer", field)});
    return v.get<std::size_t>();
}

std::string as_string(const std::string& field, const nlohmann::json& v) {
    if (!v.is_string()) throw ConfigError({fmt::format("{}: expected a string", field)});
    return v.get<std::string>();
}

}  // namespace

void set_config_field(EngineConfig& config, const std::string& field, const nlohmann::json& value) {
    if (auto* g = std::get_if<ga::GaConfig>(&config)) {
        try {
            if (field == "selection") g->selection = ga::parse_selection(as_string(field, value));
            else if (field == "pool") g->pool = ga::parse_pool(as_string(field, value));
            else if (field == "m_min") g->m_min = as_number(field, value);
            else if (field == "m_max") g->m_max = as_number(field, value);
            else if (field == "rate") g->m_min = g->m_max = as_number(field, value);
            else if (field == "adaptive") {
                if (!value.is_boolean()) throw ConfigError({"adaptive: expected true or false"});
                g->adaptive = value.get<bool>();
            } else if (field == "population") g->population = as_count(field, value);
            else if (field == "pairs") g->pairs = as_count(field, value);
            else throw ConfigError({fmt::format("{}: not a GA configuration field", field)});
        } catch (const ConfigError&) {
            throw;
        } catch (const std::invalid_argument& e) {
            throw ConfigError({e.what()});
        }
        return;
    }
    auto& p = std::get<pso::PsoConfig>(config);
    if (field == "w") p.w = as_number(field, value);
    else if (field == "c1") p.c1 = as_number(field, value);
    else if (field == "c2") p.c2 = as_number(field, value);
    else if (field == "swarm") p.swarm = as_count(field, value);
    else if (field == "max_dedup_steps") p.max_dedup_steps = as_count(field, value);
    else throw ConfigError({fmt::format("{}: not a PSO configuration field", field)});
}

EngineConfig config_from_json(Algorithm algorithm, const nlohmann::json& doc) {
    EngineConfig config = algorithm == Algorithm::ga ? EngineConfig{ga::GaConfig{}} : EngineConfig{pso::PsoConfig{}};
    if (doc.is_null()) return config;
    if (!doc.is_object()) throw ConfigError({"config: expected an object"});

    std::vector<std::string> problems;
    // "population" alone implies the pair count.
    if (algorithm == Algorithm::ga && doc.contains("population") && !doc.contains("pairs") &&
        doc["population"].is_number_integer()) {
        std::get<ga::GaConfig>(config).pairs = doc["population"].get<std::size_t>() / 2;
    }
    for (const auto& [key, value] : doc.items()) {
        try {
            set_config_field(config, key, value);
        } catch (const ConfigError& e) {
            problems.insert(problems.end(), e.problems().begin(), e.problems().end());
        }
    }
    // A constant rate given only as m_min or m_max applies to both ends.
    if (auto* g = std::get_if<ga::GaConfig>(&config); g && !g->adaptive && problems.empty()) {
        if (doc.contains("m_min") && !doc.contains("m_max")) g->m_max = g->m_min;
        if (doc.contains("m_max") && !doc.contains("m_min")) g->m_min = g->m_max;
    }
    if (problems.empty()) problems = config_problems(config);
    if (!problems.empty()) throw ConfigError(std::move(problems));
    return config;
}

Optimizer::Optimizer(ParameterSpace space, EngineConfig config, std::uint64_t seed)
    : space_(std::move(space)), config_(std::move(config)), rng_(seed) {
    if (auto problems = config_problems(config_); !problems.empty()) throw ConfigError(std::move(problems));
    proposal_ = random_distinct_genotypes(space_, population(), rng_);
    if (algorithm() == Algorithm::ga) {
        engine_ = ga::GaState{};
    } else {
        engine_ = pso::initialize(space_, proposal_);
    }
}

void Optimizer::tell(const std::vector<double>& fitness) {
    if (!awaiting_) throw std::logic_error("tell: the current generation has already been scored");
    if (fitness.size() != proposal_.size())
        throw std::invalid_argument(
            fmt::format("tell: expected {} fitness values, got {}", proposal_.size(), fitness.size()));
    if (auto* ga_state = std::get_if<ga::GaState>(&engine_)) {
        ga_state->record(proposal_, fitness);
    } else {
        pso::register_generation(std::get<pso::SwarmState>(engine_), fitness, space_, rng_);
    }
    for (std::size_t i = 0; i < fitness.size(); ++i) {
        if (!has_best_ || fitness[i] > best_fitness_) {
            has_best_ = true;
            best_fitness_ = fitness[i];
            best_genotype_ = proposal_[i];
        }
    }
    awaiting_ = false;
}

void Optimizer::propose() {
    if (awaiting_) throw std::logic_error("propose: the current generation has not been scored yet");
    if (auto* ga_state = std::get_if<ga::GaState>(&engine_)) {
        proposal_ = ga::next_generation(*ga_state, std::get<ga::GaConfig>(config_), space_, rng_);
    } else {
        proposal_ =
            pso::next_generation(std::get<pso::SwarmState>(engine_), std::get<pso::PsoConfig>(config_), space_, rng_);
    }
    ++generation_;
    awaiting_ = true;
}

double Optimizer::engine_best() const {
    if (const auto* g = ga_state()) return g->f_max_seen;
    return swarm_state()->gbest_fitness;
}

}  // namespace swimevo
