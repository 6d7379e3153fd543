#pragma once

#include <optional>
#include <span>
#include <unordered_map>
#include <string>
#include <utility>

#include <json.hpp>

#include "swimevo/genome.hpp"

namespace swimevo {

enum class FitnessKind { surrogate, external };

/// Common face of everything that scores a genotype. Surrogates answer
/// immediately; external providers (lab measurements) answer once a value has
/// been supplied for the genotype.
class FitnessProvider {
public:
    virtual ~FitnessProvider() = default;

    virtual FitnessKind kind() const = 0;
    virtual nlohmann::json descriptor() const = 0;

    /// Fitness of g, or nullopt while an external value is still pending.
    virtual std::optional<double> evaluate(const Genotype& g) const = 0;
};

struct SurrogateParams {
    double sigma = 0.25;
    double peak_fraction = 0.75;
};

/// Sum over dimensions of a normal density centred at `peak_fraction` of the
/// normalized range:  sum_d exp(-z_d^2 / 2) / (sigma sqrt(2 pi)),
/// z_d = (n_d - peak_fraction) / sigma.
double gaussian_sum(const ParameterSpace& space, const Genotype& g, const SurrogateParams& params);

/// Same landscape evaluated on arbitrary normalized coordinates.
double gaussian_sum_normalized(std::span<const double> normalized, const SurrogateParams& params);

/// Upper bound of gaussian_sum: every dimension exactly at the peak.
double gaussian_sum_ceiling(std::size_t dimensions, const SurrogateParams& params);

/// Exact maximizer of gaussian_sum, found dimension by dimension (the sum is
/// separable). Ties go to the lower index.
std::pair<Genotype, double> argmax_oracle(const ParameterSpace& space, const SurrogateParams& params);

class SurrogateFitness final : public FitnessProvider {
public:
    SurrogateFitness(ParameterSpace space, SurrogateParams params);

    FitnessKind kind() const override { return FitnessKind::surrogate; }
    nlohmann::json descriptor() const override;
    std::optional<double> evaluate(const Genotype& g) const override;

    const SurrogateParams& params() const { return params_; }

private:
    ParameterSpace space_;
    SurrogateParams params_;
};

/// Fitness supplied from outside (measured swimming speed). Values are
/// attached per genotype as they come in.
class ExternalFitness final : public FitnessProvider {
public:
    explicit ExternalFitness(std::string source = "measured_speed");

    FitnessKind kind() const override { return FitnessKind::external; }
    nlohmann::json descriptor() const override;
    std::optional<double> evaluate(const Genotype& g) const override;

    /// Throws std::invalid_argument for negative or non-finite values.
    void supply(const Genotype& g, double fitness);
    void clear(const Genotype& g);

private:
    std::string source_;
    std::unordered_map<Genotype, double, GenotypeHash> values_;
};

}  // namespace swimevo
