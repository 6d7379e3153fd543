#include "swimevo/fitness.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace swimevo {

namespace {

void check_params(const SurrogateParams& params) {
    if (!(params.sigma > 0) || !std::isfinite(params.sigma))
        throw std::invalid_argument("surrogate: sigma must be a positive number");
    if (!(params.peak_fraction >= 0 && params.peak_fraction <= 1))
        throw std::invalid_argument("surrogate: peak_fraction must lie in [0, 1]");
}

double density(double normalized, const SurrogateParams& params) {
    const double z = (normalized - params.peak_fraction) / params.sigma;
    return std::exp(-0.5 * z * z) / (params.sigma * std::sqrt(2.0 * std::numbers::pi));
}

}  // namespace

double gaussian_sum_normalized(std::span<const double> normalized, const SurrogateParams& params) {
    check_params(params);
    double sum = 0;
    for (double n : normalized) sum += density(n, params);
    return sum;
}

double gaussian_sum(const ParameterSpace& space, const Genotype& g, const SurrogateParams& params) {
    const auto n = normalize(space, g);
    return gaussian_sum_normalized(n, params);
}

double gaussian_sum_ceiling(std::size_t dimensions, const SurrogateParams& params) {
    check_params(params);
    return static_cast<double>(dimensions) / (params.sigma * std::sqrt(2.0 * std::numbers::pi));
}

std::pair<Genotype, double> argmax_oracle(const ParameterSpace& space, const SurrogateParams& params) {
    check_params(params);
    Genotype best;
    best.indices.resize(space.size());
    double total = 0;
    for (std::size_t d = 0; d < space.size(); ++d) {
        const auto& dim = space[d];
        double best_term = -1;
        for (std::uint32_t i = 0; i < dim.size(); ++i) {
            const double term = density((dim.values[i] - dim.min()) / dim.range(), params);
            if (term > best_term) {
                best_term = term;
                best[d] = i;
            }
        }
        total += best_term;
    }
    return {best, total};
}

SurrogateFitness::SurrogateFitness(ParameterSpace space, SurrogateParams params)
    : space_(std::move(space)), params_(params) {
    check_params(params_);
}

nlohmann::json SurrogateFitness::descriptor() const {
    return {{"kind", "surrogate"}, {"sigma", params_.sigma}, {"peak_fraction", params_.peak_fraction}};
}

std::optional<double> SurrogateFitness::evaluate(const Genotype& g) const {
    return gaussian_sum(space_, g, params_);
}

ExternalFitness::ExternalFitness(std::string source) : source_(std::move(source)) {}

nlohmann::json ExternalFitness::descriptor() const { return {{"kind", "external"}, {"source", source_}}; }

std::optional<double> ExternalFitness::evaluate(const Genotype& g) const {
    if (auto it = values_.find(g); it != values_.end()) return it->second;
    return std::nullopt;
}

void ExternalFitness::supply(const Genotype& g, double fitness) {
    if (!std::isfinite(fitness) || fitness < 0)
        throw std::invalid_argument("external fitness must be a finite number >= 0");
    values_[g] = fitness;
}

void ExternalFitness::clear(const Genotype& g) { values_.erase(g); }

}  // namespace swimevo
