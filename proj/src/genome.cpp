#include "swimevo/genome.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include <fmt/format.h>

namespace swimevo {

std::size_t GenotypeHash::operator()(const Genotype& g) const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (auto i : g.indices) {
        h ^= i;
        h *= 0x100000001b3ULL;
    }
    return static_cast<std::size_t>(h);
}

ParameterSpace::ParameterSpace(std::vector<DimensionSpec> dimensions) : dims_(std::move(dimensions)) {
    if (dims_.empty()) throw std::invalid_argument("parameter space has no dimensions");
    std::unordered_set<std::string> names;
    for (const auto& dim : dims_) {
        if (dim.name.empty()) throw std::invalid_argument("dimension with empty name");
        if (!names.insert(dim.name).second)
            throw std::invalid_argument(fmt::format("duplicate dimension name '{}'", dim.name));
        if (dim.values.size() < 2)
            throw std::invalid_argument(fmt::format("dimension '{}' needs at least 2 values", dim.name));
        for (std::size_t i = 0; i < dim.values.size(); ++i) {
            if (!std::isfinite(dim.values[i]))
                throw std::invalid_argument(fmt::format("dimension '{}' has a non-finite value", dim.name));
            if (i > 0 && !(dim.values[i] > dim.values[i - 1]))
                throw std::invalid_argument(
                    fmt::format("dimension '{}' values must be strictly increasing", dim.name));
        }
        if (dim.period) {
            const double p = *dim.period;
            if (!(p > 0) || !std::isfinite(p))
                throw std::invalid_argument(fmt::format("dimension '{}' has a non-positive period", dim.name));
            if (dim.values.front() < 0 || dim.values.back() >= p)
                throw std::invalid_argument(
                    fmt::format("dimension '{}' values must lie in [0, period)", dim.name));
        }
    }
}

std::optional<std::size_t> ParameterSpace::find(std::string_view name) const {
    for (std::size_t d = 0; d < dims_.size(); ++d)
        if (dims_[d].name == name) return d;
    return std::nullopt;
}

bool ParameterSpace::contains(const Genotype& g) const {
    if (g.size() != dims_.size()) return false;
    for (std::size_t d = 0; d < dims_.size(); ++d)
        if (g[d] >= dims_[d].size()) return false;
    return true;
}

void ParameterSpace::check(const Genotype& g) const {
    if (g.size() != dims_.size())
        throw std::invalid_argument(
            fmt::format("genotype has {} genes, space has {} dimensions", g.size(), dims_.size()));
    for (std::size_t d = 0; d < dims_.size(); ++d)
        if (g[d] >= dims_[d].size())
            throw std::invalid_argument(fmt::format("gene {} index {} out of range for '{}' ({} values)", d,
                                                    g[d], dims_[d].name, dims_[d].size()));
}

std::vector<double> ParameterSpace::values_of(const Genotype& g) const {
    std::vector<double> out(dims_.size());
    for (std::size_t d = 0; d < dims_.size(); ++d) out[d] = dims_[d].values[g[d]];
    return out;
}

std::vector<double> ParameterSpace::ranges() const {
    std::vector<double> out(dims_.size());
    for (std::size_t d = 0; d < dims_.size(); ++d) out[d] = dims_[d].range();
    return out;
}

namespace {

// k * step for k = first..last, computed from integers so that each value is
// the double nearest the intended decimal.
std::vector<double> stepped(int first, int last, int numerator, int denominator) {
    std::vector<double> v;
    for (int k = first; k <= last; ++k) v.push_back(static_cast<double>(k * numerator) / denominator);
    return v;
}

}  // namespace

ParameterSpace build_default_space() {
    return ParameterSpace({
        {"laser_power", "W", stepped(1, 8, 4, 10), std::nullopt},
        {"scan_frequency", "Hz", stepped(1, 50, 1, 10), std::nullopt},
        {"polarization_angle", "deg", stepped(0, 11, 15, 1), 180.0},
        {"thickness", "um", {50.0, 90.0}, std::nullopt},
        {"length", "mm", {6.0, 12.0, 18.0}, std::nullopt},
        {"curl_length", "mm", {1.0, 2.0, 3.0}, std::nullopt},
        {"tail_direction", "", {0.0, 1.0}, std::nullopt},
        {"dye_concentration", "mol%", {0.2, 1.0}, std::nullopt},
    });
}

std::uint64_t cardinality(const ParameterSpace& space) {
    std::uint64_t n = 1;
    for (const auto& dim : space.dimensions()) n *= dim.size();
    return n;
}

Genotype random_genotype(const ParameterSpace& space, Rng& rng) {
    Genotype g;
    g.indices.resize(space.size());
    for (std::size_t d = 0; d < space.size(); ++d) {
        std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(space[d].size() - 1));
        g[d] = pick(rng);
    }
    return g;
}

std::vector<Genotype> random_distinct_genotypes(const ParameterSpace& space, std::size_t count, Rng& rng) {
    if (count > cardinality(space))
        throw std::invalid_argument("requested more distinct genotypes than the space holds");
    std::vector<Genotype> out;
    std::unordered_set<Genotype, GenotypeHash> seen;
    while (out.size() < count) {
        auto g = random_genotype(space, rng);
        if (seen.insert(g).second) out.push_back(std::move(g));
    }
    return out;
}

std::vector<double> normalize(const ParameterSpace& space, const Genotype& g) {
    std::vector<double> out(space.size());
    for (std::size_t d = 0; d < space.size(); ++d) {
        const auto& dim = space[d];
        out[d] = (dim.values[g[d]] - dim.min()) / dim.range();
    }
    return out;
}

Genotype quantize(const ParameterSpace& space, std::span<const double> raw) {
    if (raw.size() != space.size())
        throw std::invalid_argument(
            fmt::format("quantize: {} coordinates for a {}-dimension space", raw.size(), space.size()));
    Genotype g;
    g.indices.resize(space.size());
    for (std::size_t d = 0; d < space.size(); ++d) {
        const auto& dim = space[d];
        // Distances within this tolerance count as ties so that round-off in
        // decimal grids does not decide them.
        const double tie = 1e-9 * dim.range();
        double best = std::numeric_limits<double>::infinity();
        std::uint32_t best_index = 0;
        for (std::uint32_t i = 0; i < dim.size(); ++i) {
            double dist = std::abs(raw[d] - dim.values[i]);
            if (dim.period) {
                dist = std::fmod(dist, *dim.period);
                dist = std::min(dist, *dim.period - dist);
            }
            if (dist < best - tie) {
                best = dist;
                best_index = i;
            }
        }
        g[d] = best_index;
    }
    return g;
}

Genotype mutate_gene(const ParameterSpace& space, const Genotype& g, std::size_t d, Rng& rng) {
    const auto n = static_cast<std::uint32_t>(space[d].size());
    std::uniform_int_distribution<std::uint32_t> pick(0, n - 2);
    auto replacement = pick(rng);
    if (replacement >= g[d]) ++replacement;
    Genotype out = g;
    out[d] = replacement;
    return out;
}

Genotype mutate_random_gene(const ParameterSpace& space, const Genotype& g, Rng& rng) {
    std::uniform_int_distribution<std::size_t> pick(0, space.size() - 1);
    return mutate_gene(space, g, pick(rng), rng);
}

Genotype mutate_genes(const ParameterSpace& space, const Genotype& g, std::size_t count, Rng& rng) {
    const std::size_t dims = space.size();
    count = std::min(count, dims);
    std::vector<std::size_t> positions(dims);
    std::iota(positions.begin(), positions.end(), std::size_t{0});
    Genotype out = g;
    // Partial Fisher-Yates: the first `count` slots become a uniform sample.
    for (std::size_t i = 0; i < count; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, dims - 1);
        std::swap(positions[i], positions[pick(rng)]);
        out = mutate_gene(space, out, positions[i], rng);
    }
    return out;
}

std::string format_number(double v) {
    if (v == 0) return "0";
    return fmt::format("{:.9g}", v);
}

std::string gene_label(const ParameterSpace& space, const Genotype& g, std::size_t d) {
    const auto& dim = space[d];
    const auto value = format_number(dim.values[g[d]]);
    return dim.unit.empty() ? value : value + " " + dim.unit;
}

std::string describe(const ParameterSpace& space, const Genotype& g) {
    std::string out = "(";
    for (std::size_t d = 0; d < space.size(); ++d) {
        if (d) out += ", ";
        out += gene_label(space, g, d);
    }
    return out + ")";
}

}  // namespace swimevo
