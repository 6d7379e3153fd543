#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace swimevo {

/// Engine-wide random stream. Every stochastic operation takes one of these by
/// reference; results are reproducible for a given seed within this build.
using Rng = std::mt19937_64;

/// One quantized search dimension: an ascending list of allowed magnitudes.
struct DimensionSpec {
    std::string name;
    std::string unit;  // empty when unitless
    std::vector<double> values;
    std::optional<double> period;  // set only for periodic dimensions

    bool periodic() const { return period.has_value(); }
    std::size_t size() const { return values.size(); }
    double min() const { return values.front(); }
    double max() const { return values.back(); }
    double range() const { return values.back() - values.front(); }

    bool operator==(const DimensionSpec&) const = default;
};

/// A point of the grid, stored as one value index per dimension.
struct Genotype {
    std::vector<std::uint32_t> indices;

    std::size_t size() const { return indices.size(); }
    std::uint32_t operator[](std::size_t d) const { return indices[d]; }
    std::uint32_t& operator[](std::size_t d) { return indices[d]; }

    auto operator<=>(const Genotype&) const = default;
};

struct GenotypeHash {
    std::size_t operator()(const Genotype& g) const noexcept;
};

/// A genotype together with its measured or simulated fitness.
struct EvaluatedIndividual {
    std::uint64_t id = 0;  // evaluation order within one run
    Genotype genotype;
    double fitness = 0;
    std::uint32_t generation = 0;

    bool operator==(const EvaluatedIndividual&) const = default;
};

/// Ordered set of dimensions. Construction validates every dimension and
/// throws std::invalid_argument on malformed input.
class ParameterSpace {
public:
    ParameterSpace() = default;
    explicit ParameterSpace(std::vector<DimensionSpec> dimensions);

    const std::vector<DimensionSpec>& dimensions() const { return dims_; }
    const DimensionSpec& operator[](std::size_t d) const { return dims_[d]; }
    std::size_t size() const { return dims_.size(); }

    /// Index of the dimension with this name, if any.
    std::optional<std::size_t> find(std::string_view name) const;

    bool contains(const Genotype& g) const;

    /// Throws std::invalid_argument when g is not a grid point of this space.
    void check(const Genotype& g) const;

    /// Raw values for each gene, in dimension order.
    std::vector<double> values_of(const Genotype& g) const;

    /// Per-dimension spans (max - min).
    std::vector<double> ranges() const;

    bool operator==(const ParameterSpace&) const = default;

private:
    std::vector<DimensionSpec> dims_;
};

/// The eight-dimension robot/actuation grid (345,600 points).
ParameterSpace build_default_space();

std::uint64_t cardinality(const ParameterSpace& space);

Genotype random_genotype(const ParameterSpace& space, Rng& rng);

/// `count` pairwise-distinct random genotypes, drawn one after another and
/// redrawn on collision.
std::vector<Genotype> random_distinct_genotypes(const ParameterSpace& space, std::size_t count,
                                                Rng& rng);

/// Maps each gene to (value - min) / (max - min). Periodicity is ignored.
std::vector<double> normalize(const ParameterSpace& space, const Genotype& g);

/// Snaps raw coordinates to the nearest allowed value per dimension. Periodic
/// dimensions measure distance on the circle; ties go to the lower index.
Genotype quantize(const ParameterSpace& space, std::span<const double> raw);

/// Replaces gene `d` by a uniformly drawn different index.
Genotype mutate_gene(const ParameterSpace& space, const Genotype& g, std::size_t d, Rng& rng);

/// mutate_gene on a uniformly chosen dimension.
Genotype mutate_random_gene(const ParameterSpace& space, const Genotype& g, Rng& rng);

/// Mutates `count` distinct randomly chosen genes (count is capped at the
/// number of dimensions).
Genotype mutate_genes(const ParameterSpace& space, const Genotype& g, std::size_t count,
                      Rng& rng);

/// Human-readable label for one gene, e.g. "2 W" or "15 deg".
std::string gene_label(const ParameterSpace& space, const Genotype& g, std::size_t d);

/// Compact "(2 W, 0.5 Hz, ...)" rendering of a genotype.
std::string describe(const ParameterSpace& space, const Genotype& g);

/// Shortest decimal rendering with at most 9 significant digits.
std::string format_number(double v);

}  // namespace swimevo
