#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "swimevo/fitness.hpp"

using namespace swimevo;

namespace {

double term(double n, double sigma, double peak = 0.75) {
    const double z = (n - peak) / sigma;
    return std::exp(-z * z / 2) / (sigma * std::sqrt(2 * std::numbers::pi));
}

// Every grid point, scored directly; returns the first maximizer in index order.
std::pair<Genotype, double> brute_force(const ParameterSpace& space, const SurrogateParams& params) {
    Genotype g{std::vector<std::uint32_t>(space.size(), 0)};
    Genotype best = g;
    double best_f = -1;
    while (true) {
        const double f = gaussian_sum(space, g, params);
        if (f > best_f + 1e-12) {
            best_f = f;
            best = g;
        }
        std::size_t d = space.size();
        while (d > 0) {
            --d;
            if (++g[d] < space[d].size()) break;
            g[d] = 0;
            if (d == 0) return {best, best_f};
        }
    }
}

}  // namespace

TEST_CASE("all-peak value") {
    const std::vector<double> peak(8, 0.75);
    for (double sigma : {0.05, 0.1, 0.25, 0.5}) {
        const double expected = 8 / (sigma * std::sqrt(2 * std::numbers::pi));
        CHECK(std::abs(gaussian_sum_normalized(peak, {sigma}) - expected) < 1e-9);
        CHECK(std::abs(gaussian_sum_ceiling(8, {sigma}) - expected) < 1e-9);
    }
    CHECK(gaussian_sum_normalized(peak, {0.5}) == doctest::Approx(6.38308).epsilon(1e-6));
}

TEST_CASE("one dimension off the peak") {
    std::vector<double> n(8, 0.75);
    n[3] = 0.25;
    const double v = gaussian_sum_normalized(n, {0.25});
    CHECK(v == doctest::Approx(7 * 1.595769 + std::exp(-2.0) * 1.595769).epsilon(1e-6));
    CHECK(std::abs(v - 11.3863477) < 1e-6);
    CHECK(std::abs(v - (7 * term(0.75, 0.25) + term(0.25, 0.25))) < 1e-12);
}

TEST_CASE("gaussian_sum scores the normalized genotype") {
    const auto space = build_default_space();
    Rng rng(1);
    for (int i = 0; i < 500; ++i) {
        const auto g = random_genotype(space, rng);
        double expected = 0;
        for (double n : normalize(space, g)) expected += term(n, 0.1);
        CHECK(std::abs(gaussian_sum(space, g, {0.1}) - expected) < 1e-12);
        CHECK(gaussian_sum(space, g, {0.1}) > 0);
        CHECK(gaussian_sum(space, g, {0.1}) <= gaussian_sum_ceiling(8, {0.1}));
    }
}

TEST_CASE("argmax of a two-value dimension") {
    const ParameterSpace s({DimensionSpec{"x", "", {0, 1}, std::nullopt}});
    CHECK(argmax_oracle(s, {}).first == Genotype{{1}});
}

TEST_CASE("argmax oracle matches brute force on random sub-spaces") {
    const auto full = build_default_space();
    Rng rng(2);
    std::uniform_real_distribution<double> sigma(0.03, 0.6);
    for (int t = 0; t < 100; ++t) {
        std::vector<DimensionSpec> dims;
        std::uint64_t points = 1;
        for (const auto& d : full.dimensions()) {
            std::uniform_int_distribution<std::size_t> keep(2, d.size());
            std::size_t k = keep(rng);
            while (points * k > 10000 / 2 && k > 2) --k;
            if (points * k > 10000) break;
            std::vector<double> vals = d.values;
            std::shuffle(vals.begin(), vals.end(), rng);
            vals.resize(k);
            std::sort(vals.begin(), vals.end());
            dims.push_back(DimensionSpec{d.name, d.unit, vals, d.period});
            points *= k;
        }
        const ParameterSpace sub(dims);
        REQUIRE(cardinality(sub) <= 10000);
        const SurrogateParams params{sigma(rng)};
        const auto [g, f] = argmax_oracle(sub, params);
        const auto [bg, bf] = brute_force(sub, params);
        CHECK(std::abs(f - bf) < 1e-9);
        CHECK(std::abs(gaussian_sum(sub, g, params) - bf) < 1e-9);
        (void)bg;
    }
}

TEST_CASE("providers") {
    const auto space = build_default_space();
    SurrogateFitness s(space, {0.25});
    Rng rng(3);
    const auto g = random_genotype(space, rng);
    CHECK(*s.evaluate(g) == gaussian_sum(space, g, {0.25}));
    CHECK(s.kind() == FitnessKind::surrogate);

    ExternalFitness e;
    CHECK_FALSE(e.evaluate(g).has_value());
    e.supply(g, 1.5);
    CHECK(*e.evaluate(g) == 1.5);
    e.clear(g);
    CHECK_FALSE(e.evaluate(g).has_value());
    CHECK_THROWS(e.supply(g, -1.0));
    CHECK(e.kind() == FitnessKind::external);
}
