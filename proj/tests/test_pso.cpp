#include <doctest.h>

#include <cmath>
#include <set>

#include "swimevo/fitness.hpp"
#include "swimevo/pso.hpp"

using namespace swimevo;
using namespace swimevo::pso;

namespace {

Particle at(const ParameterSpace& space, const Genotype& g) {
    Particle p;
    p.genotype = g;
    p.position = space.values_of(g);
    p.velocity.assign(space.size(), 0.0);
    p.pbest_position = p.position;
    return p;
}

// Ratio v_d / R_d, which must be the same scalar for every component.
void check_scaled_ranges(const ParameterSpace& space, const std::vector<double>& v) {
    const auto r = space.ranges();
    const double u = v[0] / r[0];
    CHECK(std::abs(u) <= 1.0);
    for (std::size_t d = 0; d < v.size(); ++d) CHECK(v[d] == doctest::Approx(u * r[d]).epsilon(1e-12));
}

}  // namespace

TEST_CASE("velocity vanishes at the attractors without inertia") {
    const auto space = build_default_space();
    Rng rng(1);
    const auto g = random_genotype(space, rng);
    auto p = at(space, g);
    p.velocity = {1, 1, 1, 1, 1, 1, 1, 1};
    PsoConfig cfg;
    cfg.w = 0;
    for (double v : velocity_update(p, p.position, cfg, space, rng)) CHECK(v == 0.0);
}

TEST_CASE("pure inertia keeps the velocity, clamped to the range") {
    const auto space = build_default_space();
    Rng rng(2);
    auto p = at(space, random_genotype(space, rng));
    p.velocity = {5.0, -0.3, 10, -100, 1, 0, 0.5, 0.1};
    PsoConfig cfg;
    cfg.w = 1;
    cfg.c1 = cfg.c2 = 0;
    const auto v = velocity_update(p, p.position, cfg, space, rng);
    CHECK(v[0] == doctest::Approx(2.8));  // 5.0 clamped to 3.2 - 0.4
    CHECK(v[1] == doctest::Approx(-0.3));
    CHECK(v[2] == doctest::Approx(10));
    CHECK(v[3] == doctest::Approx(-40));
    CHECK(v[6] == doctest::Approx(0.5));
}

TEST_CASE("velocity clamp holds on random states") {
    const auto space = build_default_space();
    const auto r = space.ranges();
    Rng rng(3);
    std::uniform_real_distribution<double> coef(0, 3);
    std::uniform_real_distribution<double> big(-1000, 1000);
    for (int i = 0; i < 5000; ++i) {
        auto p = at(space, random_genotype(space, rng));
        for (auto& v : p.velocity) v = big(rng);
        p.pbest_position = space.values_of(random_genotype(space, rng));
        PsoConfig cfg{coef(rng), coef(rng), coef(rng)};
        const auto v = velocity_update(p, space.values_of(random_genotype(space, rng)), cfg, space, rng);
        for (std::size_t d = 0; d < v.size(); ++d) REQUIRE(std::abs(v[d]) <= r[d] + 1e-12);
    }
}

TEST_CASE("position update") {
    const auto space = build_default_space();
    Genotype g{{4, 48, 10, 0, 0, 0, 0, 0}};  // 2.0 W, 4.9 Hz, 150 deg
    const auto p = at(space, g);

    const auto [same_pos, same_g] = position_update(p, std::vector<double>(8, 0.0), space);
    CHECK(same_g == g);
    CHECK(same_pos == p.position);

    std::vector<double> v(8, 0.0);
    v[2] = 45;
    const auto [wpos, wg] = position_update(p, v, space);
    CHECK(wpos[2] == doctest::Approx(15));
    CHECK(space[2].values[wg[2]] == doctest::Approx(15));

    v.assign(8, 0.0);
    v[1] = 0.4;
    const auto [cpos, cg] = position_update(p, v, space);
    CHECK(cpos[1] == doctest::Approx(5.0));
    CHECK(space[1].values[cg[1]] == doctest::Approx(5.0));

    v.assign(8, 0.0);
    v[2] = -165;  // 150 - 165 = -15 wraps to 165
    const auto [npos, ng] = position_update(p, v, space);
    CHECK(npos[2] == doctest::Approx(165));
    CHECK(ng[2] == 11);
}

TEST_CASE("gbest reset velocity is a scaled range vector") {
    const auto space = build_default_space();
    const std::vector<double> expected = {2.8, 4.9, 165, 40, 12, 2, 1, 0.8};
    const auto r = space.ranges();
    for (std::size_t d = 0; d < 8; ++d) CHECK(r[d] == doctest::Approx(expected[d]));
    Rng rng(4);
    double lo = 1, hi = -1;
    for (int i = 0; i < 2000; ++i) {
        const auto v = gbest_reset_velocity(space, rng);
        check_scaled_ranges(space, v);
        lo = std::min(lo, v[0] / r[0]);
        hi = std::max(hi, v[0] / r[0]);
    }
    CHECK(lo < -0.95);
    CHECK(hi > 0.95);
}

TEST_CASE("register fitness") {
    const auto space = build_default_space();
    Rng rng(5);
    auto st = initialize(space, random_distinct_genotypes(space, 8, rng));
    CHECK(st.particles.size() == 8);
    CHECK(st.evaluated.empty());
    for (const auto& p : st.particles)
        for (double v : p.velocity) CHECK(v == 0.0);

    register_fitness(st, 0, 5.0, space, rng);
    CHECK(st.gbest_fitness == 5.0);
    CHECK(st.gbest_position == st.particles[0].position);
    check_scaled_ranges(space, st.particles[0].velocity);

    // Below pbest and gbest: nothing but bookkeeping.
    auto before = st;
    register_fitness(st, 0, 1.0, space, rng);
    CHECK(st.particles[0] == before.particles[0]);
    CHECK(st.gbest_fitness == 5.0);

    // Better than pbest, below gbest: pbest moves, velocity does not.
    register_fitness(st, 1, 3.0, space, rng);
    CHECK(st.particles[1].pbest_fitness == 3.0);
    for (double v : st.particles[1].velocity) CHECK(v == 0.0);

    register_fitness(st, 1, 7.0, space, rng);
    CHECK(st.gbest_fitness == 7.0);
    CHECK(st.gbest_position == st.particles[1].position);
    check_scaled_ranges(space, st.particles[1].velocity);
}

TEST_CASE("next generation avoids evaluated points") {
    const auto space = build_default_space();
    Rng rng(6);
    std::uniform_real_distribution<double> coef(0, 3);
    for (int trial = 0; trial < 300; ++trial) {
        PsoConfig cfg{coef(rng), coef(rng), coef(rng)};
        const auto first = random_distinct_genotypes(space, 8, rng);
        auto st = initialize(space, first);
        std::set<Genotype> seen(first.begin(), first.end());
        const SurrogateParams params{0.1 + 0.1 * (trial % 4)};
        for (int gen = 0; gen < 4; ++gen) {
            std::vector<double> fit;
            for (const auto& p : st.particles) fit.push_back(gaussian_sum(space, p.genotype, params));
            register_generation(st, fit, space, rng);
            const auto next = next_generation(st, cfg, space, rng);
            REQUIRE(next.size() == 8);
            for (std::size_t i = 0; i < next.size(); ++i) {
                CHECK_FALSE(seen.contains(next[i]));
                CHECK(st.particles[i].genotype == next[i]);
                const auto r = space.ranges();
                for (std::size_t d = 0; d < r.size(); ++d) CHECK(std::abs(st.particles[i].velocity[d]) <= r[d] + 1e-12);
            }
            CHECK(std::set<Genotype>(st.evaluated.begin(), st.evaluated.end()).size() <= seen.size());
            seen.insert(next.begin(), next.end());
        }
    }
}

TEST_CASE("next generation is deterministic") {
    const auto space = build_default_space();
    Rng seed_rng(7);
    auto base = initialize(space, random_distinct_genotypes(space, 8, seed_rng));
    std::vector<double> fit;
    for (const auto& p : base.particles) fit.push_back(gaussian_sum(space, p.genotype, {}));
    register_generation(base, fit, space, seed_rng);
    auto a = base, b = base;
    Rng ra(99), rb(99);
    CHECK(next_generation(a, PsoConfig{}, space, ra) == next_generation(b, PsoConfig{}, space, rb));
    CHECK(a == b);
}

TEST_CASE("next generation requires a scored swarm") {
    const auto space = build_default_space();
    Rng rng(8);
    auto st = initialize(space, random_distinct_genotypes(space, 8, rng));
    CHECK_THROWS(next_generation(st, PsoConfig{}, space, rng));
}

TEST_CASE("config validation") {
    CHECK(PsoConfig{}.problems().empty());
    PsoConfig bad;
    bad.w = std::nan("");
    CHECK_FALSE(bad.problems().empty());
    PsoConfig none;
    none.swarm = 0;
    CHECK_FALSE(none.problems().empty());
}
