// acceptance report: one line per criterion, exit status 1 if any fails

#include <array>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "swimevo/session.hpp"
#include "swimevo/sweep.hpp"

using namespace swimevo;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kBaseSeed = 1;
constexpr double kMinZ = 2.0;
constexpr double kMinLift = 0.20;
constexpr double kSumTolerance = 1e-12;
constexpr double kRankP0 = 0.262514;
constexpr double kRankP0Tolerance = 1e-6;
constexpr double kPeakTolerance = 1e-9;

std::size_t workers() { return std::max(1u, std::thread::hardware_concurrency()); }

int failures = 0;
int known_failures = 0;
std::set<std::string> known;

// Criteria named with --known-fail still print FAIL but do not set the exit code.
void report(const std::string& tag, bool ok, const std::string& name, const std::string& detail) {
    const bool excused = !ok && known.contains(tag);
    std::cout << (ok ? "PASS" : "FAIL") << "  " << name << "  [" << detail << "]" << (excused ? "  (known)" : "") << "\n"
              << std::flush;
    if (excused)
        ++known_failures;
    else if (!ok)
        ++failures;
}

double z_stat(const SweepCell& a, const SweepCell& b) {
    const double se = std::sqrt(a.std_best * a.std_best / static_cast<double>(a.repetitions) +
                                b.std_best * b.std_best / static_cast<double>(b.repetitions));
    return (a.mean_best - b.mean_best) / se;
}

const SweepCell& cell(const std::vector<SweepCell>& cells, double sigma, const std::function<bool(const EngineConfig&)>& f) {
    for (const auto& c : cells)
        if (c.sigma == sigma && f(c.config)) return c;
    throw std::logic_error("cell not found");
}

ga::GaConfig ga_base() {
    ga::GaConfig g;
    g.selection = ga::Selection::rank;
    g.pool = ga::Pool::elite8;
    g.m_min = g.m_max = 1.0;
    return g;
}

void selection_pool_trend() {
    SweepSpec spec;
    spec.base = ga_base();
    spec.sigmas = {0.1, 0.25};
    spec.grid = {{"pool", {"elite8", "all_history"}}};
    spec.repetitions = 500;
    spec.base_seed = kBaseSeed;
    const auto cells = run_sweep(spec, workers());
    bool ok = true;
    std::vector<std::string> parts;
    for (double s : spec.sigmas) {
        const auto& e = cell(cells, s, [](const auto& c) { return std::get<ga::GaConfig>(c).pool == ga::Pool::elite8; });
        const auto& a = cell(cells, s, [](const auto& c) { return std::get<ga::GaConfig>(c).pool == ga::Pool::all_history; });
        const double z = z_stat(e, a);
        ok = ok && e.mean_best > a.mean_best && z > kMinZ;
        parts.push_back(fmt::format("sigma {}: elite8 {:.4f} vs all_history {:.4f}, z = {:.2f}", s, e.mean_best, a.mean_best, z));
    }
    report("pool_trend", ok, "GA elite8 pool beats all_history pool (rank, rate 1.0, 500 reps)", fmt::format("{}", fmt::join(parts, "; ")));
}

void selection_method_trend() {
    SweepSpec spec;
    spec.base = ga_base();
    spec.sigmas = {0.05, 0.25};
    spec.grid = {{"selection", {"rank", "roulette"}}};
    spec.repetitions = 1000;
    spec.base_seed = kBaseSeed;
    const auto cells = run_sweep(spec, workers());
    auto pick = [&](double s, ga::Selection sel) {
        return cell(cells, s, [sel](const auto& c) { return std::get<ga::GaConfig>(c).selection == sel; });
    };
    const auto rank25 = pick(0.25, ga::Selection::rank), roul25 = pick(0.25, ga::Selection::roulette);
    const auto rank05 = pick(0.05, ga::Selection::rank), roul05 = pick(0.05, ga::Selection::roulette);
    const double z25 = z_stat(rank25, roul25), z05 = z_stat(roul05, rank05);
    const bool ok25 = rank25.mean_best > roul25.mean_best && z25 > kMinZ;
    const bool ok05 = roul05.mean_best > rank05.mean_best && z05 > kMinZ;
    report("selection_method", ok25 && ok05, "GA rank beats roulette at sigma 0.25, roulette beats rank at sigma 0.05 (elite8, rate 1.0, 1000 reps)",
           fmt::format("sigma 0.25: rank {:.4f} vs roulette {:.4f}, z = {:.2f} ({}); sigma 0.05: roulette {:.4f} vs rank {:.4f}, "
                       "z = {:.2f} ({})",
                       rank25.mean_best, roul25.mean_best, z25, ok25 ? "ok" : "short", roul05.mean_best, rank05.mean_best, z05,
                       ok05 ? "ok" : "short"));
}

void inertia_trend() {
    SweepSpec spec;
    spec.base = pso::PsoConfig{0.0, 0.2, 1.4};
    spec.sigmas = {0.1};
    spec.grid = {{"w", {0.0, 2.8}}};
    spec.repetitions = 1000;
    spec.base_seed = kBaseSeed;
    const auto cells = run_sweep(spec, workers());
    const double z = z_stat(cells[0], cells[1]);
    report("inertia", cells[0].mean_best > cells[1].mean_best && z > kMinZ,
           "PSO w = 0 beats w = 2.8 at sigma 0.1 (c1 0.2, c2 1.4, 1000 reps)",
           fmt::format("{:.4f} vs {:.4f}, z = {:.2f}", cells[0].mean_best, cells[1].mean_best, z));
}

void social_trend() {
    SweepSpec spec;
    spec.base = pso::PsoConfig{0.0, 0.2, 1.4};
    spec.sigmas = {0.1};
    spec.grid = {{"c2", numeric_range(0, 3, 0.2)}};
    spec.repetitions = 1000;
    spec.base_seed = kBaseSeed;
    const auto cells = run_sweep(spec, workers());
    std::size_t best = 0;
    for (std::size_t i = 1; i < cells.size(); ++i)
        if (cells[i].mean_best > cells[best].mean_best) best = i;
    const double c2 = std::get<pso::PsoConfig>(cells[best].config).c2;
    report("social", c2 >= 0.6 - 1e-9 && c2 <= 1.8 + 1e-9, "PSO best c2 lies in [0.6, 1.8] at sigma 0.1 (w 0, c1 0.2, 1000 reps)",
           fmt::format("best c2 = {} with mean {:.4f}", c2, cells[best].mean_best));
}

void optimization_lift() {
    constexpr std::size_t reps = 1000;
    std::vector<std::string> parts;
    bool ok = true;
    const std::array<std::pair<const char*, EngineConfig>, 2> configs = {
        std::pair<const char*, EngineConfig>{"GA", ga_base()}, {"PSO", pso::PsoConfig{0.0, 0.2, 1.4}}};
    const auto space = build_default_space();
    for (std::size_t a = 0; a < configs.size(); ++a) {
        double first = 0, last = 0;
        for (std::size_t r = 0; r < reps; ++r) {
            TrialSpec t;
            t.config = configs[a].second;
            t.sigma = 0.25;
            t.seed = trial_seed(kBaseSeed, a, r);
            const auto res = run_trial(t, space);
            first += res.per_generation_best.front();
            last += res.best_fitness;
        }
        const double lift = last / first - 1;
        ok = ok && lift >= kMinLift;
        parts.push_back(fmt::format("{}: generation 0 {:.4f} -> after 5 {:.4f} (+{:.1f}%)", configs[a].first, first / reps,
                                    last / reps, 100 * lift));
    }
    report("lift", ok, "mean best after 5 iterations exceeds generation 0 by >= 20% at sigma 0.25 (1000 reps)",
           fmt::format("{}", fmt::join(parts, "; ")));
}

// --- invariant suites -------------------------------------------------------

struct Suite {
    std::string name;
    std::function<std::string()> run;  // empty string on success
};

std::string rank_sum_suite() {
    for (std::size_t n = 1; n <= 64; ++n) {
        const auto p = ga::rank_probabilities(n);
        const double s = std::accumulate(p.begin(), p.end(), 0.0);
        if (std::abs(s - 1) >= kSumTolerance) return fmt::format("n = {}: sum {}", n, s);
    }
    return {};
}

std::string crossover_suite() {
    const auto space = build_default_space();
    Rng rng(kBaseSeed);
    for (int i = 0; i < 10000; ++i) {
        const auto a = random_genotype(space, rng), b = random_genotype(space, rng);
        const auto [c, d] = ga::uniform_crossover(a, b, rng);
        for (std::size_t k = 0; k < a.size(); ++k)
            if (std::multiset{c[k], d[k]} != std::multiset{a[k], b[k]}) return fmt::format("pair {} position {}", i, k);
    }
    return {};
}

std::string no_duplicate_suite() {
    const auto space = build_default_space();
    Rng rng(kBaseSeed);
    std::uniform_real_distribution<double> u(0, 3);
    for (int i = 0; i < 1000; ++i) {
        // GA on a random history of 1..5 generations
        ga::GaState st;
        const std::size_t gens = 1 + i % 5;
        const auto gs = random_distinct_genotypes(space, 8 * gens, rng);
        for (std::size_t g = 0; g < gens; ++g) {
            std::vector<Genotype> batch(gs.begin() + 8 * g, gs.begin() + 8 * (g + 1));
            std::vector<double> f;
            for (const auto& x : batch) f.push_back(gaussian_sum(space, x, {0.05 + 0.05 * (i % 10)}));
            st.record(batch, f);
        }
        ga::GaConfig cfg;
        cfg.selection = i % 2 ? ga::Selection::roulette : ga::Selection::rank;
        cfg.pool = i % 3 ? ga::Pool::elite8 : ga::Pool::all_history;
        cfg.adaptive = i % 4 == 0;
        cfg.m_min = cfg.adaptive ? 0.2 : u(rng);
        cfg.m_max = cfg.adaptive ? 2.8 : cfg.m_min;
        std::set<Genotype> seen;
        for (const auto& e : st.history) seen.insert(e.genotype);
        for (const auto& k : ga::next_generation(st, cfg, space, rng))
            if (!seen.insert(k).second) return fmt::format("GA state {} repeated a genotype", i);

        // PSO after a random number of scored generations
        const auto first = random_distinct_genotypes(space, 8, rng);
        auto sw = pso::initialize(space, first);
        std::set<Genotype> pseen(first.begin(), first.end());
        const pso::PsoConfig pc{u(rng), u(rng), u(rng)};
        for (std::size_t g = 0; g < gens; ++g) {
            std::vector<double> f;
            for (const auto& p : sw.particles) f.push_back(gaussian_sum(space, p.genotype, {0.1}));
            pso::register_generation(sw, f, space, rng);
            const auto next = pso::next_generation(sw, pc, space, rng);
            for (const auto& k : next)
                if (pseen.contains(k)) return fmt::format("PSO state {} repeated a genotype", i);
            pseen.insert(next.begin(), next.end());
        }
    }
    return {};
}

std::string clamp_suite() {
    const auto space = build_default_space();
    const auto r = space.ranges();
    Rng rng(kBaseSeed);
    std::uniform_real_distribution<double> u(0, 3), big(-1e3, 1e3);
    for (int i = 0; i < 100000; ++i) {
        pso::Particle p;
        p.genotype = random_genotype(space, rng);
        p.position = space.values_of(p.genotype);
        p.pbest_position = space.values_of(random_genotype(space, rng));
        for (std::size_t d = 0; d < space.size(); ++d) p.velocity.push_back(big(rng));
        const auto v = pso::velocity_update(p, space.values_of(random_genotype(space, rng)), {u(rng), u(rng), u(rng)}, space, rng);
        for (std::size_t d = 0; d < v.size(); ++d)
            if (std::abs(v[d]) > r[d]) return fmt::format("update {} dimension {}: |{}| > {}", i, d, v[d], r[d]);
    }
    return {};
}

std::string retraction_suite() {
    const auto space = build_default_space();
    Rng rng(kBaseSeed);
    for (int i = 0; i < 10000; ++i) {
        const auto g = random_genotype(space, rng);
        if (quantize(space, space.values_of(g)) != g) return fmt::format("genotype {}", describe(space, g));
    }
    return {};
}

std::string argmax_suite() {
    const auto full = build_default_space();
    Rng rng(kBaseSeed);
    std::uniform_real_distribution<double> sig(0.03, 0.6);
    for (int t = 0; t < 100; ++t) {
        std::vector<DimensionSpec> dims;
        std::uint64_t points = 1;
        for (const auto& d : full.dimensions()) {
            std::size_t k = std::uniform_int_distribution<std::size_t>(2, d.size())(rng);
            while (points * k > 10000 && k > 2) --k;
            if (points * k > 10000) break;
            auto vals = d.values;
            std::shuffle(vals.begin(), vals.end(), rng);
            vals.resize(k);
            std::sort(vals.begin(), vals.end());
            dims.push_back({d.name, d.unit, vals, d.period});
            points *= k;
        }
        const ParameterSpace sub(dims);
        const SurrogateParams params{sig(rng)};
        double brute = -1;
        Genotype g{std::vector<std::uint32_t>(sub.size(), 0)};
        for (std::uint64_t n = 0; n < points; ++n) {
            std::uint64_t rest = n;
            for (std::size_t d = sub.size(); d-- > 0;) {
                g[d] = static_cast<std::uint32_t>(rest % sub[d].size());
                rest /= sub[d].size();
            }
            brute = std::max(brute, gaussian_sum(sub, g, params));
        }
        const auto [og, of] = argmax_oracle(sub, params);
        if (std::abs(of - brute) > 1e-9 || std::abs(gaussian_sum(sub, og, params) - brute) > 1e-9)
            return fmt::format("sub-space {}: oracle {} vs brute force {}", t, of, brute);
    }
    return {};
}

std::string replay_suite() {
    const Clock clock = [] { return std::string("2026-01-01T00:00:00.000Z"); };
    Rng rng(kBaseSeed);
    std::uniform_real_distribution<double> speed(0, 10);
    std::uniform_int_distribution<int> action(0, 9);
    std::uniform_int_distribution<std::size_t> robot(0, 7);
    for (int t = 0; t < 200; ++t) {
        CreateRequest req;
        req.name = "replay";
        req.seed = rng();
        req.max_generations = 1 + t % 5;
        req.config = t % 2 ? EngineConfig{pso::PsoConfig{}} : EngineConfig{ga::GaConfig{}};
        auto events = Session::plan_create("r", req, clock);
        auto live = Session::from_created(events[0]);
        live.apply(events[1]);
        for (int step = 0; step < 80 && live.status() == SessionStatus::collecting; ++step) {
            std::vector<JournalEvent> next;
            try {
                if (action(rng) < 7) {
                    MeasurementInput in;
                    in.speed = speed(rng);
                    next = live.plan_measurement(robot(rng), in, step % 5 == 0, clock);
                } else {
                    next = live.plan_advance(std::nullopt, clock);
                }
            } catch (const SessionError&) {
                continue;
            }
            for (const auto& e : next) {
                live.apply(e);
                events.push_back(e);
            }
        }
        // round-trip through the on-disk encoding as well
        std::string text;
        for (const auto& e : events) text += encode_event(e) + "\n";
        const auto r = recover(scan_journal(text).events);
        if (!r.session || r.error || !(*r.session == live)) return fmt::format("session {} did not replay", t);
    }
    return {};
}

std::string parallel_suite() {
    const auto dir = fs::temp_directory_path() / fmt::format("swimevo-acceptance-{}", ::getpid());
    fs::create_directories(dir);
    const std::string args =
        "sweep --algo pso --grid w=0:3:1 --grid c1=0:3:1 --grid c2=0:3:1 --sigma 0.05 --sigma 0.5 --reps 20 --seed 1";
    std::array<std::string, 2> out;
    std::array<int, 2> codes{};
    const std::array<int, 2> parallel = {1, 8};
    for (int i = 0; i < 2; ++i) {
        const auto file = dir / fmt::format("p{}.csv", parallel[i]);
        codes[i] = std::system(fmt::format("{} {} --parallel {} --out {} 2>/dev/null", SWIMEVO_CLI, args, parallel[i], file.string()).c_str());
        std::ifstream in(file, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        out[i] = ss.str();
    }
    fs::remove_all(dir);
    if (codes[0] != 0 || codes[1] != 0) return "sweep command failed";
    if (out[0].empty() || out[0] != out[1]) return "CSV differs";
    return {};
}

void invariant_suites() {
    const std::vector<Suite> suites = {
        {"rank probabilities sum to 1, n = 1..64", rank_sum_suite},
        {"crossover conserves genes, 10000 pairs", crossover_suite},
        {"GA/PSO never re-propose evaluated genotypes, 1000 states", no_duplicate_suite},
        {"PSO velocity clamp |v_d| <= R_d, 100000 updates", clamp_suite},
        {"quantize(values(g)) = g, 10000 genotypes", retraction_suite},
        {"surrogate argmax equals brute force, 100 sub-spaces", argmax_suite},
        {"journal replay equals live state, 200 sessions", replay_suite},
        {"sweep CSV identical for --parallel 1 and 8", parallel_suite},
    };
    std::vector<std::string> failed;
    for (const auto& s : suites) {
        const auto err = s.run();
        std::cout << "      " << (err.empty() ? "ok   " : "FAIL ") << s.name << (err.empty() ? "" : ": " + err) << "\n";
        if (!err.empty()) failed.push_back(s.name);
    }
    report("invariants", failed.empty(), "invariant suites",
           failed.empty() ? fmt::format("{} suites green", suites.size()) : fmt::format("failed: {}", fmt::join(failed, ", ")));
}

void spot_checks() {
    const double p0 = ga::rank_probabilities(8)[0];
    std::vector<std::string> bad;
    if (std::abs(p0 - kRankP0) > kRankP0Tolerance) bad.push_back(fmt::format("rank P(0) = {}", p0));
    for (double sigma : {0.05, 0.1, 0.25, 0.5}) {
        const std::vector<double> peak(8, 0.75);
        const double v = gaussian_sum_normalized(peak, {sigma});
        const double expected = 8 / (sigma * std::sqrt(2 * std::numbers::pi));
        if (std::abs(v - expected) > kPeakTolerance) bad.push_back(fmt::format("all-peak at sigma {} = {}", sigma, v));
    }
    const auto n = cardinality(build_default_space());
    if (n != 345600) bad.push_back(fmt::format("cardinality {}", n));
    report("spot_checks", bad.empty(), "numeric spot checks",
           bad.empty() ? fmt::format("rank P(0) = {:.7f}, all-peak(0.5) = {:.9f}, cardinality = {}", p0,
                                     gaussian_sum_normalized(std::vector<double>(8, 0.75), {0.5}), n)
                       : fmt::format("{}", fmt::join(bad, "; ")));
}

}  // namespace

int main(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--known-fail" && i + 1 < argc) {
            known.insert(argv[++i]);
        } else {
            std::cerr << "usage: acceptance [--known-fail TAG]...\n";
            return 2;
        }
    }
    std::cout << "acceptance (base seed " << kBaseSeed << ", z > " << kMinZ << ")\n";
    selection_pool_trend();
    selection_method_trend();
    inertia_trend();
    social_trend();
    optimization_lift();
    invariant_suites();
    spot_checks();
    if (failures == 0 && known_failures == 0)
        std::cout << "all criteria passed\n";
    else
        std::cout << fmt::format("{} criteria failed, {} known\n", failures + known_failures, known_failures);
    return failures == 0 ? 0 : 1;
}
