#include "swimevo/session.hpp"

#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "swimevo/space_io.hpp"

namespace swimevo {

std::string to_string(SessionStatus s) { return s == SessionStatus::collecting ? "collecting" : "complete"; }

double compute_speed(const std::vector<double>& slopes_a, const std::vector<double>& slopes_b) {
    if (slopes_a.empty() || slopes_b.empty())
        throw SessionError("invalid_measurement", "both scan directions need at least one slope");
    auto mean_abs = [](const std::vector<double>& v) {
        return std::abs(std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()));
    };
    return std::max(mean_abs(slopes_a), mean_abs(slopes_b));
}

MeasurementInput MeasurementInput::from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw SessionError("invalid_measurement", "measurement body must be a JSON object");
    MeasurementInput in;
    std::vector<std::string> problems;
    auto read_slopes = [&](const char* key, std::vector<double>& out) {
        if (!doc.contains(key) || doc[key].is_null()) return;
        if (!doc[key].is_array()) {
            problems.push_back(fmt::format("{}: expected a list of numbers", key));
            return;
        }
        for (const auto& v : doc[key]) {
            if (!v.is_number() || !std::isfinite(v.get<double>())) {
                problems.push_back(fmt::format("{}: every slope must be a finite number", key));
                return;
            }
            out.push_back(v.get<double>());
        }
    };
    read_slopes("slopes_a", in.slopes_a);
    read_slopes("slopes_b", in.slopes_b);
    if (doc.contains("speed") && !doc["speed"].is_null()) {
        if (!doc["speed"].is_number()) problems.push_back("speed: expected a number");
        else in.speed = doc["speed"].get<double>();
    }
    if (!problems.empty())
        throw SessionError("invalid_measurement", fmt::format("{}", fmt::join(problems, "; ")),
                           {{"fields", problems}});
    return in;
}

std::size_t GenerationRecord::measured_count() const {
    std::size_t n = 0;
    for (const auto& m : measurements) n += m.has_value();
    return n;
}

std::vector<std::size_t> GenerationRecord::missing() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < measurements.size(); ++i)
        if (!measurements[i]) out.push_back(i);
    return out;
}

CreateRequest CreateRequest::from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw SessionError("invalid_config", "request body must be a JSON object");
    CreateRequest req;
    std::vector<std::string> problems;

    if (!doc.contains("name") || !doc["name"].is_string() || doc["name"].get<std::string>().empty())
        problems.push_back("name: required non-empty string");
    else
        req.name = doc["name"].get<std::string>();

    std::optional<Algorithm> algorithm;
    try {
        algorithm = parse_algorithm(doc.value("algorithm", std::string{}));
    } catch (const ConfigError&) {
        problems.push_back("algorithm: must be \"ga\" or \"pso\"");
    }

    if (doc.contains("seed")) {
        const auto& seed = doc["seed"];
        if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0))
            problems.push_back("seed: expected a non-negative integer");
        else req.seed = doc["seed"].get<std::uint64_t>();
    }
    if (doc.contains("max_generations")) {
        const auto& mg = doc["max_generations"];
        if (!mg.is_number_integer() || mg.get<long long>() < 1 || mg.get<long long>() > 1000)
            problems.push_back("max_generations: expected an integer in [1, 1000]");
        else req.max_generations = mg.get<std::uint32_t>();
    }
    if (algorithm) {
        try {
            req.config = config_from_json(*algorithm, doc.value("config", nlohmann::json::object()));
        } catch (const ConfigError& e) {
            for (const auto& p : e.problems()) problems.push_back("config." + p);
        }
    }
    if (doc.contains("space") && !doc["space"].is_null()) {
        try {
            req.space = space_from_json(doc["space"]);
        } catch (const std::invalid_argument& e) {
            problems.push_back(fmt::format("space: {}", e.what()));
        }
    }
    if (!problems.empty())
        throw SessionError("invalid_config", fmt::format("{}", fmt::join(problems, "; ")), {{"fields", problems}});
    return req;
}

JournalEvent Session::make_event(std::uint64_t seq, EventKind kind, nlohmann::json payload, const Clock& clock) const {
    return JournalEvent{seq, kind, clock(), std::move(payload)};
}

namespace {

nlohmann::json genotypes_json(const std::vector<Genotype>& gs) {
    auto out = nlohmann::json::array();
    for (const auto& g : gs) out.push_back(genotype_to_json(g));
    return out;
}

std::vector<Genotype> genotypes_from(const nlohmann::json& doc) {
    std::vector<Genotype> out;
    for (const auto& g : doc) out.push_back(genotype_from_json(g));
    return out;
}

void expect(bool ok, const std::string& message) {
    if (!ok) throw JournalError(message);
}

}  // namespace

std::vector<JournalEvent> Session::plan_create(const std::string& id, const CreateRequest& request,
                                               const Clock& clock) {
    std::vector<std::string> problems;
    if (request.name.empty()) problems.push_back("name: required non-empty string");
    if (request.max_generations < 1) problems.push_back("max_generations: must be at least 1");
    for (const auto& p : config_problems(request.config)) problems.push_back("config." + p);
    if (population_of(request.config) > cardinality(request.space))
        problems.push_back("config: population exceeds the size of the parameter space");
    if (!problems.empty())
        throw SessionError("invalid_config", fmt::format("{}", fmt::join(problems, "; ")), {{"fields", problems}});

    const Optimizer opt(request.space, request.config, request.seed);
    const auto at = clock();
    JournalEvent created{1,
                         EventKind::session_created,
                         at,
                         {{"id", id},
                          {"name", request.name},
                          {"algorithm", to_string(algorithm_of(request.config))},
                          {"config", config_to_json(request.config)},
                          {"seed", request.seed},
                          {"max_generations", request.max_generations},
                          {"space", space_to_json(request.space)}}};
    JournalEvent proposed{2, EventKind::generation_proposed, at,
                          {{"generation", 0}, {"genotypes", genotypes_json(opt.proposal())}}};
    return {std::move(created), std::move(proposed)};
}

Session Session::from_created(const JournalEvent& event) {
    expect(event.kind == EventKind::session_created, "journal must begin with session_created");
    expect(event.seq == 1, "session_created must have seq 1");
    Session s;
    try {
        const auto& p = event.payload;
        s.id_ = p.at("id").get<std::string>();
        s.name_ = p.at("name").get<std::string>();
        s.seed_ = p.at("seed").get<std::uint64_t>();
        s.max_generations_ = p.at("max_generations").get<std::uint32_t>();
        const auto algorithm = parse_algorithm(p.at("algorithm").get<std::string>());
        auto config = config_from_json(algorithm, p.at("config"));
        auto space = space_from_json(p.at("space"));
        s.optimizer_.emplace(std::move(space), std::move(config), s.seed_);
    } catch (const nlohmann::json::exception& e) {
        throw JournalError(fmt::format("session_created: {}", e.what()));
    } catch (const std::invalid_argument& e) {
        throw JournalError(fmt::format("session_created: {}", e.what()));
    }
    s.created_at_ = event.at;
    s.last_seq_ = event.seq;
    s.pending_proposal_ = true;  // generation 0 follows
    return s;
}

bool Session::completable() const {
    return status_ == SessionStatus::collecting && !pending_proposal_ && !generations_.empty() &&
           !current().completed && current().measured_count() == current().measurements.size();
}

std::vector<JournalEvent> Session::plan_measurement(std::size_t robot_index, const MeasurementInput& input,
                                                    bool overwrite, const Clock& clock) const {
    if (status_ == SessionStatus::complete)
        throw SessionError("state_conflict", "session is complete; no further measurements are accepted");
    if (pending_proposal_ || current().completed)
        throw SessionError("state_conflict", "the current generation is already completed");
    if (robot_index >= population())
        throw SessionError("out_of_range",
                           fmt::format("robot index {} out of range [0, {})", robot_index, population()));
    if (current().measurements[robot_index] && !overwrite)
        throw SessionError("duplicate_measurement",
                           fmt::format("robot {} already has a measurement; pass overwrite=true to replace it",
                                       robot_index));

    const bool has_slopes = !input.slopes_a.empty() || !input.slopes_b.empty();
    double speed = 0;
    if (has_slopes) {
        if (input.speed)
            throw SessionError("invalid_measurement", "give either slope lists or a direct speed, not both");
        speed = compute_speed(input.slopes_a, input.slopes_b);
    } else {
        if (!input.speed) throw SessionError("invalid_measurement", "a measurement needs slope lists or a speed");
        if (!std::isfinite(*input.speed) || *input.speed < 0)
            throw SessionError("invalid_measurement", "speed must be a finite number >= 0",
                               {{"fields", {"speed: must be a finite number >= 0"}}});
        speed = *input.speed;
    }
    return {make_event(last_seq_ + 1, EventKind::measurement_recorded,
                       {{"generation", current_generation()},
                        {"robot_index", robot_index},
                        {"slopes_a", input.slopes_a},
                        {"slopes_b", input.slopes_b},
                        {"speed", speed},
                        {"overwrite", overwrite}},
                       clock)};
}

std::vector<JournalEvent> Session::plan_advance(std::optional<std::uint32_t> expected_generation,
                                                const Clock& clock) const {
    if (status_ == SessionStatus::complete) throw SessionError("state_conflict", "session is already complete");
    if (expected_generation && *expected_generation != current_generation())
        throw SessionError("state_conflict",
                           fmt::format("generation {} is no longer current (current is {})", *expected_generation,
                                       current_generation()),
                           {{"current_generation", current_generation()}});
    if (pending_proposal_) throw SessionError("state_conflict", "an advance is already in progress");
    if (const auto missing = current().missing(); !missing.empty())
        throw SessionError("incomplete_generation",
                           fmt::format("generation {} is missing measurements for robots {}", current_generation(),
                                       fmt::join(missing, ", ")),
                           {{"missing", missing}});

    std::vector<double> speeds;
    for (const auto& m : current().measurements) speeds.push_back(m->speed);

    std::vector<JournalEvent> events;
    events.push_back(make_event(last_seq_ + 1, EventKind::generation_completed,
                                {{"generation", current_generation()}, {"speeds", speeds}}, clock));
    Session next = *this;
    next.apply(events.back());
    for (auto& e : next.plan_resume(clock)) events.push_back(std::move(e));
    return events;
}

std::vector<JournalEvent> Session::plan_resume(const Clock& clock) const {
    if (!pending_proposal_ || status_ == SessionStatus::complete) return {};
    if (generations_.empty())
        return {make_event(last_seq_ + 1, EventKind::generation_proposed,
                           {{"generation", 0}, {"genotypes", genotypes_json(optimizer_->proposal())}}, clock)};
    if (generations_.size() >= max_generations_)
        return {make_event(last_seq_ + 1, EventKind::session_completed,
                           {{"generations", generations_.size()}}, clock)};
    Optimizer opt = *optimizer_;
    opt.propose();
    return {make_event(last_seq_ + 1, EventKind::generation_proposed,
                       {{"generation", generations_.size()}, {"genotypes", genotypes_json(opt.proposal())}}, clock)};
}

void Session::apply(const JournalEvent& event) {
    expect(event.seq == last_seq_ + 1,
           fmt::format("sequence gap: expected {}, found {}", last_seq_ + 1, event.seq));
    const auto& p = event.payload;
    try {
        switch (event.kind) {
        case EventKind::session_created:
            throw JournalError("duplicate session_created");

        case EventKind::generation_proposed: {
            expect(status_ == SessionStatus::collecting && pending_proposal_, "unexpected generation_proposed");
            const auto generation = p.at("generation").get<std::size_t>();
            expect(generation == generations_.size(), "generation_proposed out of order");
            expect(generation < max_generations_, "generation_proposed beyond max_generations");
            Optimizer opt = *optimizer_;
            if (generation > 0) opt.propose();
            expect(genotypes_from(p.at("genotypes")) == opt.proposal(),
                   fmt::format("generation {} does not match the engine's proposal", generation));
            optimizer_ = std::move(opt);
            GenerationRecord rec;
            rec.genotypes = optimizer_->proposal();
            rec.measurements.resize(rec.genotypes.size());
            generations_.push_back(std::move(rec));
            pending_proposal_ = false;
            break;
        }

        case EventKind::measurement_recorded: {
            expect(status_ == SessionStatus::collecting && !pending_proposal_ && !current().completed,
                   "measurement_recorded outside a collecting generation");
            expect(p.at("generation").get<std::size_t>() == current_generation(), "measurement for another generation");
            const auto robot = p.at("robot_index").get<std::size_t>();
            expect(robot < population(), "measurement robot index out of range");
            auto& slot = generations_.back().measurements[robot];
            expect(!slot || p.value("overwrite", false), "second measurement without overwrite");
            MeasurementRecord rec;
            rec.robot_index = robot;
            rec.slopes_a = p.at("slopes_a").get<std::vector<double>>();
            rec.slopes_b = p.at("slopes_b").get<std::vector<double>>();
            rec.speed = p.at("speed").get<double>();
            rec.entered_at = event.at;
            expect(std::isfinite(rec.speed) && rec.speed >= 0, "measurement speed must be >= 0");
            if (!rec.slopes_a.empty() || !rec.slopes_b.empty())
                expect(compute_speed(rec.slopes_a, rec.slopes_b) == rec.speed, "measurement speed disagrees with slopes");
            slot = std::move(rec);
            break;
        }

        case EventKind::generation_completed: {
            expect(status_ == SessionStatus::collecting && !pending_proposal_ && !current().completed,
                   "unexpected generation_completed");
            expect(p.at("generation").get<std::size_t>() == current_generation(), "generation_completed out of order");
            expect(current().missing().empty(), "generation_completed with missing measurements");
            std::vector<double> speeds;
            for (const auto& m : current().measurements) speeds.push_back(m->speed);
            expect(p.at("speeds").get<std::vector<double>>() == speeds, "generation_completed speeds disagree");
            optimizer_->tell(speeds);
            generations_.back().completed = true;
            pending_proposal_ = true;
            break;
        }

        case EventKind::session_completed:
            expect(status_ == SessionStatus::collecting && pending_proposal_ &&
                       generations_.size() >= max_generations_,
                   "unexpected session_completed");
            status_ = SessionStatus::complete;
            pending_proposal_ = false;
            break;
        }
    } catch (const nlohmann::json::exception& e) {
        throw JournalError(fmt::format("{} (seq {}): {}", to_string(event.kind), event.seq, e.what()));
    } catch (const SessionError& e) {
        throw JournalError(fmt::format("{} (seq {}): {}", to_string(event.kind), event.seq, e.what()));
    }
    last_seq_ = event.seq;
}

nlohmann::json Session::to_json() const {
    const auto& sp = space();
    nlohmann::json robots = nlohmann::json::array();
    static const GenerationRecord none;
    const auto& gen = generations_.empty() ? none : current();
    for (std::size_t i = 0; i < gen.genotypes.size(); ++i) {
        const auto& g = gen.genotypes[i];
        auto params = nlohmann::json::array();
        for (std::size_t d = 0; d < sp.size(); ++d) {
            const auto& dim = sp[d];
            const bool actuation =
                dim.name == "laser_power" || dim.name == "scan_frequency" || dim.name == "polarization_angle";
            params.push_back({{"name", dim.name},
                              {"unit", dim.unit},
                              {"value", dim.values[g[d]]},
                              {"label", gene_label(sp, g, d)},
                              {"group", actuation ? "actuation" : "fabrication"}});
        }
        nlohmann::json robot = {{"robot_index", i},
                                {"genotype", genotype_to_json(g)},
                                {"parameters", params},
                                {"measured", gen.measurements[i].has_value()}};
        if (const auto& m = gen.measurements[i]) {
            robot["speed"] = m->speed;
            robot["slopes_a"] = m->slopes_a;
            robot["slopes_b"] = m->slopes_b;
            robot["entered_at"] = m->entered_at;
        } else {
            robot["speed"] = nullptr;
        }
        robots.push_back(std::move(robot));
    }

    auto history = nlohmann::json::array();
    for (std::size_t gi = 0; gi < generations_.size(); ++gi) {
        const auto& rec = generations_[gi];
        if (!rec.completed) continue;
        std::size_t best = 0;
        for (std::size_t i = 1; i < rec.measurements.size(); ++i)
            if (rec.measurements[i]->speed > rec.measurements[best]->speed) best = i;
        history.push_back(
            {{"generation", gi}, {"best_speed", rec.measurements[best]->speed}, {"best_robot_index", best}});
    }

    auto doc = summary_json();
    doc["seed"] = seed_;
    doc["config"] = config_to_json(config());
    doc["created_at"] = created_at_;
    doc["robots"] = std::move(robots);
    doc["missing"] = gen.missing();
    doc["completable"] = completable();
    doc["history"] = std::move(history);
    doc["engine_best"] = optimizer_->has_best() ? nlohmann::json(optimizer_->engine_best()) : nlohmann::json(nullptr);
    doc["last_seq"] = last_seq_;
    return doc;
}

nlohmann::json Session::summary_json() const {
    return {{"id", id_},
            {"name", name_},
            {"algorithm", to_string(algorithm())},
            {"status", to_string(status_)},
            {"current_generation", current_generation()},
            {"max_generations", max_generations_},
            {"population", population()},
            {"measured_count", generations_.empty() ? 0 : current().measured_count()}};
}

std::string Session::export_document(const std::string& format) const {
    if (format != "csv")
        throw SessionError("unknown_format", fmt::format("unknown export format '{}' (supported: csv)", format));
    const auto& sp = space();
    std::string out = "generation,robot_index";
    for (const auto& dim : sp.dimensions()) out += "," + dim.name;
    out += ",speed,is_generation_best\n";
    for (std::size_t gi = 0; gi < generations_.size(); ++gi) {
        const auto& rec = generations_[gi];
        std::optional<std::size_t> best;
        for (std::size_t i = 0; i < rec.measurements.size(); ++i)
            if (rec.measurements[i] && (!best || rec.measurements[i]->speed > rec.measurements[*best]->speed)) best = i;
        for (std::size_t i = 0; i < rec.genotypes.size(); ++i) {
            out += fmt::format("{},{}", gi, i);
            for (double v : sp.values_of(rec.genotypes[i])) out += "," + fmt::format("{:.9g}", v);
            out += ",";
            if (rec.measurements[i]) out += fmt::format("{:.9g}", rec.measurements[i]->speed);
            out += best == i ? ",true\n" : ",false\n";
        }
    }
    return out;
}

RecoveryResult recover(const std::vector<JournalEvent>& events) {
    RecoveryResult result;
    if (events.empty()) {
        result.error = "journal is empty";
        return result;
    }
    try {
        result.session = Session::from_created(events.front());
    } catch (const std::exception& e) {
        result.error = e.what();
        return result;
    }
    result.last_valid_seq = result.session->last_seq();
    for (std::size_t i = 1; i < events.size(); ++i) {
        try {
            Session next = *result.session;
            next.apply(events[i]);
            result.session = std::move(next);
            result.last_valid_seq = events[i].seq;
        } catch (const std::exception& e) {
            result.error = fmt::format("recovery halted after seq {}: {}", result.last_valid_seq, e.what());
            break;
        }
    }
    return result;
}

}  // namespace swimevo
