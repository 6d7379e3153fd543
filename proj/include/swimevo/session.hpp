#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "swimevo/journal.hpp"
#include "swimevo/optimizer.hpp"

namespace swimevo {

/// Failure of a session command. `code` is machine-readable and maps to an
/// HTTP status in the API layer.
class SessionError : public std::runtime_error {
public:
    SessionError(std::string code, const std::string& message, nlohmann::json details = nullptr)
        : std::runtime_error(message), code_(std::move(code)), details_(std::move(details)) {}

    const std::string& code() const { return code_; }
    const nlohmann::json& details() const { return details_; }

private:
    std::string code_;
    nlohmann::json details_;
};

enum class SessionStatus { collecting, complete };
std::string to_string(SessionStatus s);

/// Speed from two scan-direction slope series: max(|mean(a)|, |mean(b)|).
/// Throws SessionError("invalid_measurement") when either list is empty.
double compute_speed(const std::vector<double>& slopes_a, const std::vector<double>& slopes_b);

struct MeasurementInput {
    std::vector<double> slopes_a;
    std::vector<double> slopes_b;
    std::optional<double> speed;  // direct entry, only with empty slope lists

    static MeasurementInput from_json(const nlohmann::json& doc);
};

struct MeasurementRecord {
    std::size_t robot_index = 0;
    std::vector<double> slopes_a;
    std::vector<double> slopes_b;
    double speed = 0;
    std::string entered_at;

    bool operator==(const MeasurementRecord&) const = default;
};

struct GenerationRecord {
    std::vector<Genotype> genotypes;
    std::vector<std::optional<MeasurementRecord>> measurements;
    bool completed = false;

    std::size_t measured_count() const;
    std::vector<std::size_t> missing() const;

    bool operator==(const GenerationRecord&) const = default;
};

struct CreateRequest {
    std::string name;
    EngineConfig config = ga::GaConfig{};
    std::uint64_t seed = 0;
    std::uint32_t max_generations = 5;
    ParameterSpace space = build_default_space();

    /// Parses the POST body {name, algorithm, config, seed, max_generations}.
    /// Throws SessionError("invalid_config") with one entry per bad field.
    static CreateRequest from_json(const nlohmann::json& doc);
};

/// The lab loop as an event-sourced state machine. Command methods are const:
/// they validate and return the events that would carry the command out.
/// apply() is the only mutator, used for live commands (after the events are
/// journaled) and for replay alike.
class Session {
public:
    static std::vector<JournalEvent> plan_create(const std::string& id, const CreateRequest& request,
                                                 const Clock& clock);

    /// Builds a session from the first event of a journal.
    static Session from_created(const JournalEvent& event);

    std::vector<JournalEvent> plan_measurement(std::size_t robot_index, const MeasurementInput& input,
                                               bool overwrite, const Clock& clock) const;

    /// `expected_generation`, when given, must equal the current generation;
    /// a stale value is rejected as a state conflict.
    std::vector<JournalEvent> plan_advance(std::optional<std::uint32_t> expected_generation,
                                           const Clock& clock) const;

    /// Events that finish a command interrupted between its journal writes
    /// (a missing proposal or completion); empty when nothing is pending.
    std::vector<JournalEvent> plan_resume(const Clock& clock) const;

    /// Applies one event; throws JournalError when it does not fit the state.
    void apply(const JournalEvent& event);

    const std::string& id() const { return id_; }
    const std::string& name() const { return name_; }
    SessionStatus status() const { return status_; }
    const EngineConfig& config() const { return optimizer_->config(); }
    Algorithm algorithm() const { return optimizer_->algorithm(); }
    const ParameterSpace& space() const { return optimizer_->space(); }
    std::uint64_t seed() const { return seed_; }
    std::uint32_t max_generations() const { return max_generations_; }
    std::uint32_t current_generation() const {
        return generations_.empty() ? 0 : static_cast<std::uint32_t>(generations_.size() - 1);
    }
    std::size_t population() const { return optimizer_->population(); }
    const std::vector<GenerationRecord>& generations() const { return generations_; }
    const GenerationRecord& current() const { return generations_.back(); }
    const Optimizer& optimizer() const { return *optimizer_; }
    std::uint64_t last_seq() const { return last_seq_; }
    bool completable() const;
    bool pending_proposal() const { return pending_proposal_; }

    nlohmann::json to_json() const;
    nlohmann::json summary_json() const;

    /// One row per proposed robot per generation. Only "csv" is supported.
    std::string export_document(const std::string& format) const;

    bool operator==(const Session&) const = default;

private:
    Session() = default;

    JournalEvent make_event(std::uint64_t seq, EventKind kind, nlohmann::json payload, const Clock& clock) const;

    std::string id_;
    std::string name_;
    std::string created_at_;
    std::uint64_t seed_ = 0;
    std::uint32_t max_generations_ = 5;
    SessionStatus status_ = SessionStatus::collecting;
    std::optional<Optimizer> optimizer_;
    std::vector<GenerationRecord> generations_;
    bool pending_proposal_ = false;
    std::uint64_t last_seq_ = 0;
};

struct RecoveryResult {
    std::optional<Session> session;
    std::uint64_t last_valid_seq = 0;
    std::optional<std::string> error;
};

/// Replays events in order. Stops at the first event that breaks the sequence
/// or does not fit the state, keeping everything applied before it.
RecoveryResult recover(const std::vector<JournalEvent>& events);

}  // namespace swimevo
