#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace swimevo {

enum class EventKind {
    session_created,
    generation_proposed,
    measurement_recorded,
    generation_completed,
    session_completed,
};

std::string to_string(EventKind kind);
EventKind parse_event_kind(std::string_view s);

struct JournalEvent {
    std::uint64_t seq = 0;
    EventKind kind = EventKind::session_created;
    std::string at;  // UTC, RFC 3339
    nlohmann::json payload = nlohmann::json::object();

    bool operator==(const JournalEvent&) const = default;
};

class JournalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One event as a single JSON line (no trailing newline).
std::string encode_event(const JournalEvent& event);

/// Throws JournalError on malformed lines.
JournalEvent decode_event(std::string_view line);

/// Generation boundaries are the events after which the journal is synced.
bool is_boundary(EventKind kind);

/// Result of scanning a journal. Scanning stops at the first line that fails
/// to decode, is not newline-terminated, or breaks the gapless sequence.
struct JournalScan {
    std::vector<JournalEvent> events;
    std::uint64_t last_valid_seq = 0;
    std::vector<std::size_t> end_offsets;  // byte offset just past each event's line
    std::size_t valid_bytes = 0;           // length of the well-formed prefix
    std::optional<std::string> error;
};

JournalScan scan_journal(std::string_view content);
JournalScan read_journal_file(const std::string& path);

/// Append-only writer for one journal file. Boundary events are fsync'ed.
class JournalWriter {
public:
    /// Opens (creating if needed) and truncates any bytes past `valid_bytes`
    /// so a torn tail never precedes new events.
    JournalWriter(std::string path, std::size_t valid_bytes);
    ~JournalWriter();

    JournalWriter(const JournalWriter&) = delete;
    JournalWriter& operator=(const JournalWriter&) = delete;

    void append(const JournalEvent& event);
    void sync();
    const std::string& path() const { return path_; }

private:
    std::string path_;
    int fd_ = -1;
};

using Clock = std::function<std::string()>;

/// Current UTC time as RFC 3339 with millisecond precision.
std::string utc_now();

}  // namespace swimevo
