#include "swimevo/journal.hpp"

#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>

#include <fcntl.h>
#include <unistd.h>

#include <fmt/format.h>

namespace swimevo {

namespace {

constexpr std::pair<EventKind, std::string_view> kKindNames[] = {
    {EventKind::session_created, "session_created"},
    {EventKind::generation_proposed, "generation_proposed"},
    {EventKind::measurement_recorded, "measurement_recorded"},
    {EventKind::generation_completed, "generation_completed"},
    {EventKind::session_completed, "session_completed"},
};

}  // namespace

std::string to_string(EventKind kind) {
    for (const auto& [k, name] : kKindNames)
        if (k == kind) return std::string(name);
    return "unknown";
}

EventKind parse_event_kind(std::string_view s) {
    for (const auto& [k, name] : kKindNames)
        if (name == s) return k;
    throw JournalError(fmt::format("unknown event kind '{}'", s));
}

bool is_boundary(EventKind kind) { return kind != EventKind::measurement_recorded; }

std::string encode_event(const JournalEvent& event) {
    nlohmann::ordered_json doc;
    doc["seq"] = event.seq;
    doc["kind"] = to_string(event.kind);
    doc["at"] = event.at;
    doc["payload"] = event.payload;
    return doc.dump();
}

JournalEvent decode_event(std::string_view line) {
    try {
        const auto doc = nlohmann::json::parse(line);
        JournalEvent event;
        event.seq = doc.at("seq").get<std::uint64_t>();
        event.kind = parse_event_kind(doc.at("kind").get<std::string>());
        event.at = doc.at("at").get<std::string>();
        event.payload = doc.at("payload");
        if (!event.payload.is_object()) throw JournalError("payload is not an object");
        return event;
    } catch (const nlohmann::json::exception& e) {
        throw JournalError(fmt::format("malformed event: {}", e.what()));
    }
}

JournalScan scan_journal(std::string_view content) {
    JournalScan scan;
    std::size_t pos = 0;
    while (pos < content.size()) {
        const auto nl = content.find('\n', pos);
        if (nl == std::string_view::npos) {
            scan.error = fmt::format("torn event after seq {}", scan.last_valid_seq);
            break;
        }
        const auto line = content.substr(pos, nl - pos);
        try {
            auto event = decode_event(line);
            if (event.seq != scan.last_valid_seq + 1)
                throw JournalError(fmt::format("sequence gap: expected {}, found {}", scan.last_valid_seq + 1, event.seq));
            scan.last_valid_seq = event.seq;
            scan.events.push_back(std::move(event));
        } catch (const JournalError& e) {
            scan.error = fmt::format("after seq {}: {}", scan.last_valid_seq, e.what());
            break;
        }
        pos = nl + 1;
        scan.valid_bytes = pos;
        scan.end_offsets.push_back(pos);
    }
    return scan;
}

JournalScan read_journal_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw JournalError(fmt::format("cannot open journal '{}'", path));
    std::stringstream buf;
    buf << in.rdbuf();
    return scan_journal(buf.str());
}

JournalWriter::JournalWriter(std::string path, std::size_t valid_bytes) : path_(std::move(path)) {
    fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd_ < 0) throw JournalError(fmt::format("cannot open journal '{}': {}", path_, std::strerror(errno)));
    const off_t size = ::lseek(fd_, 0, SEEK_END);
    if (size > static_cast<off_t>(valid_bytes) && ::ftruncate(fd_, static_cast<off_t>(valid_bytes)) != 0) {
        ::close(fd_);
        throw JournalError(fmt::format("cannot trim torn tail of '{}': {}", path_, std::strerror(errno)));
    }
}

JournalWriter::~JournalWriter() {
    if (fd_ >= 0) {
        ::fsync(fd_);
        ::close(fd_);
    }
}

void JournalWriter::append(const JournalEvent& event) {
    const auto line = encode_event(event) + "\n";
    std::size_t written = 0;
    while (written < line.size()) {
        const auto n = ::write(fd_, line.data() + written, line.size() - written);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw JournalError(fmt::format("write to '{}' failed: {}", path_, std::strerror(errno)));
        }
        written += static_cast<std::size_t>(n);
    }
    if (is_boundary(event.kind)) sync();
}

void JournalWriter::sync() {
    if (::fsync(fd_) != 0) throw JournalError(fmt::format("fsync of '{}' failed: {}", path_, std::strerror(errno)));
}

std::string utc_now() {
    using namespace std::chrono;
    const auto now = system_clock::now();
    const auto ms = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
    const std::time_t t = system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}.{:03}Z", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                       tm.tm_hour, tm.tm_min, tm.tm_sec, ms);
}

}  // namespace swimevo
