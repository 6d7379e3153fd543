#include "swimevo/session_store.hpp"

#include <algorithm>
#include <filesystem>
#include <random>

#include <fmt/format.h>

namespace swimevo {

namespace fs = std::filesystem;

SessionStore::SessionStore(std::string journal_dir, Clock clock) : dir_(std::move(journal_dir)), clock_(std::move(clock)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw JournalError(fmt::format("cannot create journal directory '{}': {}", dir_, ec.message()));
}

SessionStore::~SessionStore() {
    try {
        flush();
    } catch (...) {
    }
}

std::vector<std::string> SessionStore::recover_all() {
    std::vector<std::string> warnings;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir_))
        if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    for (const auto& path : files) {
        const auto scan = read_journal_file(path.string());
        auto result = recover(scan.events);
        if (scan.error) warnings.push_back(fmt::format("{}: {}", path.filename().string(), *scan.error));
        if (result.error && result.session)
            warnings.push_back(fmt::format("{}: {}", path.filename().string(), *result.error));
        if (!result.session) {
            warnings.push_back(fmt::format("{}: not recoverable ({}), skipped", path.filename().string(),
                                           result.error.value_or("no events")));
            continue;
        }

        // Keep only the bytes of events that were actually applied.
        const std::size_t keep = result.last_valid_seq > 0 ? scan.end_offsets[result.last_valid_seq - 1] : 0;

        auto session = std::move(*result.session);
        auto writer = std::make_unique<JournalWriter>(path.string(), keep);
        auto entry = std::make_shared<Entry>(std::move(session), std::move(writer));
        if (entry->session.id() != path.stem().string())
            warnings.push_back(fmt::format("{}: session id '{}' differs from file name", path.filename().string(),
                                           entry->session.id()));
        commit(*entry, entry->session.plan_resume(clock_));

        std::lock_guard lock(map_mutex_);
        sessions_[entry->session.id()] = std::move(entry);
    }
    return warnings;
}

std::string SessionStore::new_id() {
    static thread_local std::mt19937_64 gen{std::random_device{}()};
    while (true) {
        auto id = fmt::format("{:012x}", gen() & 0xffffffffffffULL);
        if (!sessions_.contains(id) && !fs::exists(fs::path(dir_) / (id + ".jsonl"))) return id;
    }
}

void SessionStore::commit(Entry& entry, const std::vector<JournalEvent>& events) {
    // Validate the whole batch first, then let the in-memory state follow the
    // journal one written event at a time.
    Session next = entry.session;
    for (const auto& e : events) next.apply(e);
    for (const auto& e : events) {
        entry.writer->append(e);
        entry.session.apply(e);
    }
}

nlohmann::json SessionStore::create(const CreateRequest& request) {
    std::lock_guard lock(map_mutex_);
    const auto id = new_id();
    auto events = Session::plan_create(id, request, clock_);
    auto session = Session::from_created(events.front());
    auto writer = std::make_unique<JournalWriter>((fs::path(dir_) / (id + ".jsonl")).string(), 0);
    auto entry = std::make_shared<Entry>(std::move(session), std::move(writer));
    entry->writer->append(events.front());
    commit(*entry, {events.begin() + 1, events.end()});
    auto doc = entry->session.to_json();
    sessions_[id] = std::move(entry);
    return doc;
}

std::vector<nlohmann::json> SessionStore::list() const {
    std::vector<std::shared_ptr<Entry>> entries;
    {
        std::lock_guard lock(map_mutex_);
        for (const auto& [id, e] : sessions_) entries.push_back(e);
    }
    std::vector<nlohmann::json> out;
    for (const auto& e : entries) {
        std::shared_lock lock(e->mutex);
        out.push_back(e->session.summary_json());
    }
    return out;
}

std::shared_ptr<SessionStore::Entry> SessionStore::find(const std::string& id) const {
    std::lock_guard lock(map_mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw SessionError("not_found", fmt::format("no session '{}'", id));
    return it->second;
}

Session SessionStore::snapshot(const std::string& id) const {
    auto e = find(id);
    std::shared_lock lock(e->mutex);
    return e->session;
}

Session SessionStore::record_measurement(const std::string& id, std::size_t robot_index,
                                         const MeasurementInput& input, bool overwrite) {
    auto e = find(id);
    std::unique_lock lock(e->mutex);
    commit(*e, e->session.plan_measurement(robot_index, input, overwrite, clock_));
    return e->session;
}

Session SessionStore::advance(const std::string& id, std::optional<std::uint32_t> expected_generation) {
    auto e = find(id);
    std::unique_lock lock(e->mutex);
    commit(*e, e->session.plan_advance(expected_generation, clock_));
    return e->session;
}

void SessionStore::flush() {
    std::lock_guard lock(map_mutex_);
    for (auto& [id, e] : sessions_) {
        std::unique_lock entry_lock(e->mutex);
        e->writer->sync();
    }
}

}  // namespace swimevo
