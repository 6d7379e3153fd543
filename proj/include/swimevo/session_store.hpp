#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <vector>

#include "swimevo/journal.hpp"
#include "swimevo/session.hpp"

namespace swimevo {

/// Owns every live session and its journal file (<dir>/<id>.jsonl). Writes to
/// one session are serialized; readers take a snapshot under a shared lock.
class SessionStore {
public:
    explicit SessionStore(std::string journal_dir, Clock clock = utc_now);
    ~SessionStore();

    /// Replays every journal in the directory. Journals that stop early are
    /// kept up to their last valid event (the torn tail is trimmed) and any
    /// interrupted advance is finished. Returns one warning per damaged file.
    std::vector<std::string> recover_all();

    /// Returns the full session document.
    nlohmann::json create(const CreateRequest& request);

    std::vector<nlohmann::json> list() const;

    /// Deep copy of a session; throws SessionError("not_found").
    Session snapshot(const std::string& id) const;

    Session record_measurement(const std::string& id, std::size_t robot_index, const MeasurementInput& input,
                               bool overwrite);
    Session advance(const std::string& id, std::optional<std::uint32_t> expected_generation);

    /// fsyncs every open journal.
    void flush();

    const std::string& journal_dir() const { return dir_; }

private:
    struct Entry {
        mutable std::shared_mutex mutex;
        Session session;
        std::unique_ptr<JournalWriter> writer;

        Entry(Session s, std::unique_ptr<JournalWriter> w) : session(std::move(s)), writer(std::move(w)) {}
    };

    std::shared_ptr<Entry> find(const std::string& id) const;
    std::string new_id();
    void commit(Entry& entry, const std::vector<JournalEvent>& events);

    std::string dir_;
    Clock clock_;
    mutable std::mutex map_mutex_;
    std::map<std::string, std::shared_ptr<Entry>> sessions_;
};

}  // namespace swimevo
