#pragma once

#include <string>

#include "swimevo/session_store.hpp"

namespace httplib {
class Server;
}

namespace swimevo {

/// HTTP status used for a SessionError code.
int http_status_for(const std::string& code);

/// Registers the /api/sessions routes on `server`. When `assets_dir` is
/// non-empty it is served at "/". Errors are returned as
/// {"error": {"code": ..., "message": ..., "details": ...}}.
void install_routes(httplib::Server& server, SessionStore& store, const std::string& assets_dir = {});

}  // namespace swimevo
