#include "swimevo/http_api.hpp"

#include <charconv>

#include <httplib.h>

#include <fmt/format.h>

namespace swimevo {

int http_status_for(const std::string& code) {
    if (code == "not_found") return 404;
    if (code == "duplicate_measurement" || code == "incomplete_generation" || code == "state_conflict") return 409;
    if (code == "internal") return 500;
    return 400;
}

namespace {

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const std::string& code, const std::string& message,
                const nlohmann::json& details = nullptr) {
    nlohmann::json err = {{"code", code}, {"message", message}};
    if (!details.is_null()) err["details"] = details;
    send_json(res, http_status_for(code), {{"error", err}});
}

nlohmann::json parse_body(const httplib::Request& req, bool allow_empty) {
    if (req.body.empty()) {
        if (allow_empty) return nlohmann::json::object();
        throw SessionError("bad_request", "request body is empty");
    }
    try {
        return nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::parse_error& e) {
        throw SessionError("bad_request", fmt::format("request body is not valid JSON: {}", e.what()));
    }
}

// Runs a handler, turning domain exceptions into structured error responses.
template <typename F>
httplib::Server::Handler guarded(F&& f) {
    return [f = std::forward<F>(f)](const httplib::Request& req, httplib::Response& res) {
        try {
            f(req, res);
        } catch (const SessionError& e) {
            send_error(res, e.code(), e.what(), e.details());
        } catch (const ConfigError& e) {
            send_error(res, "invalid_config", e.what(), {{"fields", e.problems()}});
        } catch (const std::exception& e) {
            send_error(res, "internal", e.what());
        }
    };
}

}  // namespace

void install_routes(httplib::Server& server, SessionStore& store, const std::string& assets_dir) {
    server.Post("/api/sessions", guarded([&store](const httplib::Request& req, httplib::Response& res) {
                    const auto request = CreateRequest::from_json(parse_body(req, false));
                    send_json(res, 201, store.create(request));
                }));

    server.Get("/api/sessions", guarded([&store](const httplib::Request&, httplib::Response& res) {
                   send_json(res, 200, {{"sessions", store.list()}});
               }));

    server.Get(R"(/api/sessions/([^/]+))", guarded([&store](const httplib::Request& req, httplib::Response& res) {
                   send_json(res, 200, store.snapshot(req.matches[1]).to_json());
               }));

    server.Put(R"(/api/sessions/([^/]+)/generations/current/robots/([0-9]+)/measurement)",
               guarded([&store](const httplib::Request& req, httplib::Response& res) {
                   const std::string index_text = req.matches[2];
                   std::size_t robot = 0;
                   auto [ptr, ec] = std::from_chars(index_text.data(), index_text.data() + index_text.size(), robot);
                   if (ec != std::errc{}) throw SessionError("out_of_range", "robot index out of range");
                   const bool overwrite = req.has_param("overwrite") && req.get_param_value("overwrite") == "true";
                   const auto input = MeasurementInput::from_json(parse_body(req, false));
                   send_json(res, 200, store.record_measurement(req.matches[1], robot, input, overwrite).to_json());
               }));

    server.Post(R"(/api/sessions/([^/]+)/advance)",
                guarded([&store](const httplib::Request& req, httplib::Response& res) {
                    const auto body = parse_body(req, true);
                    std::optional<std::uint32_t> expected;
                    if (body.is_object() && body.contains("expected_generation")) {
                        if (!body["expected_generation"].is_number_unsigned())
                            throw SessionError("bad_request", "expected_generation: expected a non-negative integer");
                        expected = body["expected_generation"].get<std::uint32_t>();
                    }
                    send_json(res, 200, store.advance(req.matches[1], expected).to_json());
                }));

    server.Get(R"(/api/sessions/([^/]+)/export)", guarded([&store](const httplib::Request& req, httplib::Response& res) {
                   const auto format = req.has_param("format") ? req.get_param_value("format") : std::string("csv");
                   const auto doc = store.snapshot(req.matches[1]).export_document(format);
                   res.status = 200;
                   res.set_content(doc, "text/csv");
               }));

    if (!assets_dir.empty()) server.set_mount_point("/", assets_dir);
}

}  // namespace swimevo
