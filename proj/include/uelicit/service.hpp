#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "uelicit/session.hpp"

namespace httplib {
class Server;
}

namespace uelicit {

struct ServiceOptions
{
    std::string host = "127.0.0.1";
    int port = 8080; // 0 picks a free port
    std::optional<std::filesystem::path> static_dir;
    // Loaded at start when present; rewritten after every accepted POST.
    std::optional<std::filesystem::path> snapshot;
};

/**
 * HTTP+JSON front end over a SessionStore:
 *   POST /sessions                 {"history_id": "..."}
 *   GET  /sessions/{id}
 *   GET  /sessions/{id}/question
 *   POST /sessions/{id}/answer     {"answer": true|false}
 *   GET  /model
 *   GET  /trees/{history_id}
 * Errors are {"code", "message"} with 400, 404 or 409.
 */
class Service
{
public:
    Service(std::shared_ptr<SessionStore> store, ServiceOptions options = {});
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    // Binds the socket; returns the bound port. Throws Error on failure.
    int bind();
    // Blocks until stop(). bind() must have been called.
    void run();
    void stop();

    SessionStore& store() noexcept { return *store_; }

private:
    void install_routes();

    std::shared_ptr<SessionStore> store_;
    ServiceOptions options_;
    std::unique_ptr<httplib::Server> server_;
};

} // namespace uelicit
