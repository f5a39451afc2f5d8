#include "uelicit/service.hpp"

#include <httplib.h>

#include "uelicit/error.hpp"

namespace uelicit {

namespace {

constexpr const char* kJson = "application/json";

void reply(httplib::Response& res, int status, const nlohmann::json& body)
{
    res.status = status;
    res.set_content(body.dump(), kJson);
}

void fail(httplib::Response& res, int status, const std::string& code, const std::string& message)
{
    reply(res, status, {{"code", code}, {"message", message}});
}

// Maps library exceptions onto status codes.
template <typename Handler>
httplib::Server::Handler guarded(Handler handler)
{
    return [handler](const httplib::Request& req, httplib::Response& res) {
        try {
            handler(req, res);
        } catch (const NotFoundError& e) {
            fail(res, 404, "not_found", e.what());
        } catch (const ConflictError& e) {
            fail(res, 409, "conflict", e.what());
        } catch (const StateError& e) {
            fail(res, 409, "invalid_state", e.what());
        } catch (const ValidationError& e) {
            fail(res, 400, "invalid_request", e.what());
        } catch (const ParseError& e) {
            fail(res, 400, "invalid_request", e.what());
        } catch (const nlohmann::json::exception& e) {
            fail(res, 400, "invalid_request", e.what());
        } catch (const std::exception& e) {
            fail(res, 500, "internal", e.what());
        }
    };
}

nlohmann::json parse_body(const httplib::Request& req)
{
    auto body = nlohmann::json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object()) throw ValidationError("request body must be a JSON object");
    return body;
}

std::string selector_of(const nlohmann::json& v)
{
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_unsigned()) return std::to_string(v.get<std::size_t>());
    throw ValidationError("history_id must be a string");
}

} // namespace

Service::Service(std::shared_ptr<SessionStore> store, ServiceOptions options)
    : store_(std::move(store))
    , options_(std::move(options))
    , server_(std::make_unique<httplib::Server>())
{
    if (!store_) throw ValidationError("service needs a session store");
    install_routes();
}

Service::~Service() = default;

void Service::install_routes()
{
    auto& srv = *server_;

    srv.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const auto body = parse_body(req);
                 if (!body.contains("history_id")) throw ValidationError("missing history_id");
                 const auto session = store_->create(selector_of(body.at("history_id")));
                 reply(res, 201, session_to_json(session, store_->trees().model()));
             }));

    srv.Get(R"(/sessions/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
                const auto session = store_->get(req.matches[1]);
                reply(res, 200, session_to_json(session, store_->trees().model()));
            }));

    srv.Get(R"(/sessions/([^/]+)/question)", guarded([this](const httplib::Request& req, httplib::Response& res) {
                reply(res, 200, question_to_json(store_->question(req.matches[1])));
            }));

    srv.Post(R"(/sessions/([^/]+)/answer)", guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const auto body = parse_body(req);
                 if (!body.contains("answer") || !body.at("answer").is_boolean())
                     throw ValidationError("answer must be true or false");
                 const auto session = store_->submit(req.matches[1], body.at("answer").get<bool>());
                 reply(res, 200, session_to_json(session, store_->trees().model()));
             }));

    srv.Get("/model", guarded([this](const httplib::Request&, httplib::Response& res) {
                reply(res, 200, model_summary_json(store_->trees().model()));
            }));

    srv.Get(R"(/trees/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
                const auto h = store_->trees().model().find_history(req.matches[1].str());
                reply(res, 200, tree_to_json(*store_->trees().tree(h)));
            }));

    srv.set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (res.body.empty()) fail(res, res.status, res.status == 404 ? "not_found" : "error", httplib::status_message(res.status));
    });

    if (options_.snapshot) {
        if (std::filesystem::exists(*options_.snapshot)) store_->load_snapshot(*options_.snapshot);
        srv.set_post_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
            if (req.method == "POST" && res.status < 300) store_->save_snapshot(*options_.snapshot);
        });
    }

    if (options_.static_dir) {
        if (!srv.set_mount_point("/", options_.static_dir->string()))
            throw NotFoundError("static directory " + options_.static_dir->string() + " does not exist");
    }
}

int Service::bind()
{
    int port = options_.port;
    if (port == 0) {
        port = server_->bind_to_any_port(options_.host);
        if (port < 0) throw Error("cannot bind " + options_.host);
    } else if (!server_->bind_to_port(options_.host, port)) {
        throw Error("cannot bind " + options_.host + ":" + std::to_string(port));
    }
    return port;
}

void Service::run()
{
    server_->listen_after_bind();
}

void Service::stop()
{
    server_->stop();
}

} // namespace uelicit
