#include "itk/server.h"

#include <httplib.h>
#include <json.hpp>

#include "itk/errors.h"
#include "itk/pipeline.h"

namespace itk {

namespace {

using nlohmann::json;

std::string error_json(const std::string& message) {
    return json{{"error", message}}.dump();
}

// Missing fields default to empty; present fields must be strings.
RawInput parse_predict_request(const std::string& body) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::exception& e) {
        throw data_error(std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw data_error("request body must be a JSON object");
    RawInput in;
    const auto read = [&](const char* key, std::string& out) {
        const auto it = j.find(key);
        if (it == j.end() || it->is_null()) return;
        if (!it->is_string()) throw data_error(std::string("field '") + key + "' must be a string");
        out = it->get<std::string>();
    };
    read("title", in.title);
    read("body", in.body);
    read("created_at", in.created_at);
    read("author_association", in.author_association);
    read("repository", in.repository);
    return in;
}

}  // namespace

std::unique_ptr<httplib::Server> make_server(std::shared_ptr<const ModelBundle> bundle) {
    auto server = std::make_unique<httplib::Server>();
    server->set_payload_max_length(kMaxRequestBytes);

    server->Get("/health", [bundle](const httplib::Request&, httplib::Response& res) {
        const json j = {{"status", "ok"},
                        {"model_kind", bundle->model_kind},
                        {"format_version", kModelFormatVersion}};
        res.set_content(j.dump(), "application/json");
    });

    server->Post("/predict", [bundle](const httplib::Request& req, httplib::Response& res) {
        try {
            const RawInput in = parse_predict_request(req.body);
            res.set_content(predict_response_json(*bundle, in), "application/json");
        } catch (const data_error& e) {
            res.status = 400;
            res.set_content(error_json(e.what()), "application/json");
        }
    });

    return server;
}

void serve_blocking(httplib::Server& server, const std::string& host, int port) {
    if (!server.listen(host, port)) {
        throw io_error("cannot listen on " + host + ":" + std::to_string(port));
    }
}

}  // namespace itk
