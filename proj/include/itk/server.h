#pragma once

#include <memory>
#include <string>

#include "itk/model_io.h"

namespace httplib {
class Server;
}

namespace itk {

inline constexpr size_t kMaxRequestBytes = 1024 * 1024;

// POST /predict and GET /health over one immutable model. The caller owns
// listening and shutdown; tests drive the same handlers the CLI serves.
std::unique_ptr<httplib::Server> make_server(std::shared_ptr<const ModelBundle> bundle);

// Blocks until the server stops. Returns when listen() exits.
void serve_blocking(httplib::Server& server, const std::string& host, int port);

}  // namespace itk
