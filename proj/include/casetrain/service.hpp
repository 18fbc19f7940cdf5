#pragma once

#include <memory>
#include <string>

#include "casetrain/adapter.hpp"
#include "casetrain/store.hpp"

namespace httplib {
class Server;
}

namespace casetrain {

struct ServiceConfig {
    std::string listen_address = "127.0.0.1";
    int port = 8080;
    std::string api_token;  ///< empty disables auth on mutating routes
    AdapterConfig adapter;

    /// Reads LISTEN_ADDR ("host:port"), API_TOKEN and the adapter variables.
    static ServiceConfig from_env();
};

/// JSON-over-HTTP front at `/v1`. Every route maps onto a store or session
/// operation; errors come back as `{code, message, detail}` with a status
/// derived from the error code.
class Service {
public:
    Service(std::shared_ptr<Store> store, ServiceConfig config,
            std::shared_ptr<CompletionClient> completion_client = nullptr);

    /// Installs all routes on an externally owned server (tests bind their
    /// own port and drive this directly).
    void register_routes(httplib::Server& server);

    /// Blocking listen loop on the configured address.
    int serve();

private:
    std::shared_ptr<Store> store_;
    ServiceConfig config_;
    std::shared_ptr<CompletionClient> completion_client_;
};

}  // namespace casetrain
