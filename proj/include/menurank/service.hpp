#pragma once

#include <memory>
#include <string>
#include <string_view>

#include <nlohmann/json_fwd.hpp>

#include "menurank/model.hpp"

namespace httplib {
class Server;
}

namespace menurank {

inline constexpr std::string_view kVersion = "0.1.0";

// RankResponse body for an already ranked menu.
nlohmann::json rank_response(const Model& model, const std::vector<std::string>& dishes,
                             std::string_view key, const RankOutput& output);
nlohmann::json model_metadata(const Model& model);

struct HttpReply {
  int status = 200;
  std::string body;
};

/// Request handlers, independent of the transport. Bad input yields 400,
/// an unsupported key 422 and anything unexpected 500; they never throw.
HttpReply handle_rank(const Model& model, std::string_view request_body);
HttpReply handle_keys(const Model& model);
HttpReply handle_health(const Model& model);

/// HTTP front end over one immutable model. Requests are served
/// concurrently; nothing mutable is shared between them.
class RankService {
 public:
  explicit RankService(Model model, std::string cors_origin = "*");
  ~RankService();
  RankService(const RankService&) = delete;
  RankService& operator=(const RankService&) = delete;

  // Binds to port 0 → an ephemeral port, returned. Returns -1 on failure.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  bool listen_after_bind();
  void stop();
  void wait_until_ready() const;

 private:
  void install_routes();

  const Model model_;
  std::string cors_origin_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace menurank
