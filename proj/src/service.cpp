#include "menurank/service.hpp"

#include <httplib.h>

#include <nlohmann/json.hpp>

#include "menurank/errors.hpp"

namespace menurank {
namespace {

HttpReply error_reply(int status, const std::string& message) {
  return {status, nlohmann::json{{"error", message}}.dump()};
}

}  // namespace

nlohmann::json model_metadata(const Model& model) {
  const RankerConfig c = model.config();
  return {{"format_version", kModelFormatVersion},
          {"embed_dim", c.embed_dim},
          {"vocab_size", c.vocab_size},
          {"keys", model.keys}};
}

nlohmann::json rank_response(const Model& model, const std::vector<std::string>& dishes,
                             std::string_view key, const RankOutput& output) {
  nlohmann::json results = nlohmann::json::array();
  std::size_t position = 1;
  for (std::size_t idx : output.permutation) {
    results.push_back({{"rank", position++}, {"dish", dishes[idx]}, {"score", output.scores[idx]}});
  }
  return {{"key", key}, {"results", std::move(results)}, {"model", model_metadata(model)}};
}

HttpReply handle_rank(const Model& model, std::string_view request_body) {
  nlohmann::json request;
  try {
    request = nlohmann::json::parse(request_body);
  } catch (const nlohmann::json::exception& e) {
    return error_reply(400, std::string("malformed JSON: ") + e.what());
  }
  try {
    if (!request.is_object()) return error_reply(400, "request must be a JSON object");
    if (!request.contains("key") || !request["key"].is_string()) {
      return error_reply(400, "request needs a string 'key'");
    }
    std::vector<std::string> dishes;
    if (request.contains("dishes")) {
      if (!request["dishes"].is_array()) return error_reply(400, "'dishes' must be an array");
      for (const auto& d : request["dishes"]) {
        if (!d.is_string()) return error_reply(400, "'dishes' must contain strings");
        dishes.push_back(d.get<std::string>());
      }
    } else if (request.contains("menu") && request["menu"].is_string()) {
      dishes = parse_menu_text(request["menu"].get<std::string>());
    } else {
      return error_reply(400, "request needs 'dishes' (array) or 'menu' (text)");
    }
    const std::string key = request["key"].get<std::string>();
    std::size_t key_id = 0;
    try {
      key_id = model.key_id(key);
    } catch (const KeyError&) {
      return {422, nlohmann::json{{"error", "unsupported search key '" + key + "'"},
                                  {"supported_keys", model.keys}}
                       .dump()};
    }
    const RankOutput out = forward(pack_menu(dishes, model.vocab), key_id, model.params);
    return {200, rank_response(model, dishes, key, out).dump()};
  } catch (const InvalidDishError& e) {
    return error_reply(400, e.what());
  } catch (const EmptyMenuError& e) {
    return error_reply(400, e.what());
  } catch (const CapacityError& e) {
    return error_reply(400, e.what());
  } catch (const std::exception& e) {
    return error_reply(500, std::string("internal error: ") + e.what());
  }
}

HttpReply handle_keys(const Model& model) {
  return {200, nlohmann::json{{"keys", model.keys}}.dump()};
}

HttpReply handle_health(const Model& model) {
  return {200, nlohmann::json{{"status", "ok"}, {"version", kVersion},
                              {"model", model_metadata(model)}}
                   .dump()};
}

RankService::RankService(Model model, std::string cors_origin)
    : model_(std::move(model)),
      cors_origin_(std::move(cors_origin)),
      server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

RankService::~RankService() { stop(); }

void RankService::install_routes() {
  auto send = [this](httplib::Response& res, const HttpReply& reply) {
    res.status = reply.status;
    res.set_content(reply.body, "application/json");
  };
  server_->set_default_headers({{"Access-Control-Allow-Origin", cors_origin_},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type"}});
  server_->Post("/api/rank", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, handle_rank(model_, req.body));
  });
  server_->Get("/api/keys", [this, send](const httplib::Request&, httplib::Response& res) {
    send(res, handle_keys(model_));
  });
  server_->Get("/api/health", [this, send](const httplib::Request&, httplib::Response& res) {
    send(res, handle_health(model_));
  });
  server_->Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
  });
  server_->set_exception_handler(
      [send](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string what = "unknown";
        try {
          std::rethrow_exception(ep);
        } catch (const std::exception& e) {
          what = e.what();
        } catch (...) {
        }
        send(res, error_reply(500, "internal error: " + what));
      });
}

int RankService::bind(const std::string& host, int port) {
  if (port == 0) return server_->bind_to_any_port(host);
  return server_->bind_to_port(host, port) ? port : -1;
}

bool RankService::listen_after_bind() { return server_->listen_after_bind(); }

void RankService::stop() {
  if (server_ && server_->is_running()) server_->stop();
}

void RankService::wait_until_ready() const { server_->wait_until_ready(); }

}  // namespace menurank
