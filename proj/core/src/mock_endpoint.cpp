#include "ctxalign/mock_endpoint.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "ctxalign/errors.hpp"

namespace ctxalign::mock {

namespace {

using nlohmann::json;

struct Script {
  std::map<std::string, std::string> by_fingerprint;  // "step0".."step2"
  std::string default_content;
  bool has_default = false;
};

std::string canned_content(const json& entry) {
  if (entry.is_string()) return entry.get<std::string>();
  if (entry.is_object()) return entry.dump();
  throw Error(Errc::bad_script, "canned response must be a string or an object");
}

Script parse_script(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::bad_script, "cannot read script '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  json root = json::parse(buf.str(), nullptr, false);
  if (root.is_discarded() || !root.is_object()) {
    throw Error(Errc::bad_script, "script is not a JSON object");
  }
  Script script;
  if (root.contains("steps")) {
    const json& steps = root.at("steps");
    if (!steps.is_object()) throw Error(Errc::bad_script, "'steps' must be an object");
    for (const auto& [key, value] : steps.items()) {
      if (key != "0" && key != "1" && key != "2") {
        throw Error(Errc::bad_script, "step key must be 0, 1 or 2, got '" + key + "'");
      }
      script.by_fingerprint["step" + key] = canned_content(value);
    }
  }
  if (root.contains("default")) {
    script.default_content = canned_content(root.at("default"));
    script.has_default = true;
  }
  for (const auto& [key, value] : root.items()) {
    if (key != "steps" && key != "default") {
      throw Error(Errc::bad_script, "unknown script key '" + key + "'");
    }
  }
  if (script.by_fingerprint.empty() && !script.has_default) {
    throw Error(Errc::bad_script, "script defines no responses");
  }
  return script;
}

// The user text reveals which card sections the prompt carried.
std::string fingerprint(const std::string& user_text) {
  const bool has_rad = user_text.find("[RADIOMICS]") != std::string::npos;
  const bool has_xai = user_text.find("[XAI]") != std::string::npos;
  const bool has_voc = user_text.find("[VOCAB]") != std::string::npos;
  if (!has_rad && !has_xai && !has_voc) return "step0";
  if (has_rad && !has_xai && !has_voc) return "step1";
  if (has_rad && (has_xai || has_voc)) return "step2";
  return "other";
}

std::string user_text_of(const json& body) {
  std::string text;
  if (!body.contains("messages")) return text;
  for (const json& message : body.at("messages")) {
    if (message.value("role", "") != "user") continue;
    const json& content = message.at("content");
    if (content.is_string()) {
      text += content.get<std::string>();
    } else if (content.is_array()) {
      for (const json& part : content) {
        if (part.value("type", "") == "text") text += part.value("text", "");
      }
    }
  }
  return text;
}

}  // namespace

struct MockServer::Impl {
  Script script;
  httplib::Server server;
  std::thread thread;
  int port = 0;
};

MockServer::MockServer(const std::string& script_path, int port) : impl_(new Impl) {
  impl_->script = parse_script(script_path);

  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    json body = json::parse(req.body, nullptr, false);
    if (body.is_discarded()) {
      res.status = 400;
      res.set_content(R"({"error":"request body is not JSON"})", "application/json");
      return;
    }
    const std::string fp = fingerprint(user_text_of(body));
    std::string content;
    const auto it = impl_->script.by_fingerprint.find(fp);
    if (it != impl_->script.by_fingerprint.end()) {
      content = it->second;
    } else if (impl_->script.has_default) {
      content = impl_->script.default_content;
    } else {
      res.status = 404;
      res.set_content(R"({"error":"no scripted response for fingerprint )" + fp + "\"}",
                      "application/json");
      return;
    }
    json reply;
    reply["id"] = "mock";
    reply["object"] = "chat.completion";
    reply["model"] = body.value("model", "mock");
    reply["choices"] = json::array({json{{"index", 0},
                                         {"message", {{"role", "assistant"}, {"content", content}}},
                                         {"finish_reason", "stop"}}});
    res.set_content(reply.dump(), "application/json");
  };

  impl_->server.Post("/chat/completions", handler);
  impl_->server.Post("/v1/chat/completions", handler);
  impl_->server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("ok", "text/plain");
  });

  if (!impl_->server.bind_to_port("127.0.0.1", port)) {
    throw Error(Errc::port_busy, "cannot bind 127.0.0.1:" + std::to_string(port));
  }
  impl_->port = port;
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

MockServer::~MockServer() { stop(); }

int MockServer::port() const { return impl_->port; }

void MockServer::stop() {
  if (impl_ && impl_->server.is_running()) {
    impl_->server.stop();
  }
  if (impl_ && impl_->thread.joinable()) {
    impl_->thread.join();
  }
}

std::size_t validate_mock_script(const std::string& script_path) {
  const Script script = parse_script(script_path);
  return script.by_fingerprint.size() + (script.has_default ? 1 : 0);
}

}  // namespace ctxalign::mock
