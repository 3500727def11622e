/* Copyright 2026 The tacrec Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "tacrec/service.hpp"

#include <atomic>
#include <charconv>
#include <cstdlib>
#include <thread>
#include <unordered_set>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "tacrec/error.hpp"
#include "tacrec/hash.hpp"

namespace tacrec {
namespace {

using json = nlohmann::ordered_json;

HttpResponse error_response(int status, std::string_view code,
                            std::string_view message) {
  json body;
  body["error"] = {{"code", code}, {"message", message}};
  return HttpResponse{status, body.dump()};
}

std::string trim(std::string_view s) {
  const auto ws = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
           c == '\v';
  };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return std::string(s);
}

// Opaque per-process failure ids; they correlate with the server log only.
std::string next_failure_id() {
  static std::atomic<std::uint64_t> counter{0};
  SplitMix64 mix(counter.fetch_add(1) ^ 0x7ac7ec0000000000ull);
  return to_hex(mix.next());
}

// Reads an optional integer field into [lo, hi] or fails with `code`.
std::optional<HttpResponse> read_count(const json& req, const char* field,
                                       std::size_t fallback, std::size_t lo,
                                       std::size_t hi, std::string_view code,
                                       std::size_t& out) {
  out = fallback;
  const auto it = req.find(field);
  if (it == req.end()) return std::nullopt;
  if (!it->is_number_integer()) {
    return error_response(400, code, std::string(field) + " must be an integer");
  }
  const auto v = it->get<std::int64_t>();
  if (v < static_cast<std::int64_t>(lo) || v > static_cast<std::int64_t>(hi)) {
    return error_response(400, code,
                          std::string(field) + " must be in [" +
                              std::to_string(lo) + ", " + std::to_string(hi) +
                              "]");
  }
  out = static_cast<std::size_t>(v);
  return std::nullopt;
}

}  // namespace

RecommendService::RecommendService(std::shared_ptr<const Predictor> predictor,
                                   std::string model_digest,
                                   std::string config_json)
    : predictor_(std::move(predictor)),
      model_digest_(std::move(model_digest)),
      config_json_(std::move(config_json)) {}

HttpResponse RecommendService::recommend(std::string_view body) const {
  try {
    json req;
    try {
      req = json::parse(body);
    } catch (const json::parse_error&) {
      return error_response(400, "malformed-body", "body is not valid JSON");
    }
    if (!req.is_object()) {
      return error_response(400, "malformed-body", "body must be an object");
    }
    const auto tactics_it = req.find("tactics");
    if (tactics_it == req.end() || !tactics_it->is_array()) {
      return error_response(400, "malformed-body",
                            "tactics must be a list of strings");
    }
    std::vector<std::string> tactics;
    for (const auto& t : *tactics_it) {
      if (!t.is_string()) {
        return error_response(400, "malformed-body",
                              "tactics must be a list of strings");
      }
      std::string s = trim(t.get<std::string>());
      if (!s.empty()) tactics.push_back(std::move(s));
    }
    if (tactics.empty()) {
      return error_response(400, "empty-context", "no tactics given");
    }
    std::size_t n = 0;
    std::size_t k = 0;
    if (auto bad = read_count(req, "n", kDefaultRequestN, 1, kMaxRequestN,
                              "invalid-n", n)) {
      return *bad;
    }
    if (auto bad = read_count(req, "k", 1, 1, 2, "invalid-k", k)) return *bad;

    json warnings = json::array();
    if (tactics.size() < 3) warnings.push_back("context-shorter-than-3");
    std::unordered_set<std::string> reported;
    for (const std::string& t : tactics) {
      if (!predictor_->vocab().contains(t) && reported.insert(t).second) {
        warnings.push_back("unknown-token:" + t);
      }
    }

    const Recommendation rec =
        predict_topn(*predictor_, std::span<const std::string>(tactics), n, k);
    json items = json::array();
    for (const RecommendationItem& item : rec.items) {
      items.push_back({{"tactics", item.tactics}, {"score", item.score}});
    }
    json out;
    out["recommendations"] = std::move(items);
    out["model_digest"] = model_digest_;
    out["warnings"] = std::move(warnings);
    return HttpResponse{200, out.dump()};
  } catch (const std::exception&) {
    return error_response(500, "internal", next_failure_id());
  }
}

HttpResponse RecommendService::health() const {
  json out;
  out["model_digest"] = model_digest_;
  out["vocab_size"] = predictor_->vocab().size();
  out["config"] = json::parse(config_json_);
  return HttpResponse{200, out.dump()};
}

HttpResponse RecommendService::vocab() const {
  json out;
  out["tokens"] = predictor_->vocab().regular_tokens();
  return HttpResponse{200, out.dump()};
}

std::string model_digest(const Checkpoint& checkpoint) {
  return to_hex(fnv1a64(serialize_checkpoint(checkpoint)));
}

RecommendService make_service(Checkpoint checkpoint) {
  std::string digest = model_digest(checkpoint);
  std::string config = config_to_json(checkpoint.config);
  return RecommendService(
      std::make_shared<TransformerPredictor>(std::move(checkpoint)),
      std::move(digest), std::move(config));
}

BindAddress parse_bind_address(std::string_view text) {
  const std::size_t colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw Error("invalid-addr", "expected host:port, got '" + std::string(text) + "'");
  }
  BindAddress addr;
  addr.host = std::string(text.substr(0, colon));
  const std::string_view port = text.substr(colon + 1);
  const auto [end, ec] =
      std::from_chars(port.data(), port.data() + port.size(), addr.port);
  if (ec != std::errc() || end != port.data() + port.size() || addr.port < 0 ||
      addr.port > 65535) {
    throw Error("invalid-addr", "bad port in '" + std::string(text) + "'");
  }
  return addr;
}

BindAddress resolve_bind_address(const std::optional<std::string>& flag) {
  if (flag) return parse_bind_address(*flag);
  if (const char* env = std::getenv("TACREC_ADDR"); env && *env) {
    return parse_bind_address(env);
  }
  return parse_bind_address(kDefaultAddr);
}

struct HttpServer::Impl {
  explicit Impl(const RecommendService& s) : service(s) {}
  const RecommendService& service;
  httplib::Server server;
  std::thread thread;
};

namespace {

void reply(httplib::Response& res, const HttpResponse& r) {
  res.status = r.status;
  res.set_content(r.body, r.content_type);
}

}  // namespace

HttpServer::HttpServer(const RecommendService& service,
                       std::optional<std::filesystem::path> static_dir)
    : impl_(std::make_unique<Impl>(service)) {
  auto& svr = impl_->server;
  // The library default is SO_REUSEPORT, which lets a second server bind the
  // same port silently; SO_REUSEADDR alone still allows quick restarts.
  svr.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  const RecommendService* svc = &service;
  svr.Post("/api/recommend", [svc](const httplib::Request& req,
                                   httplib::Response& res) {
    reply(res, svc->recommend(req.body));
  });
  svr.Get("/api/health", [svc](const httplib::Request&, httplib::Response& res) {
    reply(res, svc->health());
  });
  svr.Get("/api/vocab", [svc](const httplib::Request&, httplib::Response& res) {
    reply(res, svc->vocab());
  });
  if (static_dir) svr.set_mount_point("/", static_dir->string());
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  auto& svr = impl_->server;
  if (port == 0) {
    const int bound = svr.bind_to_any_port(host);
    if (bound < 0) throw Error("bind-failed", "cannot bind " + host);
    return bound;
  }
  if (!svr.bind_to_port(host, port)) {
    throw Error("bind-failed", "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

int HttpServer::start(const std::string& host, int port) {
  const int bound = bind(host, port);
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void HttpServer::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace tacrec
