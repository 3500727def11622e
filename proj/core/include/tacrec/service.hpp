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

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "tacrec/checkpoint.hpp"
#include "tacrec/predictor.hpp"

namespace tacrec {

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

inline constexpr std::size_t kMaxRequestN = 50;
inline constexpr std::size_t kDefaultRequestN = 7;
inline constexpr std::string_view kDefaultAddr = "127.0.0.1:7071";

// Request handling, independent of any transport. The predictor is shared
// read-only; every method is safe to call concurrently.
class RecommendService {
 public:
  RecommendService(std::shared_ptr<const Predictor> predictor,
                   std::string model_digest, std::string config_json);

  // Body {"tactics": [...], "n": 7, "k": 1}. Tactics are trimmed and blank
  // entries dropped. 400 codes: malformed-body, empty-context, invalid-n,
  // invalid-k. Unexpected failures give 500 with an opaque id.
  HttpResponse recommend(std::string_view body) const;
  // {"model_digest", "vocab_size", "config"}
  HttpResponse health() const;
  // {"tokens": [...]} regular tokens in id order.
  HttpResponse vocab() const;

  const std::string& model_digest() const { return model_digest_; }

 private:
  std::shared_ptr<const Predictor> predictor_;
  std::string model_digest_;
  std::string config_json_;
};

// Digest of the serialized checkpoint bytes, 16 hex chars.
std::string model_digest(const Checkpoint& checkpoint);

RecommendService make_service(Checkpoint checkpoint);

// "host:port" from the flag if given, else TACREC_ADDR, else the default.
// Throws Error("invalid-addr").
struct BindAddress {
  std::string host;
  int port = 0;
};
BindAddress resolve_bind_address(const std::optional<std::string>& flag);
BindAddress parse_bind_address(std::string_view text);

// HTTP/1.1 front end: POST /api/recommend, GET /api/health, GET /api/vocab,
// and static files from `static_dir` at / when given.
class HttpServer {
 public:
  explicit HttpServer(const RecommendService& service,
                      std::optional<std::filesystem::path> static_dir = {});
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds (port 0 picks a free port) and returns the bound port. Throws
  // Error("bind-failed").
  int bind(const std::string& host, int port);
  // Serves until stop(); blocks the caller.
  void listen();
  // Binds, then serves on a background thread.
  int start(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace tacrec
