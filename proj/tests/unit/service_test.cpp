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

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>

#include <unistd.h>

#include "httplib.h"
#include "json.hpp"
#include "synthetic.hpp"
#include "tacrec/error.hpp"
#include "tacrec/service.hpp"
#include "tacrec/trainer.hpp"

namespace tacrec {
namespace {

using json = nlohmann::json;

Checkpoint small_checkpoint() {
  std::vector<std::string> names = {"Induct_on", "rw", "fs", "simp", "metis_tac",
                                    "Cases_on", "strip_tac", "irule", "gvs", "res_tac"};
  Checkpoint ck;
  ck.config.window = 8;
  ck.config.embed_dim = 16;
  ck.config.heads = 2;
  ck.config.layers = 1;
  ck.config.ffn_dim = 32;
  ck.vocab = Vocabulary(names);
  ck.params = tf_init<float>(ck.config, ck.vocab.size());
  return ck;
}

class ServiceTest : public ::testing::Test {
 protected:
  Checkpoint ck = small_checkpoint();
  RecommendService service = make_service(ck);

  json ok(const std::string& body) {
    const HttpResponse r = service.recommend(body);
    EXPECT_EQ(r.status, 200) << r.body;
    EXPECT_EQ(r.content_type, "application/json");
    return json::parse(r.body);
  }
  std::string error_code(const std::string& body) {
    const HttpResponse r = service.recommend(body);
    EXPECT_EQ(r.status, 400) << r.body;
    return json::parse(r.body).at("error").at("code").get<std::string>();
  }
};

TEST_F(ServiceTest, RanksAtMostNWithNonIncreasingScores) {
  const json j = ok(R"({"tactics":["Induct_on","rw","fs"],"n":7,"k":1})");
  const auto& recs = j.at("recommendations");
  ASSERT_EQ(recs.size(), 7u);
  for (std::size_t i = 1; i < recs.size(); ++i) {
    EXPECT_LE(recs[i].at("score").get<double>(), recs[i - 1].at("score").get<double>());
  }
  EXPECT_EQ(j.at("model_digest"), model_digest(ck));
  EXPECT_TRUE(j.at("warnings").empty());
  // n larger than the vocabulary: every regular token, no more.
  EXPECT_EQ(ok(R"({"tactics":["rw","fs","simp"],"n":50})").at("recommendations").size(), 10u);
}

TEST_F(ServiceTest, TwoStepItems) {
  const json j = ok(R"({"tactics":["rw","fs","simp"],"n":5,"k":2})");
  ASSERT_EQ(j.at("recommendations").size(), 5u);
  for (const auto& item : j.at("recommendations")) EXPECT_EQ(item.at("tactics").size(), 2u);
}

TEST_F(ServiceTest, Defaults) {
  const json j = ok(R"({"tactics":["rw","fs","simp"]})");
  EXPECT_EQ(j.at("recommendations").size(), kDefaultRequestN);
  EXPECT_EQ(j.at("recommendations")[0].at("tactics").size(), 1u);
}

TEST_F(ServiceTest, Warnings) {
  const json j = ok(R"({"tactics":["rw","??unknown??","fs"],"n":2,"k":1})");
  EXPECT_EQ(j.at("recommendations").size(), 2u);
  EXPECT_EQ(j.at("warnings"), json::array({"unknown-token:??unknown??"}));
  const json short_ctx = ok(R"({"tactics":[" rw ", "", "zz  "]})");
  EXPECT_EQ(short_ctx.at("warnings"),
            json::array({"context-shorter-than-3", "unknown-token:zz"}));
}

TEST_F(ServiceTest, InvalidRequests) {
  EXPECT_EQ(error_code(R"({"tactics":[],"n":7,"k":1})"), "empty-context");
  EXPECT_EQ(error_code(R"({"tactics":["  "]})"), "empty-context");
  EXPECT_EQ(error_code("{not json"), "malformed-body");
  EXPECT_EQ(error_code("[1,2]"), "malformed-body");
  EXPECT_EQ(error_code(R"({"n":3})"), "malformed-body");
  EXPECT_EQ(error_code(R"({"tactics":["rw",3]})"), "malformed-body");
  EXPECT_EQ(error_code(R"({"tactics":["rw"],"n":0})"), "invalid-n");
  EXPECT_EQ(error_code(R"({"tactics":["rw"],"n":51})"), "invalid-n");
  EXPECT_EQ(error_code(R"({"tactics":["rw"],"n":2.5})"), "invalid-n");
  EXPECT_EQ(error_code(R"({"tactics":["rw"],"n":"7"})"), "invalid-n");
  EXPECT_EQ(error_code(R"({"tactics":["rw"],"k":3})"), "invalid-k");
  EXPECT_EQ(error_code(R"({"tactics":["rw"],"k":0})"), "invalid-k");
}

TEST_F(ServiceTest, HealthAndVocab) {
  const json h = json::parse(service.health().body);
  EXPECT_EQ(h.at("model_digest"), model_digest(ck));
  EXPECT_EQ(h.at("vocab_size"), ck.vocab.size());
  EXPECT_EQ(h.at("config").at("embed_dim"), 16);
  const json v = json::parse(service.vocab().body);
  EXPECT_EQ(v.at("tokens").get<std::vector<std::string>>(), ck.vocab.regular_tokens());
}

TEST_F(ServiceTest, ConcurrentIdenticalRequestsAgree) {
  const std::string body = R"({"tactics":["Induct_on","rw","fs"],"n":10,"k":2})";
  const std::string expected = service.recommend(body).body;
  std::vector<std::future<std::string>> futures;
  for (int i = 0; i < 8; ++i) {
    futures.push_back(std::async(std::launch::async, [&] { return service.recommend(body).body; }));
  }
  for (auto& f : futures) EXPECT_EQ(f.get(), expected);
}

// A predictor that fails, to exercise the 500 path.
class Broken final : public Predictor {
 public:
  std::string name() const override { return "broken"; }
  const Vocabulary& vocab() const override { return vocab_; }
  std::vector<double> distribution(std::span<const TokenId>) const override {
    throw std::runtime_error("secret internal detail");
  }

 private:
  Vocabulary vocab_{std::vector<std::string>{"a"}};
};

TEST(ServiceFailure, InternalErrorsAreOpaque) {
  const RecommendService s(std::make_shared<Broken>(), "d", "{}");
  const HttpResponse a = s.recommend(R"({"tactics":["a"]})");
  const HttpResponse b = s.recommend(R"({"tactics":["a"]})");
  EXPECT_EQ(a.status, 500);
  const json ja = json::parse(a.body);
  EXPECT_EQ(ja.at("error").at("code"), "internal");
  EXPECT_EQ(a.body.find("secret"), std::string::npos);
  EXPECT_NE(ja.at("error").at("message"), json::parse(b.body).at("error").at("message"));
}

TEST(BindAddress, ParseAndPrecedence) {
  const BindAddress a = parse_bind_address("0.0.0.0:8080");
  EXPECT_EQ(a.host, "0.0.0.0");
  EXPECT_EQ(a.port, 8080);
  for (const char* bad : {"nohost", "host:", "host:99999", "host:abc", ":80"}) {
    try {
      parse_bind_address(bad);
      ADD_FAILURE() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), "invalid-addr");
    }
  }
  ::unsetenv("TACREC_ADDR");
  EXPECT_EQ(resolve_bind_address(std::nullopt).port, 7071);
  EXPECT_EQ(resolve_bind_address(std::nullopt).host, "127.0.0.1");
  ::setenv("TACREC_ADDR", "127.0.0.1:9001", 1);
  EXPECT_EQ(resolve_bind_address(std::nullopt).port, 9001);
  EXPECT_EQ(resolve_bind_address(std::string("127.0.0.1:9002")).port, 9002);
  ::unsetenv("TACREC_ADDR");
}

TEST(HttpServer, EndpointsOverHttp) {
  const Checkpoint ck = small_checkpoint();
  const RecommendService service = make_service(ck);
  const auto static_dir = std::filesystem::temp_directory_path() /
                          ("tacrec-static-" + std::to_string(::getpid()));
  std::filesystem::create_directories(static_dir);
  std::ofstream(static_dir / "index.html") << "<html>ui</html>";

  HttpServer server(service, static_dir);
  const int port = server.start("127.0.0.1", 0);
  ASSERT_GT(port, 0);
  httplib::Client client("127.0.0.1", port);

  auto rec = client.Post("/api/recommend", R"({"tactics":["Induct_on","rw","fs"],"n":3})",
                         "application/json");
  ASSERT_TRUE(rec);
  EXPECT_EQ(rec->status, 200);
  EXPECT_EQ(rec->body, service.recommend(R"({"tactics":["Induct_on","rw","fs"],"n":3})").body);
  EXPECT_EQ(json::parse(rec->body).at("recommendations").size(), 3u);

  auto bad = client.Post("/api/recommend", R"({"tactics":[],"n":7,"k":1})", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
  EXPECT_EQ(json::parse(bad->body).at("error").at("code"), "empty-context");

  auto health = client.Get("/api/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  EXPECT_EQ(json::parse(health->body).at("model_digest"), model_digest(ck));

  auto vocab = client.Get("/api/vocab");
  ASSERT_TRUE(vocab);
  EXPECT_EQ(json::parse(vocab->body).at("tokens").size(), ck.vocab.regular_size());

  auto page = client.Get("/index.html");
  ASSERT_TRUE(page);
  EXPECT_EQ(page->status, 200);
  EXPECT_EQ(page->body, "<html>ui</html>");

  auto missing = client.Get("/api/nope");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);

  server.stop();
  std::filesystem::remove_all(static_dir);
}

TEST(HttpServer, BindFailure) {
  const RecommendService service = make_service(small_checkpoint());
  HttpServer first(service);
  const int port = first.start("127.0.0.1", 0);
  HttpServer second(service);
  try {
    second.bind("127.0.0.1", port);
    ADD_FAILURE() << "second bind succeeded";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "bind-failed");
  }
}

}  // namespace
}  // namespace tacrec
