#include <gtest/gtest.h>

#include <future>

#include "ehcp/ehcp.hpp"
#include "ehcp/model_file.hpp"
#include "ehcp/service.hpp"
#include "fixtures.hpp"

// after Eigen: resolv.h defines a `_res` macro
#include <httplib.h>

using namespace ehcp;
using namespace ehcp::testing;
using nlohmann::json;

namespace {

const DataBundle& bundle() {
  static const DataBundle b = [] {
    auto ds = generate_synthetic_dataset(5, 2, 10);
    return build_bundle(ds.frames, ds.metas, ColumnMapping::big_data_bowl());
  }();
  return b;
}

ModelFile bart_file() {
  TrainOptions opt;
  opt.bart.num_trees = 10;
  opt.bart.draws = 40;
  opt.bart.burn_in = 20;
  const auto& schema = CovariateSchema::standard();
  return {schema, train_model(schema, bundle().features, opt), opt, dataset_fingerprint(schema, bundle().features)};
}

// Completion rises with separation at arrival, which only pinning can set.
ModelFile separation_file() {
  Eigen::MatrixXd draws(2, 2);
  draws << -1.0, 0.5, -0.8, 0.4;
  TrainOptions opt;
  opt.kind = ModelKind::logistic;
  return {CovariateSchema::standard(), hand_logistic({cov::kSeparationArrival}, draws), opt, ""};
}

class ServiceTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    service_ = new EhcpService(bart_file(), bundle(), ServiceDefaults{20, ImputationMode::joint, 0.5, 1});
    server_ = new HttpServer(*service_);
    port_ = server_->start("127.0.0.1", 0);
  }
  static void TearDownTestSuite() {
    delete server_;
    delete service_;
  }

  static httplib::Result get(const std::string& path) { return httplib::Client("127.0.0.1", port_).Get(path); }
  static httplib::Result post(const std::string& path, const std::string& body) {
    return httplib::Client("127.0.0.1", port_).Post(path, body, "application/json");
  }

  static const PlaySequence& play() { return bundle().plays.front(); }
  static json whatif_body() {
    return {{"game_id", play().meta.key.game_id},
            {"play_id", play().meta.key.play_id},
            {"receiver", play().route_runners().front().value},
            {"t", 1.0},
            {"m", 30},
            {"seed", 4}};
  }

  static inline EhcpService* service_ = nullptr;
  static inline HttpServer* server_ = nullptr;
  static inline int port_ = 0;
};

}  // namespace

TEST_F(ServiceTest, ListsAndShowsPlays) {
  auto r = get("/plays");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(json::parse(r->body)["plays"].size(), bundle().plays.size());
  const auto key = play().meta.key;
  r = get("/plays/" + std::to_string(key.game_id) + "/" + std::to_string(key.play_id));
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  const auto j = json::parse(r->body);
  EXPECT_TRUE(j.contains("tracks"));
  EXPECT_EQ(j["receivers"].size(), play().route_runners().size());
  EXPECT_EQ(get("/plays/999/999")->status, 404);
  EXPECT_EQ(get("/nothing/here")->status, 404);
}

TEST_F(ServiceTest, TrajectoriesMatchTheEngine) {
  const auto key = play().meta.key;
  const auto r = get("/plays/" + std::to_string(key.game_id) + "/" + std::to_string(key.play_id) +
                     "/trajectories?step=0.5&m=10&seed=3");
  ASSERT_TRUE(r);
  ASSERT_EQ(r->status, 200);
  PlayReportConfig cfg;
  cfg.imputation.m = 10;
  cfg.seed = 3;
  const auto expected = play_report(service_->model().model, play(), bundle().pool, cfg);
  EXPECT_EQ(json::parse(r->body)["receivers"], expected["receivers"]);
  EXPECT_EQ(get("/plays/" + std::to_string(key.game_id) + "/" + std::to_string(key.play_id) +
                "/trajectories?step=-1")->status, 422);
}

TEST_F(ServiceTest, ModelEndpoints) {
  auto r = get("/model");
  ASSERT_TRUE(r);
  const auto j = json::parse(r->body);
  EXPECT_EQ(j["kind"], "bart");
  EXPECT_EQ(j["draws"], 40);
  EXPECT_EQ(get("/model/importance")->status, 200);
  r = get(std::string("/model/pdp?variable=") + cov::kSeparationThrow + "&points=5");
  ASSERT_TRUE(r);
  ASSERT_EQ(r->status, 200);
  EXPECT_EQ(json::parse(r->body)["points"].size(), 5u);
  EXPECT_EQ(get("/model/pdp?variable=bogus")->status, 422);
}

TEST_F(ServiceTest, WhatIfIsDeterministicAndConcurrentSafe) {
  const auto body = whatif_body().dump();
  const auto first = post("/whatif", body);
  ASSERT_TRUE(first);
  ASSERT_EQ(first->status, 200) << first->body;
  EXPECT_EQ(post("/whatif", body)->body, first->body);
  const auto j = json::parse(first->body);
  EXPECT_EQ(j["draws"].size(), 40u);
  EXPECT_EQ(j["imputations"], 30);

  std::vector<std::string> serial;
  std::vector<json> bodies;
  for (int s = 0; s < 6; ++s) {
    auto b = whatif_body();
    b["seed"] = s;
    b["t"] = 0.5 * s;
    bodies.push_back(b);
    serial.push_back(post("/whatif", b.dump())->body);
  }
  std::vector<std::future<std::string>> futures;
  for (const auto& b : bodies) {
    futures.push_back(std::async(std::launch::async, [b] { return post("/whatif", b.dump())->body; }));
  }
  for (std::size_t i = 0; i < futures.size(); ++i) EXPECT_EQ(futures[i].get(), serial[i]);
}

TEST_F(ServiceTest, FullyPinnedWhatIfEqualsPredict) {
  auto body = whatif_body();
  json pin = json::object();
  for (const auto& name : bundle().pool.partition.missing) pin[name] = bundle().pool.rows[2].values.at(name);
  body["pinning"] = pin;
  const auto w = post("/whatif", body.dump());
  ASSERT_EQ(w->status, 200) << w->body;
  json pred = {{"game_id", body["game_id"]}, {"play_id", body["play_id"]},
               {"receiver", body["receiver"]}, {"t", body["t"]}, {"values", pin}};
  const auto p = post("/predict", pred.dump());
  ASSERT_EQ(p->status, 200) << p->body;
  EXPECT_EQ(json::parse(w->body)["draws"], json::parse(p->body)["draws"]);
}

TEST_F(ServiceTest, RejectsBadRequests) {
  auto body = whatif_body();
  body["pinning"] = {{cov::kDown, 2}};
  auto r = post("/whatif", body.dump());
  EXPECT_EQ(r->status, 422);
  EXPECT_EQ(json::parse(r->body)["errors"][0]["field"], std::string("pinning.") + cov::kDown);
  body = whatif_body();
  body["t"] = -1.0;
  r = post("/whatif", body.dump());
  EXPECT_EQ(r->status, 422);
  EXPECT_EQ(json::parse(r->body)["errors"][0]["field"], "t");
  body = whatif_body();
  body["play_id"] = 424242;
  EXPECT_EQ(post("/whatif", body.dump())->status, 404);
  body = whatif_body();
  body.erase("receiver");
  EXPECT_EQ(post("/whatif", body.dump())->status, 422);
  EXPECT_EQ(post("/whatif", "{oops")->status, 400);
  EXPECT_EQ(post("/predict", json{{"values", {{cov::kDown, 1}}}}.dump())->status, 422);
}

TEST(ServiceSeparation, PinnedSeparationMovesTheEstimate) {
  const EhcpService svc(separation_file(), bundle());
  const auto& p = bundle().plays.front();
  json body = {{"game_id", p.meta.key.game_id}, {"play_id", p.meta.key.play_id},
               {"receiver", p.route_runners().front().value}, {"t", 1.0}, {"m", 10}};
  body["pinning"] = {{cov::kSeparationArrival, 0.0}};
  const auto close = svc.handle("POST", "/whatif", {}, body.dump());
  body["pinning"] = {{cov::kSeparationArrival, 10.0}};
  const auto open = svc.handle("POST", "/whatif", {}, body.dump());
  ASSERT_EQ(close.status, 200);
  EXPECT_NEAR(close.body["mean"].get<double>(), (sigmoid(-1.0) + sigmoid(-0.8)) / 2, 1e-12);
  EXPECT_NEAR(open.body["mean"].get<double>(), (sigmoid(4.0) + sigmoid(3.2)) / 2, 1e-12);
  EXPECT_EQ(svc.handle("GET", "/model/importance", {}, "").status, 422);
}
