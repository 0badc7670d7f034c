#include <gtest/gtest.h>

#include <algorithm>
#include <httplib.h>
#include <set>

#include "icsim/study.hpp"
#include "icsim/study_server.hpp"
#include "test_support.hpp"

namespace icsim::study {
namespace {

using features::kAllConditions;

const std::map<std::string, std::string> kTruths = {{"n1", "Truth one."}, {"n2", "Truth two."}};

std::vector<StudyCandidate> all_candidates() {
  std::vector<StudyCandidate> out;
  for (const auto& [novel, truth] : kTruths) {
    for (ConditionId c : kAllConditions) {
      const std::string tag = novel + "/" + std::string(features::slug(c));
      out.push_back({novel, "m-b", c, 3.0, 0.4, "b " + tag});
      out.push_back({novel, "m-a", c, 2.0, 0.3, "a " + tag});
    }
  }
  return out;
}

TEST(Build, OneItemPerNovelConditionPlusChecks) {
  const auto d = build_study(all_candidates(), kTruths);
  ASSERT_EQ(d.items.size(), 22u + 2u);
  std::set<std::string> ids;
  std::size_t checks = 0;
  for (const auto& it : d.items) {
    ids.insert(it.id);
    if (it.attention_check) {
      ++checks;
      EXPECT_NE(it.novel_id, it.candidate_novel_id);
      EXPECT_EQ(it.truth, kTruths.at(it.novel_id));
    } else {
      EXPECT_EQ(it.model_id, "m-b");
      EXPECT_EQ(it.candidate.rfind("b " + it.novel_id, 0), 0u);
    }
    EXPECT_EQ(it.id.find(it.novel_id), std::string::npos);
  }
  EXPECT_EQ(checks, 2u);
  EXPECT_EQ(ids.size(), d.items.size());
  EXPECT_EQ(StudyDefinition::from_json(d.to_json()).to_json(), d.to_json());
}

TEST(Build, TiesGoToTheSmallestModelId) {
  // 5 -> 1.0 rescaled; 1.0 + 0.0 ties 0.0 + 1.0 at an overall of 0.5.
  EXPECT_EQ(llm_overall(5.0, 0.0), llm_overall(1.0, 1.0));
  std::vector<StudyCandidate> cs = {{"n1", "zeta", ConditionId::kBase, 5.0, 0.0, "z"},
                                    {"n1", "alpha", ConditionId::kBase, 1.0, 1.0, "a"}};
  StudyOptions o;
  o.attention_checks = 0;
  const auto d = build_study(cs, kTruths, o);
  ASSERT_EQ(d.items.size(), 1u);
  EXPECT_EQ(d.items[0].model_id, "alpha");
}

TEST(Build, Errors) {
  EXPECT_THROW(build_study({}, kTruths), InvalidArgument);
  EXPECT_THROW(build_study({{"nX", "m", ConditionId::kBase, 3, 0.5, "t"}}, kTruths), InvalidArgument);
  // One novel cannot host an attention check.
  EXPECT_THROW(build_study({{"n1", "m", ConditionId::kBase, 3, 0.5, "t"}}, kTruths), InvalidArgument);
}

class Service : public ::testing::Test {
 protected:
  StudyDefinition def = build_study(all_candidates(), kTruths, {2, 99, 1, 2});

  static RatingRecord rating(const std::string& rater, const std::string& item, int s, int st, int o) {
    RatingRecord r;
    r.rater_id = rater;
    r.item_id = item;
    r.q_style = s;
    r.q_structure = st;
    r.q_overall = o;
    return r;
  }

  const StudyItem& item(ConditionId c, const std::string& novel) const {
    for (const auto& it : def.items) {
      if (!it.attention_check && it.condition == c && it.novel_id == novel) return it;
    }
    throw std::runtime_error("no item");
  }
  std::vector<const StudyItem*> checks() const {
    std::vector<const StudyItem*> out;
    for (const auto& it : def.items) {
      if (it.attention_check) out.push_back(&it);
    }
    return out;
  }
};

TEST_F(Service, OrderIsSeededPermutation) {
  StudyService svc(def);
  for (const std::string rater : {"r1", "r2", "someone-else"}) {
    auto order = svc.item_order(rater);
    EXPECT_EQ(order, svc.item_order(rater));
    std::sort(order.begin(), order.end());
    for (std::size_t i = 0; i < order.size(); ++i) EXPECT_EQ(order[i], i);
  }
  EXPECT_NE(svc.item_order("r1"), svc.item_order("r2"));
}

TEST_F(Service, ServesEveryItemOnceBlinded) {
  StudyService svc(def);
  const std::string r = svc.register_rater("r1");
  EXPECT_EQ(svc.register_rater("r1"), "r1");
  std::set<std::string> seen;
  std::size_t truth_first = 0;
  while (auto payload = svc.next_item(r)) {
    std::set<std::string> keys;
    for (const auto& [k, v] : payload->items()) keys.insert(k);
    EXPECT_EQ(keys, (std::set<std::string>{"item_id", "passage_a", "passage_b", "progress"}));
    const std::string id = (*payload)["item_id"];
    EXPECT_TRUE(seen.insert(id).second);
    EXPECT_EQ((*payload)["progress"]["completed"], seen.size() - 1);
    const StudyItem* it = def.find(id);
    ASSERT_NE(it, nullptr);
    const bool tf = svc.presentation(r, id) == Presentation::kTruthFirst;
    truth_first += tf;
    EXPECT_EQ((*payload)["passage_a"], tf ? it->truth : it->candidate);
    EXPECT_EQ(payload->dump().find(it->model_id), std::string::npos);
    svc.submit(rating(r, id, 3, 3, 3));
  }
  EXPECT_EQ(seen.size(), def.items.size());
  EXPECT_GT(truth_first, 0u);
  EXPECT_LT(truth_first, def.items.size());
}

TEST_F(Service, SubmitErrors) {
  StudyService svc(def);
  const std::string r = svc.register_rater("r1");
  const std::string first = (*svc.next_item(r))["item_id"];
  const std::string other = first == def.items[0].id ? def.items[1].id : def.items[0].id;
  EXPECT_THROW(svc.submit(rating(r, first, 0, 3, 3)), InvalidArgument);
  EXPECT_THROW(svc.submit(rating(r, first, 3, 6, 3)), InvalidArgument);
  EXPECT_THROW(svc.submit(rating("ghost", first, 3, 3, 3)), NotFound);
  EXPECT_THROW(svc.submit(rating(r, "no-such-item", 3, 3, 3)), NotFound);
  EXPECT_THROW(svc.submit(rating(r, other, 3, 3, 3)), Conflict);
  EXPECT_NO_THROW(svc.submit(rating(r, first, 3, 3, 3)));
  EXPECT_THROW(svc.submit(rating(r, first, 3, 3, 3)), Conflict);
  EXPECT_THROW(svc.next_item("ghost"), NotFound);
  EXPECT_THROW(svc.register_rater("has space"), InvalidArgument);
}

TEST_F(Service, AttentionChecksExcludeRaters) {
  std::vector<RatingRecord> ratings;
  const auto cs = checks();
  ratings.push_back(rating("careful", cs[0]->id, 3, 3, 1));
  ratings.push_back(rating("careful", cs[1]->id, 3, 3, 2));
  ratings.push_back(rating("careless", cs[0]->id, 3, 3, 5));
  ratings.push_back(rating("careless", cs[1]->id, 3, 3, 1));
  const auto base = item(ConditionId::kBase, "n1").id;
  ratings.push_back(rating("careful", base, 2, 2, 2));
  ratings.push_back(rating("careless", base, 5, 5, 5));
  const auto excluded = score_attention_checks(def, ratings);
  ASSERT_EQ(excluded.size(), 1u);
  EXPECT_TRUE(excluded.count("careless"));
  const auto res = aggregate_study(def, ratings);
  ASSERT_EQ(res.items.size(), 1u);
  EXPECT_EQ(res.items[0].overall, 2.0);
  EXPECT_EQ(res.gaps.size(), 21u);
}

TEST_F(Service, AggregatesItemsThenNovels) {
  std::vector<RatingRecord> ratings;
  // Two raters on Base in n1: [2, 4] -> item mean 3; n2 rated 1 by both.
  ratings.push_back(rating("a", item(ConditionId::kBase, "n1").id, 2, 2, 2));
  ratings.push_back(rating("b", item(ConditionId::kBase, "n1").id, 4, 4, 4));
  ratings.push_back(rating("a", item(ConditionId::kBase, "n2").id, 1, 1, 1));
  ratings.push_back(rating("b", item(ConditionId::kBase, "n2").id, 1, 1, 1));
  // Five raters per novel on Concept + Linguistic.
  const std::vector<std::array<int, 3>> n1 = {{3, 2, 3}, {3, 2, 3}, {4, 3, 3}, {4, 3, 3}, {4, 3, 3}};
  const std::vector<std::array<int, 3>> n2 = {{3, 2, 2}, {3, 2, 3}, {3, 3, 3}, {3, 3, 3}, {4, 3, 3}};
  for (std::size_t i = 0; i < 5; ++i) {
    const std::string rater = "r" + std::to_string(i);
    ratings.push_back(rating(rater, item(ConditionId::kConceptLinguistic, "n1").id, n1[i][0], n1[i][1], n1[i][2]));
    ratings.push_back(rating(rater, item(ConditionId::kConceptLinguistic, "n2").id, n2[i][0], n2[i][1], n2[i][2]));
  }
  const auto res = aggregate_study(def, ratings);
  const auto& base = res.conditions.at(ConditionId::kBase);
  EXPECT_DOUBLE_EQ(base.overall.mean, 2.0);
  EXPECT_DOUBLE_EQ(base.overall.stddev, 1.0);
  const auto& cl = res.conditions.at(ConditionId::kConceptLinguistic);
  EXPECT_NEAR(cl.linguistic.mean, 3.40, 1e-12);
  EXPECT_NEAR(cl.structure.mean, 2.60, 1e-12);
  EXPECT_NEAR(cl.overall.mean, 2.90, 1e-12);
  EXPECT_EQ(cl.overall.count, 2u);
  const auto j = res.to_json();
  EXPECT_EQ(j["conditions"].size(), 2u);
  EXPECT_EQ(j["gaps"].size(), 18u);
}

TEST_F(Service, LogsReplayAfterRestart) {
  testing::TempDir dir;
  std::string first;
  {
    StudyService svc(def, dir.path());
    svc.register_rater("r1");
    first = (*svc.next_item("r1"))["item_id"];
    svc.submit(rating("r1", first, 4, 4, 4));
    svc.next_item("r1");
  }
  StudyService again(def, dir.path());
  EXPECT_TRUE(again.has_rater("r1"));
  ASSERT_EQ(again.ratings().size(), 1u);
  EXPECT_EQ(again.ratings()[0].item_id, first);
  EXPECT_THROW(again.submit(rating("r1", first, 4, 4, 4)), Conflict);
  const std::string second = (*again.next_item("r1"))["item_id"];
  EXPECT_NE(second, first);
  EXPECT_NO_THROW(again.submit(rating("r1", second, 2, 2, 2)));
}

class StudyHttp : public Service {
 protected:
  void SetUp() override {
    service = std::make_unique<StudyService>(def);
    ServerOptions o;
    o.port = 0;
    o.admin_token = "secret";
    server = std::make_unique<StudyServer>(*service, o);
    const int port = server->start();
    client = std::make_unique<httplib::Client>("127.0.0.1", port);
  }
  void TearDown() override { server->stop(); }

  static nlohmann::json body(const httplib::Result& r) { return nlohmann::json::parse(r->body); }

  std::unique_ptr<StudyService> service;
  std::unique_ptr<StudyServer> server;
  std::unique_ptr<httplib::Client> client;
};

TEST_F(StudyHttp, FullRatingFlow) {
  auto health = client->Get("/api/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);

  auto meta = client->Get("/api/study");
  EXPECT_EQ(body(meta)["items"], def.items.size());
  EXPECT_TRUE(body(meta).contains("rubric"));

  auto reg = client->Post("/api/raters", R"({"rater_id": "web-1"})", "application/json");
  EXPECT_EQ(reg->status, 201);
  EXPECT_EQ(body(reg)["rater_id"], "web-1");
  auto anon = client->Post("/api/raters", "", "application/json");
  EXPECT_EQ(anon->status, 201);
  EXPECT_NE(body(anon)["rater_id"], "web-1");

  std::size_t rated = 0;
  while (true) {
    auto next = client->Get("/api/items/next?rater=web-1");
    if (next->status == 410) break;
    ASSERT_EQ(next->status, 200);
    nlohmann::json r = {{"rater_id", "web-1"},
                        {"item_id", body(next)["item_id"]},
                        {"q_style", 3},
                        {"q_structure", 2},
                        {"q_overall", 1},
                        {"justification", "fine"}};
    auto post = client->Post("/api/ratings", r.dump(), "application/json");
    ASSERT_EQ(post->status, 201) << post->body;
    EXPECT_EQ(client->Post("/api/ratings", r.dump(), "application/json")->status, 409);
    ++rated;
  }
  EXPECT_EQ(rated, def.items.size());

  EXPECT_EQ(client->Get("/api/results")->status, 403);
  auto results = client->Get("/api/results?token=secret");
  ASSERT_EQ(results->status, 200);
  EXPECT_EQ(body(results)["items"].size(), 22u);
  EXPECT_TRUE(body(results)["excluded_raters"].empty());
}

TEST_F(StudyHttp, ErrorStatuses) {
  EXPECT_EQ(client->Get("/api/items/next")->status, 400);
  EXPECT_EQ(client->Get("/api/items/next?rater=ghost")->status, 404);
  EXPECT_EQ(client->Post("/api/raters", "[1]", "application/json")->status, 400);
  EXPECT_EQ(client->Post("/api/raters", R"({"rater_id": 5})", "application/json")->status, 400);
  EXPECT_EQ(client->Post("/api/ratings", "not json", "application/json")->status, 400);
  client->Post("/api/raters", R"({"rater_id": "x"})", "application/json");
  const nlohmann::json bad = {{"rater_id", "x"}, {"item_id", def.items[0].id}, {"q_style", 9}, {"q_structure", 1},
                              {"q_overall", 1}};
  EXPECT_EQ(client->Post("/api/ratings", bad.dump(), "application/json")->status, 400);
  const nlohmann::json unserved = {{"rater_id", "x"}, {"item_id", def.items[0].id}, {"q_style", 1},
                                   {"q_structure", 1}, {"q_overall", 1}};
  EXPECT_EQ(client->Post("/api/ratings", unserved.dump(), "application/json")->status, 409);
  const nlohmann::json missing = {{"rater_id", "x"}, {"item_id", "nope"}, {"q_style", 1}, {"q_structure", 1},
                                  {"q_overall", 1}};
  EXPECT_EQ(client->Post("/api/ratings", missing.dump(), "application/json")->status, 404);
}

}  // namespace
}  // namespace icsim::study
