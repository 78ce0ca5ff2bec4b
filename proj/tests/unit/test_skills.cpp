#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "truelearn/error.hpp"
#include "truelearn/skills.hpp"

using namespace truelearn;

TEST_CASE("skills are initialised once from the prior") {
  LearnerState s;
  auto& k = get_or_init_skill(s, 5, 0.1, 2.0);
  CHECK(k.mean == 0.1);
  CHECK(k.variance == 2.0);
  k.mean = 3.0;
  CHECK(get_or_init_skill(s, 5, 0.0, 1.0).mean == 3.0);
  CHECK_THROWS_AS(get_or_init_skill(s, 6, 0.0, 0.0), Error);
}

TEST_CASE("event counters") {
  LearnerState s;
  EngagementEvent ev;
  ev.kcs = {{1, 0.5}, {2, 0.4}};
  ev.label = 1;
  s.record_event(ev);
  ev.label = 0;
  ev.kcs = {{2, 0.4}};
  s.record_event(ev);
  CHECK(s.event_count == 2);
  CHECK(s.engagement_count == 1);
  CHECK(s.per_kc_event_count.at(2) == 2);
}

TEST_CASE("export orders by mean, then variance, then id") {
  LearnerState s;
  s.skills = {{1, {0.5, 0.2}}, {2, {0.9, 0.1}}, {3, {0.5, 0.1}}, {4, {0.5, 0.1}}, {5, {-1.0, 0.3}}};
  s.per_kc_event_count = {{2, 4}};
  const auto top = export_state(s, 4);
  REQUIRE(top.size() == 4);
  CHECK(top[0].kc_id == 2);
  CHECK(top[0].count == 4);
  CHECK(top[1].kc_id == 3);
  CHECK(top[2].kc_id == 4);
  CHECK(top[3].kc_id == 1);
  CHECK(export_state(s, 100).size() == 5);
}

TEST_CASE("state json round-trips") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> z;
  LearnerState s;
  s.user_id = 42;
  for (KcId k = 0; k < 20; ++k) {
    s.skills[k] = {z(rng), std::abs(z(rng)) + 0.01};
    s.per_kc_event_count[k] = k + 1;
  }
  s.event_count = 77;
  s.engagement_count = 30;
  CHECK(state_from_json(state_to_json(s)) == s);
  CHECK(state_from_json(nlohmann::json::parse(state_to_json(s).dump())) == s);
}

TEST_CASE("scalar accumulators reject negative mass") {
  ScalarSkillMap m;
  m.add(3, 0.5);
  m.add(3, 0.25);
  CHECK(m.value(3) == 0.75);
  CHECK(m.value(4) == 0.0);
  CHECK_THROWS_AS(m.add(3, -1.0), Error);
}

TEST_CASE("shorter exports are prefixes of longer ones") {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> coarse(0, 4);
  for (int trial = 0; trial < 30; ++trial) {
    LearnerState s;
    // Coarse values force ties so the tie-break order is exercised.
    for (KcId k = 0; k < 25; ++k) s.skills[k] = {0.25 * coarse(rng), 0.1 + 0.1 * coarse(rng)};
    const auto full = export_state(s, 25);
    CHECK_THROWS_AS(export_state(s, 0), Error);
    for (std::size_t k = 1; k <= 25; ++k) {
      const auto part = export_state(s, k);
      REQUIRE(part.size() == k);
      for (std::size_t i = 0; i < k; ++i) CHECK(part[i].kc_id == full[i].kc_id);
    }
  }
}
