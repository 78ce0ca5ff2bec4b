#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <random>
#include <set>

#include "oracles.hpp"
#include "truelearn/error.hpp"
#include "truelearn/config.hpp"
#include "truelearn/learners.hpp"

using namespace truelearn;

namespace {

EngagementEvent event(std::vector<KcSlot> kcs, int label = 1, FragmentId frag = {}) {
  EngagementEvent ev;
  ev.fragment = frag;
  ev.kcs = std::move(kcs);
  ev.label = label;
  return ev;
}

oracle::Game game_of(Outcome o) {
  return o == Outcome::Win ? oracle::Game::Win : o == Outcome::Loss ? oracle::Game::Loss : oracle::Game::Draw;
}

}  // namespace

TEST_CASE("truncated update matches numerical integration") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> mu(-3.0, 3.0), logvar(std::log(0.05), std::log(300.0)),
      margin(0.01, 3.0), beta(0.1, 2.0);
  for (int i = 0; i < 60; ++i) {
    const double m = mu(rng), v = std::exp(logvar(rng)), b = beta(rng), eps = margin(rng);
    for (auto outcome : {Outcome::Win, Outcome::Loss, Outcome::Draw}) {
      const double e = outcome == Outcome::Draw ? eps : (i % 2 ? eps : 0.0);
      const auto post = truncated_gaussian_update(m, v, 2 * b * b, outcome, e);
      const auto ref = oracle::integrate_posterior(m, v, 2 * b * b, game_of(outcome), e);
      CAPTURE(m);
      CAPTURE(v);
      CAPTURE(b);
      CAPTURE(e);
      CHECK_FALSE(post.underflow);
      CHECK(std::abs(post.mean - ref.mean) <= 1e-3);
      CHECK(std::abs(post.variance - ref.variance) <= 1e-3);
      CHECK(post.variance < v);
      CHECK(post.variance > 0.0);
    }
  }
}

TEST_CASE("truncated update examples") {
  const auto draw = truncated_gaussian_update(0.0, 1.0, 0.5, Outcome::Draw, 0.7);
  CHECK(draw.mean == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(draw.variance < 1.0);
  CHECK(truncated_gaussian_update(0.0, 1.0, 0.5, Outcome::Win, 0.0).mean > 0.0);
  CHECK(truncated_gaussian_update(0.0, 1.0, 0.5, Outcome::Loss, 0.0).mean < 0.0);
  // Far tail: a surprising loss still gives a finite, shrunken posterior.
  const auto tail = truncated_gaussian_update(30.0, 0.05, 0.02, Outcome::Loss, 0.0);
  CHECK(std::isfinite(tail.mean));
  CHECK(tail.variance > 0.0);
  CHECK_THROWS_AS(truncated_gaussian_update(0.0, 0.0, 1.0, Outcome::Win, 0.0), Error);
  CHECK_THROWS_AS(truncated_gaussian_update(0.0, 1.0, 1.0, Outcome::Draw, 0.0), Error);
}

TEST_CASE("draw margin inverts the draw probability") {
  for (double p : {0.1, 0.52, 0.9}) {
    for (int n : {2, 4, 10}) {
      const double beta = 0.42;
      const double eps = draw_margin(p, beta, n);
      const double c = std::sqrt(n) * beta;
      CHECK(oracle::draw_probability(0.0, c, eps) == doctest::Approx(p).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(draw_margin(0.5, 0.42, 1), Error);
  CHECK_THROWS_AS(draw_margin(1.0, 0.42, 2), Error);
}

TEST_CASE("interest prediction and learning") {
  TrueSkillParams p = TrueSkillParams::interest_defaults();
  LearnerState s;
  const auto ev = event({{1, 0.6}});
  CHECK(interest_predict_proba(s, p, ev) < 0.5);

  TrueSkillParams zero_content = p;
  zero_content.content_scale = 0.0;
  CHECK(interest_predict_proba(s, zero_content, ev) == doctest::Approx(0.5));

  const double fresh = interest_predict_proba(s, p, ev);
  for (int i = 0; i < 10; ++i) interest_fit(s, p, ev);
  CHECK(interest_predict_proba(s, p, ev) > fresh);
  CHECK(s.event_count == 10);
  CHECK(s.skills.at(1).variance < p.init_variance);
}

TEST_CASE("interest fit equals the single-KC truncated update") {
  TrueSkillParams p;
  p.beta = 0.7;
  p.init_variance = 2.0;
  LearnerState s;
  const auto ev = event({{3, 0.4}}, 0);
  interest_fit(s, p, ev);
  // Team difference t = s - c, so the update on s is the update on t shifted by c.
  const auto ref = truncated_gaussian_update(-0.4, 2.0, 2 * 0.49, Outcome::Loss, 0.0);
  CHECK(s.skills.at(3).mean == doctest::Approx(ref.mean + 0.4).epsilon(1e-12));
  CHECK(s.skills.at(3).variance == doctest::Approx(ref.variance).epsilon(1e-12));
}

TEST_CASE("novelty draw pulls the learner toward the content") {
  TrueSkillParams p = TrueSkillParams::novelty_defaults();
  LearnerState s;
  const auto ev = event({{1, 0.9}}, 1);
  novelty_fit(s, p, ev);
  CHECK(s.skills.at(1).mean > 0.0);
  CHECK(s.skills.at(1).mean < 0.9);
  CHECK(s.skills.at(1).variance < p.init_variance);

  // Symmetric case: content at the learner mean.
  LearnerState sym;
  novelty_fit(sym, p, event({{1, 0.0}}, 1));
  CHECK(sym.skills.at(1).mean == doctest::Approx(0.0));
  CHECK(sym.skills.at(1).variance < p.init_variance);
}

TEST_CASE("novelty single-KC fit matches integration oracle") {
  TrueSkillParams p = TrueSkillParams::novelty_defaults();
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> cov(0.05, 1.0);
  for (int i = 0; i < 20; ++i) {
    const double c = cov(rng);
    const int label = i % 2;
    LearnerState s;
    novelty_fit(s, p, event({{1, c}}, label));
    const double eps = draw_margin(p.draw_probability, p.beta, 2);
    // Non-engagement with the learner below the content: the content wins.
    const auto g = label == 1 ? oracle::Game::Draw : oracle::Game::Loss;
    const auto ref = oracle::integrate_posterior(-c, p.init_variance, 2 * p.beta * p.beta, g, eps);
    CHECK(std::abs(s.skills.at(1).mean - (ref.mean + c)) <= 1e-3);
    CHECK(std::abs(s.skills.at(1).variance - ref.variance) <= 1e-3);
  }
}

TEST_CASE("novelty predictive probability") {
  TrueSkillParams p = TrueSkillParams::novelty_defaults();
  LearnerState s;
  const auto at_mean = novelty_predict_proba(s, p, event({{1, 0.0}}));
  for (double c : {0.1, 0.5, 1.0}) CHECK(novelty_predict_proba(s, p, event({{1, c}})) < at_mean);
  const double eps = draw_margin(p.draw_probability, p.beta, 2);
  const double spread = std::sqrt(p.init_variance + 2 * p.beta * p.beta);
  CHECK(at_mean == doctest::Approx(oracle::draw_probability(0.0, spread, eps)).epsilon(1e-12));

  TrueSkillParams far = p;
  far.content_scale = 1e6;
  CHECK(novelty_predict_proba(s, far, event({{1, 1.0}})) <= 1e-11);
  TrueSkillParams wide = p;
  wide.draw_probability = 1.0 - 1e-15;
  CHECK(novelty_predict_proba(s, wide, event({{1, 0.3}})) > 0.99);
}

TEST_CASE("ink combiner and weight recurrence") {
  CHECK(ink_combine({1.0, 1.0}, 0.9, 0.1) == doctest::Approx(0.5));

  InkParams frozen;
  frozen.tau = 0.0;
  frozen.greedy = false;
  InkWeights w;
  for (int i = 0; i < 10; ++i) ink_update(w, frozen, 0.9, 0.1, i % 2);
  CHECK(w.interest == 1.0);
  CHECK(w.novelty == 1.0);

  // Interest always right, novelty always wrong: the ratio climbs whenever
  // an update fires, following w <- w exp(-tau |p - y|).
  InkParams meta;
  meta.tau = 0.5;
  std::mt19937_64 rng(4);
  std::bernoulli_distribution coin;
  InkWeights live;
  double ref_i = 1.0, ref_n = 1.0;
  double ratio = 1.0;
  for (int i = 0; i < 20; ++i) {
    const int y = coin(rng);
    const double pi = y ? 0.8 : 0.2;
    const double pn = y ? 0.3 : 0.6;
    const bool wrong = ((ref_i * pi + ref_n * pn) / (ref_i + ref_n) >= 0.5 ? 1 : 0) != y;
    const bool fired = ink_update(live, meta, pi, pn, y);
    CHECK(fired == wrong);
    if (wrong) {
      ref_i *= std::exp(-0.5 * std::abs(pi - y));
      ref_n *= std::exp(-0.5 * std::abs(pn - y));
      CHECK(live.interest / live.novelty > ratio);
      ratio = live.interest / live.novelty;
    }
    CHECK(live.interest == doctest::Approx(ref_i).epsilon(1e-14));
    CHECK(live.novelty == doctest::Approx(ref_n).epsilon(1e-14));
  }
}

TEST_CASE("ink model always fits both sub-models") {
  InkModel ink;
  const auto ev = event({{1, 0.5}}, 1);
  for (int i = 0; i < 5; ++i) ink.fit(ev);
  CHECK(ink.interest().learner_state()->event_count == 5);
  CHECK(ink.novelty().learner_state()->event_count == 5);
  CHECK(ink.learner_state() == ink.novelty().learner_state());
  const auto fresh = ink.fresh();
  CHECK(fresh->predict_proba(ev) == doctest::Approx(InkModel().predict_proba(ev)));
}

TEST_CASE("knowledge tracing") {
  KtParams p;
  BernoulliSkillMap s;
  CHECK(kt_predict_proba(s, p, event({{1, 0.5}})) == doctest::Approx(0.2));
  double prev = 0.0;
  for (int i = 0; i < 30; ++i) {
    kt_fit(s, p, event({{1, 0.5}}, 1));
    CHECK(s.at(1).mastery >= prev);
    prev = s.at(1).mastery;
  }
  CHECK(prev > 0.99);

  // Hand-computed posterior: pi = 0.5, label 0.
  BernoulliSkillMap h{{7, {0.5}}};
  kt_fit(h, p, event({{7, 0.1}}, 0));
  const double post = 0.5 * 0.1 / (0.5 * 0.1 + 0.5 * 0.8);
  CHECK(h.at(7).mastery == doctest::Approx(post + (1 - post) * 0.1).epsilon(1e-14));

  KtParams bad;
  bad.p_slip = 0.6;
  bad.p_guess = 0.5;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("similarity identities against dense oracles") {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> nkc(1, 5), id(0, 12);
  std::uniform_real_distribution<double> cov(0.01, 1.0);
  auto random_event = [&] {
    EngagementEvent ev;
    std::set<KcId> used;
    for (int k = nkc(rng); k > 0; --k)
      if (KcId kc = id(rng); used.insert(kc).second) ev.kcs.push_back({kc, cov(rng)});
    return ev;
  };
  for (int i = 0; i < 300; ++i) {
    const auto a = random_event(), b = random_event();
    CHECK(coverage_cosine(a, a) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(concept_jaccard(a, a) == 1.0);
    CHECK(coverage_cosine(a, b) == doctest::Approx(coverage_cosine(b, a)).epsilon(1e-14));
    CHECK(concept_jaccard(a, b) == concept_jaccard(b, a));
    CHECK(std::abs(coverage_cosine(a, b) - oracle::dense_cosine(a, b)) <= 1e-12);
    CHECK(std::abs(concept_jaccard(a, b) - oracle::set_jaccard(a, b)) <= 1e-12);
  }
  CHECK(coverage_cosine(event({{1, 0.0}}), event({{1, 0.5}})) == 0.0);
}

TEST_CASE("pairwise baselines") {
  CosineModel cos(0.5, 0);
  const auto a = event({{1, 0.5}, {2, 0.5}});
  const auto b = event({{3, 0.5}});
  CHECK(cos.predict_proba(a) == 0.0);  // first event -> configured label
  cos.fit(a);
  CHECK(cos.predict(a) == 1);
  CHECK(cos.predict(b) == 0);
  CHECK(*cos.score(a) == doctest::Approx(1.0));
  CHECK_FALSE(cos.fresh()->predict(a));

  JaccardConceptModel jac(0.2, 1);
  CHECK(jac.predict(a) == 1);
  jac.fit(a);
  CHECK(jac.predict(event({{1, 0.9}, {4, 0.1}, {5, 0.1}})) == 1);  // J = 1/4
  CHECK(jac.predict(event({{1, 0.9}, {4, 0.1}, {5, 0.1}, {6, 0.1}, {7, 0.1}})) == 0);  // J = 1/6
}

TEST_CASE("user jaccard table matches a brute-force count") {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> frag(0, 9), user(0, 19);
  std::vector<EngagementEvent> events;
  for (int i = 0; i < 120; ++i) {
    auto ev = event({{1, 0.5}}, 1, {frag(rng), 1, 1});
    ev.user_id = user(rng);
    ev.timestamp = i;
    events.push_back(ev);
  }
  const auto ds = group_sessions(events);
  const UserJaccardTable table(ds);
  std::map<std::int64_t, std::set<UserId>> viewers;
  for (const auto& ev : events) viewers[ev.fragment.lecture_id].insert(ev.user_id);
  for (int a = 0; a < 10; ++a) {
    for (int b = 0; b < 10; ++b) {
      std::size_t both = 0;
      std::set<UserId> all = viewers[a];
      all.insert(viewers[b].begin(), viewers[b].end());
      for (auto u : all) both += viewers[a].count(u) && viewers[b].count(u);
      const double expected = all.empty() ? 0.0 : static_cast<double>(both) / all.size();
      CHECK(table.similarity({a, 1, 1}, {b, 1, 1}) == doctest::Approx(expected).epsilon(1e-15));
    }
  }
  CHECK(table.similarity({99, 1, 1}, {0, 1, 1}) == 0.0);
  for (const auto& [pair, s] : table.dense_table()) CHECK(s == table.similarity(pair.first, pair.second));

  JaccardUserModel model(std::make_shared<UserJaccardTable>(table), 0.1, 1);
  CHECK(model.predict(events[0]) == 1);
  CHECK_THROWS_AS(JaccardUserModel(nullptr), Error);
}

TEST_CASE("term-frequency baselines accumulate on engaged events only") {
  TfModel tf(TfMode::Binary, 1.0);
  const auto ev = event({{1, 0.4}, {2, 0.6}}, 1);
  CHECK(tf.predict(ev) == 0);
  tf.fit(event({{1, 0.4}}, 0));
  CHECK(tf.accumulators().value(1) == 0.0);
  tf.fit(ev);
  CHECK(tf_score(tf.accumulators(), ev) == doctest::Approx(1.0));
  CHECK(tf.predict(ev) == 1);

  TfModel tc(TfMode::Cosine, 0.5);
  tc.fit(ev);
  CHECK(tf_score(tc.accumulators(), ev) == doctest::Approx(0.5));
  CHECK(tc.predict(ev) == 1);
  CHECK(tc.fresh()->predict(ev) == 0);
}

TEST_CASE("fresh models carry hyperparameters but no state") {
  TrueSkillParams p = TrueSkillParams::novelty_defaults();
  p.beta = 0.3;
  NoveltyModel m(p);
  m.fit(event({{1, 0.5}}));
  auto f = m.fresh();
  CHECK(f->learner_state()->skills.empty());
  CHECK(dynamic_cast<NoveltyModel&>(*f).params().beta == 0.3);
  CHECK_THROWS_AS(NoveltyModel([] {
                    TrueSkillParams bad;
                    bad.beta = -1.0;
                    return bad;
                  }()),
                  Error);
}

TEST_CASE("properties over random sessions") {
  std::mt19937_64 rng(606);
  std::uniform_int_distribution<int> nkc(1, 5), id(0, 9), bit(0, 1);
  std::uniform_real_distribution<double> cov(0.0, 1.0);
  auto random_event = [&] {
    std::vector<KcSlot> kcs;
    std::set<KcId> used;
    for (int k = nkc(rng); k > 0; --k)
      if (KcId kc = id(rng); used.insert(kc).second) kcs.push_back({kc, cov(rng)});
    return event(kcs, bit(rng));
  };

  for (int trial = 0; trial < 40; ++trial) {
    std::vector<EngagementEvent> session;
    for (int i = 0; i < 30; ++i) session.push_back(random_event());
    auto shuffled = session;
    for (auto& ev : shuffled) std::shuffle(ev.kcs.begin(), ev.kcs.end(), rng);

    for (const char* name : {"interest", "novelty", "ink", "kt", "cosine", "jaccard-c", "tf-binary", "tf-cosine"}) {
      CAPTURE(name);
      ModelConfig cfg;
      cfg.set("model", name);
      auto a = make_model(cfg);
      auto b = make_model(cfg);
      for (std::size_t i = 0; i < session.size(); ++i) {
        const double p = a->predict_proba(session[i]);
        if (std::string_view(name) == "interest" || std::string_view(name) == "novelty" ||
            std::string_view(name) == "ink" || std::string_view(name) == "kt") {
          CHECK(p > 0.0);
          CHECK(p < 1.0);
          CHECK(a->predict(session[i]) == (p >= 0.5 ? 1 : 0));
        }
        // Slot order within an event does not matter.
        CHECK(a->predict_proba(session[i]) == doctest::Approx(b->predict_proba(shuffled[i])).epsilon(1e-12));
        const LearnerState before = a->learner_state() ? *a->learner_state() : LearnerState{};
        a->fit(session[i]);
        b->fit(shuffled[i]);
        if (const auto* s = a->learner_state()) {
          for (const auto& [kc, skill] : s->skills) {
            CHECK(skill.variance > 0.0);
            if (auto it = before.skills.find(kc); it != before.skills.end())
              CHECK(skill.variance <= it->second.variance);
          }
        }
      }
    }

    BernoulliSkillMap kt;
    KtParams kp;
    for (const auto& ev : session) {
      kt_fit(kt, kp, ev);
      for (const auto& [_, m] : kt) {
        CHECK(m.mastery >= 0.0);
        CHECK(m.mastery <= 1.0);
      }
    }

    InkModel ink;
    for (const auto& ev : session) {
      const double pi = ink.interest().predict_proba(ev);
      const double pn = ink.novelty().predict_proba(ev);
      const double p = ink.predict_proba(ev);
      CHECK(p >= std::min(pi, pn) - 1e-15);
      CHECK(p <= std::max(pi, pn) + 1e-15);
      ink.fit(ev);
    }
  }
}
