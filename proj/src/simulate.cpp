#include "truelearn/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "truelearn/error.hpp"
#include "truelearn/learners.hpp"
#include "truelearn/normal.hpp"

namespace truelearn {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Independent sub-stream per learner, so generation order never matters.
std::mt19937_64 stream(std::uint64_t seed, std::uint64_t salt) { return std::mt19937_64(splitmix64(seed ^ splitmix64(salt))); }

constexpr std::uint64_t kFragmentSalt = 0xF4A6'0000'0000'0001ULL;

}  // namespace

void SyntheticConfig::validate() const {
  if (n_learners < 1 || n_kcs < 1 || n_fragments < 1 || events_per_learner < 1)
    throw Error(ErrorKind::InvalidArgument, "synthetic counts must be >= 1");
  if (kcs_per_fragment < 1 || kcs_per_fragment > static_cast<std::int64_t>(kMaxKcSlots) || kcs_per_fragment > n_kcs)
    throw Error(ErrorKind::InvalidArgument, "kcs_per_fragment must lie in [1, min(5, n_kcs)]");
  if (!(true_beta > 0.0)) throw Error(ErrorKind::InvalidArgument, "true_beta must be positive");
  if (!(true_draw_probability > 0.0 && true_draw_probability < 1.0))
    throw Error(ErrorKind::InvalidArgument, "true_draw_probability must lie in (0,1)");
  if (!(skill_variance > 0.0)) throw Error(ErrorKind::InvalidArgument, "skill_variance must be positive");
  if (!(coverage_min >= 0.0 && coverage_min <= coverage_max && coverage_max <= 1.0))
    throw Error(ErrorKind::InvalidArgument, "coverage range must lie within [0,1]");
  if (!(test_fraction >= 0.0 && test_fraction < 1.0))
    throw Error(ErrorKind::InvalidArgument, "test_fraction must lie in [0,1)");
}

double true_engagement_probability(const std::map<KcId, double>& skills, const std::vector<KcSlot>& kcs, double beta,
                                   double draw_probability) {
  double diff = 0.0;
  for (const auto& kc : kcs) diff += skills.at(kc.kc_id) - kc.coverage;
  const int n = 2 * static_cast<int>(kcs.size());
  const double spread = std::sqrt(static_cast<double>(n)) * beta;
  const double margin = draw_margin(draw_probability, beta, n);
  return normal::interval_probability((-margin - diff) / spread, (margin - diff) / spread);
}

SyntheticData generate(const SyntheticConfig& config) {
  config.validate();
  SyntheticData data;

  auto frag_rng = stream(config.seed, kFragmentSalt);
  std::uniform_real_distribution<double> coverage(config.coverage_min, config.coverage_max);
  std::vector<KcId> all_kcs(static_cast<std::size_t>(config.n_kcs));
  std::iota(all_kcs.begin(), all_kcs.end(), KcId{0});
  data.fragments.reserve(static_cast<std::size_t>(config.n_fragments));
  for (std::int64_t f = 0; f < config.n_fragments; ++f) {
    SyntheticFragment frag;
    frag.id = {f / 4, 1, f % 4 + 1};
    std::vector<KcId> chosen;
    std::sample(all_kcs.begin(), all_kcs.end(), std::back_inserter(chosen), config.kcs_per_fragment, frag_rng);
    std::shuffle(chosen.begin(), chosen.end(), frag_rng);
    for (auto kc : chosen) frag.kcs.push_back({kc, coverage(frag_rng)});
    data.fragments.push_back(std::move(frag));
  }

  const auto n_test = static_cast<std::int64_t>(std::llround(config.test_fraction * static_cast<double>(config.n_learners)));
  const auto n_train = config.n_learners - n_test;
  std::normal_distribution<double> skill_dist(config.skill_mean, std::sqrt(config.skill_variance));
  std::uniform_int_distribution<std::size_t> pick(0, data.fragments.size() - 1);
  std::uniform_int_distribution<Timestamp> gap(60, 3600);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<EngagementEvent> train_events;
  std::vector<EngagementEvent> test_events;
  for (std::int64_t learner = 0; learner < config.n_learners; ++learner) {
    auto rng = stream(config.seed, static_cast<std::uint64_t>(learner));
    auto& skills = data.true_skills[learner];
    for (auto kc : all_kcs) skills[kc] = skill_dist(rng);

    auto& sink = learner < n_train ? train_events : test_events;
    Timestamp t = gap(rng);
    for (std::int64_t e = 0; e < config.events_per_learner; ++e) {
      const auto& frag = data.fragments[pick(rng)];
      const double p = true_engagement_probability(skills, frag.kcs, config.true_beta, config.true_draw_probability);
      sink.push_back({frag.id, t, learner, frag.kcs, unit(rng) < p ? 1 : 0});
      t += gap(rng);
    }
  }
  data.train = group_sessions(std::move(train_events));
  data.test = group_sessions(std::move(test_events));
  return data;
}

nlohmann::json ground_truth_json(const SyntheticConfig& config, const SyntheticData& data) {
  nlohmann::json learners = nlohmann::json::array();
  for (const auto& [user, skills] : data.true_skills) {
    nlohmann::json s = nlohmann::json::array();
    for (const auto& [kc, value] : skills) s.push_back({{"kc_id", kc}, {"skill", value}});
    learners.push_back({{"user_id", user}, {"skills", std::move(s)}});
  }
  return {{"config",
           {{"n_learners", config.n_learners},
            {"n_kcs", config.n_kcs},
            {"n_fragments", config.n_fragments},
            {"events_per_learner", config.events_per_learner},
            {"kcs_per_fragment", config.kcs_per_fragment},
            {"true_beta", config.true_beta},
            {"true_draw_probability", config.true_draw_probability},
            {"skill_mean", config.skill_mean},
            {"skill_variance", config.skill_variance},
            {"test_fraction", config.test_fraction},
            {"seed", config.seed}}},
          {"learners", std::move(learners)}};
}

void write_synthetic(const std::filesystem::path& dir, const SyntheticConfig& config, const SyntheticData& data) {
  std::filesystem::create_directories(dir);
  write_events_file(dir / "train.csv", flatten(data.train));
  write_events_file(dir / "test.csv", flatten(data.test));
  std::ofstream gt(dir / "ground_truth.json");
  if (!gt) throw Error(ErrorKind::IoError, "cannot write ground_truth.json");
  gt << ground_truth_json(config, data).dump(2) << '\n';
}

}  // namespace truelearn
