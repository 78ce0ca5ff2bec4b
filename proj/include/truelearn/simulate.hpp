#pragma once

// Synthetic learners whose engagement follows the novelty draw likelihood.
// Skills are static over a session so recovery stays identifiable.

#include <cstdint>
#include <filesystem>
#include <map>
#include <vector>

#include <json.hpp>

#include "truelearn/data_model.hpp"

namespace truelearn {

struct SyntheticConfig {
  std::int64_t n_learners = 1000;
  std::int64_t n_kcs = 20;
  std::int64_t n_fragments = 300;
  std::int64_t events_per_learner = 50;
  std::int64_t kcs_per_fragment = 1;
  double true_beta = 0.42;
  double true_draw_probability = 0.8;
  double skill_mean = 0.0;
  double skill_variance = 0.25;
  double coverage_min = 0.2;
  double coverage_max = 1.0;
  /// Share of learners placed in the test split.
  double test_fraction = 0.3;
  std::uint64_t seed = 42;

  void validate() const;
};

struct SyntheticFragment {
  FragmentId id;
  std::vector<KcSlot> kcs;
};

struct SyntheticData {
  Dataset train;
  Dataset test;
  std::vector<SyntheticFragment> fragments;
  /// Hidden ground truth: learner -> kc -> skill.
  std::map<UserId, std::map<KcId, double>> true_skills;
};

/// Probability that a learner with the given skills draws with the fragment
/// (engages), using performance noise beta per performance.
double true_engagement_probability(const std::map<KcId, double>& skills, const std::vector<KcSlot>& kcs, double beta,
                                   double draw_probability);

SyntheticData generate(const SyntheticConfig& config);

nlohmann::json ground_truth_json(const SyntheticConfig& config, const SyntheticData& data);

/// Writes train.csv, test.csv and ground_truth.json into `dir`.
void write_synthetic(const std::filesystem::path& dir, const SyntheticConfig& config, const SyntheticData& data);

}  // namespace truelearn
