#pragma once

// Learner-state containers shared by the learning algorithms. They hold
// state only; the update rules live in learners.hpp.

#include <cstdint>
#include <map>
#include <vector>

#include <json.hpp>

#include "truelearn/data_model.hpp"

namespace truelearn {

inline constexpr double kVarianceFloor = 1e-9;

/// Gaussian belief N(mean, variance) over one knowledge component.
struct GaussianSkill {
  double mean = 0.0;
  double variance = 1.0;

  bool operator==(const GaussianSkill&) const = default;
};

/// The open learner model: one Gaussian per KC plus engagement counters.
struct LearnerState {
  UserId user_id = 0;
  std::map<KcId, GaussianSkill> skills;
  std::int64_t event_count = 0;
  std::int64_t engagement_count = 0;
  std::map<KcId, std::int64_t> per_kc_event_count;

  bool operator==(const LearnerState&) const = default;

  /// Bumps the counters for one observed event.
  void record_event(const EngagementEvent& ev);
};

/// Returns the skill for `kc`, inserting N(init_mean, init_variance) on first use.
GaussianSkill& get_or_init_skill(LearnerState& state, KcId kc, double init_mean, double init_variance);

struct SkillSummary {
  KcId kc_id = 0;
  double mean = 0.0;
  double variance = 0.0;
  std::int64_t count = 0;

  bool operator==(const SkillSummary&) const = default;
};

/// Top-k skills by mean; ties go to lower variance, then lower kc id.
std::vector<SkillSummary> export_state(const LearnerState& state, std::size_t top_k);

/// Snapshot {user_id, skills: [{kc_id, mean, variance, count}], event_count, engagement_count}.
nlohmann::json state_to_json(const LearnerState& state);
LearnerState state_from_json(const nlohmann::json& j);

/// Bernoulli mastery probability of one KC.
struct BernoulliSkill {
  double mastery = 0.0;
};

using BernoulliSkillMap = std::map<KcId, BernoulliSkill>;

/// Non-negative per-KC accumulators of the term-frequency baselines.
struct ScalarSkillMap {
  std::map<KcId, double> values;

  double value(KcId kc) const;
  void add(KcId kc, double amount);
};

}  // namespace truelearn
