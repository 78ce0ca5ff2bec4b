#include "truelearn/skills.hpp"

#include <algorithm>

#include <json.hpp>

#include "truelearn/error.hpp"

namespace truelearn {

void LearnerState::record_event(const EngagementEvent& ev) {
  ++event_count;
  engagement_count += ev.label == 1;
  for (const auto& kc : ev.kcs) ++per_kc_event_count[kc.kc_id];
}

GaussianSkill& get_or_init_skill(LearnerState& state, KcId kc, double init_mean, double init_variance) {
  if (!(init_variance > 0.0)) throw Error(ErrorKind::InvalidArgument, "initial variance must be positive");
  auto [it, _] = state.skills.try_emplace(kc, GaussianSkill{init_mean, init_variance});
  return it->second;
}

std::vector<SkillSummary> export_state(const LearnerState& state, std::size_t top_k) {
  if (top_k < 1) throw Error(ErrorKind::InvalidArgument, "top_k must be >= 1");
  std::vector<SkillSummary> rows;
  rows.reserve(state.skills.size());
  for (const auto& [kc, skill] : state.skills) {
    auto count_it = state.per_kc_event_count.find(kc);
    rows.push_back({kc, skill.mean, skill.variance,
                    count_it == state.per_kc_event_count.end() ? 0 : count_it->second});
  }
  const auto k = std::min(top_k, rows.size());
  std::partial_sort(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(k), rows.end(),
                    [](const SkillSummary& a, const SkillSummary& b) {
                      if (a.mean != b.mean) return a.mean > b.mean;
                      if (a.variance != b.variance) return a.variance < b.variance;
                      return a.kc_id < b.kc_id;
                    });
  rows.resize(k);
  return rows;
}

nlohmann::json state_to_json(const LearnerState& state) {
  nlohmann::json skills = nlohmann::json::array();
  for (const auto& [kc, skill] : state.skills) {
    auto count_it = state.per_kc_event_count.find(kc);
    skills.push_back({{"kc_id", kc},
                      {"mean", skill.mean},
                      {"variance", skill.variance},
                      {"count", count_it == state.per_kc_event_count.end() ? 0 : count_it->second}});
  }
  return {{"user_id", state.user_id},
          {"skills", std::move(skills)},
          {"event_count", state.event_count},
          {"engagement_count", state.engagement_count}};
}

LearnerState state_from_json(const nlohmann::json& j) {
  LearnerState state;
  try {
    state.user_id = j.at("user_id").get<UserId>();
    state.event_count = j.at("event_count").get<std::int64_t>();
    state.engagement_count = j.at("engagement_count").get<std::int64_t>();
    for (const auto& s : j.at("skills")) {
      const auto kc = s.at("kc_id").get<KcId>();
      const auto variance = s.at("variance").get<double>();
      if (!(variance > 0.0)) throw Error(ErrorKind::InvalidArgument, "skill variance must be positive");
      state.skills[kc] = {s.at("mean").get<double>(), variance};
      // Counts are only stored for KCs the learner actually saw.
      if (const auto count = s.value("count", std::int64_t{0}); count > 0) state.per_kc_event_count[kc] = count;
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("bad learner state: ") + e.what());
  }
  if (state.engagement_count > state.event_count)
    throw Error(ErrorKind::InvalidArgument, "engagement_count exceeds event_count");
  return state;
}

double ScalarSkillMap::value(KcId kc) const {
  auto it = values.find(kc);
  return it == values.end() ? 0.0 : it->second;
}

void ScalarSkillMap::add(KcId kc, double amount) {
  if (amount < 0.0) throw Error(ErrorKind::InvalidArgument, "accumulators only grow");
  values[kc] += amount;
}

}  // namespace truelearn
