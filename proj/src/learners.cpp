#include "truelearn/learners.hpp"

#include <algorithm>
#include <cmath>

#include "truelearn/error.hpp"
#include "truelearn/normal.hpp"

namespace truelearn {

namespace {

constexpr double kProbabilityClamp = 1e-12;

double clamp_probability(double p) { return std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp); }

/// Multipliers of the moment-matched update of any summand of the difference
/// variable: mean += var * mean_gain, var *= 1 - var * variance_gain.
struct Correction {
  double mean_gain = 0.0;
  double variance_gain = 0.0;
  bool underflow = false;
};

Correction truncation_correction(double diff_mean, double diff_var, Outcome outcome, double margin) {
  const double c = std::sqrt(diff_var);
  const double t = diff_mean / c;
  const double m = margin / c;
  double v = 0.0;
  double w = 0.0;
  switch (outcome) {
    case Outcome::Win:
      v = normal::v_win(t, m);
      w = normal::w_win(t, m);
      break;
    case Outcome::Loss:
      v = -normal::v_win(-t, m);
      w = normal::w_win(-t, m);
      break;
    case Outcome::Draw:
      v = normal::v_draw(t, m);
      w = normal::w_draw(t, m);
      break;
  }
  if (!std::isfinite(v) || !std::isfinite(w)) return {0.0, 0.0, true};
  return {v / c, w / diff_var, false};
}

void require_kcs(const EngagementEvent& event) {
  if (event.kcs.empty()) throw Error(ErrorKind::InvalidArgument, "event has no knowledge components");
}

GaussianSkill skill_or_prior(const LearnerState& state, KcId kc, const TrueSkillParams& params) {
  auto it = state.skills.find(kc);
  return it == state.skills.end() ? GaussianSkill{params.init_mean, params.init_variance} : it->second;
}

FitStatus apply_team_update(LearnerState& state, const EngagementEvent& event,
                            Outcome outcome, const TeamGame& game) {
  const auto corr =
      truncation_correction(game.difference(), game.spread * game.spread, outcome, game.margin);
  if (corr.underflow) return {true};
  for (const auto& kc : event.kcs) {
    auto& skill = state.skills.at(kc.kc_id);
    const double var = skill.variance;
    skill.mean += var * corr.mean_gain;
    skill.variance = std::max(kVarianceFloor, var * (1.0 - var * corr.variance_gain));
  }
  return {false};
}

/// Inserts unseen skills and applies the dynamics noise.
void prepare_skills(LearnerState& state, const TrueSkillParams& params, const EngagementEvent& event) {
  for (const auto& kc : event.kcs) {
    auto& skill = get_or_init_skill(state, kc.kc_id, params.init_mean, params.init_variance);
    skill.variance += params.tau * params.tau;
  }
}

}  // namespace

TruncatedPosterior truncated_gaussian_update(double prior_mean, double prior_var, double perf_var, Outcome outcome,
                                             double margin) {
  if (!(prior_var > 0.0) || !(perf_var > 0.0))
    throw Error(ErrorKind::InvalidArgument, "variances must be positive");
  if (margin < 0.0 || (outcome == Outcome::Draw && !(margin > 0.0)))
    throw Error(ErrorKind::InvalidArgument, "margin must be non-negative, and positive for draws");
  const auto corr = truncation_correction(prior_mean, prior_var + perf_var, outcome, margin);
  if (corr.underflow) return {prior_mean, prior_var, true};
  return {prior_mean + prior_var * corr.mean_gain,
          std::max(kVarianceFloor, prior_var * (1.0 - prior_var * corr.variance_gain)), false};
}

double draw_margin(double draw_probability, double beta, int n_performances) {
  if (!(draw_probability > 0.0 && draw_probability < 1.0))
    throw Error(ErrorKind::InvalidArgument, "draw probability must lie in (0,1)");
  if (!(beta > 0.0) || n_performances < 2)
    throw Error(ErrorKind::InvalidArgument, "beta must be positive and n_performances >= 2");
  return normal::ppf((draw_probability + 1.0) / 2.0) * std::sqrt(static_cast<double>(n_performances)) * beta;
}

TrueSkillParams TrueSkillParams::interest_defaults() {
  TrueSkillParams p;
  p.beta = 8.83;
  p.tau = 0.0;
  p.draw_probability = 0.52;
  p.init_variance = 300.0;
  return p;
}

TrueSkillParams TrueSkillParams::novelty_defaults() {
  TrueSkillParams p;
  p.beta = 0.42;
  p.tau = 0.0;
  p.draw_probability = 0.52;
  p.init_variance = 0.25;
  return p;
}

void TrueSkillParams::validate() const {
  if (!(beta > 0.0)) throw Error(ErrorKind::InvalidArgument, "beta must be positive");
  if (!(tau >= 0.0)) throw Error(ErrorKind::InvalidArgument, "tau must be non-negative");
  if (!(draw_probability > 0.0 && draw_probability < 1.0))
    throw Error(ErrorKind::InvalidArgument, "draw_probability must lie in (0,1)");
  if (!(init_variance > 0.0)) throw Error(ErrorKind::InvalidArgument, "init_variance must be positive");
  if (!std::isfinite(init_mean) || !std::isfinite(content_scale))
    throw Error(ErrorKind::InvalidArgument, "init_mean and content_scale must be finite");
}

TeamGame team_game(const LearnerState& state, const TrueSkillParams& params, const EngagementEvent& event,
                   bool with_margin) {
  require_kcs(event);
  TeamGame game;
  for (const auto& kc : event.kcs) {
    const auto skill = skill_or_prior(state, kc.kc_id, params);
    game.team_mean += skill.mean;
    game.team_variance += skill.variance;
    game.content_mean += kc.coverage * params.content_scale;
  }
  // Every KC contributes one learner and one content performance.
  game.n_performances = 2 * static_cast<int>(event.kcs.size());
  game.spread = std::sqrt(game.team_variance + game.n_performances * params.beta * params.beta);
  game.margin = with_margin ? draw_margin(params.draw_probability, params.beta, game.n_performances) : 0.0;
  return game;
}

FitStatus interest_fit(LearnerState& state, const TrueSkillParams& params, const EngagementEvent& event) {
  require_kcs(event);
  prepare_skills(state, params, event);
  const auto game = team_game(state, params, event, params.use_draw_margin);
  const auto status = apply_team_update(state, event, event.label == 1 ? Outcome::Win : Outcome::Loss, game);
  state.record_event(event);
  return status;
}

double interest_predict_proba(const LearnerState& state, const TrueSkillParams& params, const EngagementEvent& event) {
  const auto game = team_game(state, params, event, params.use_draw_margin);
  return clamp_probability(normal::cdf((game.difference() - game.margin) / game.spread));
}

FitStatus novelty_fit(LearnerState& state, const TrueSkillParams& params, const EngagementEvent& event) {
  require_kcs(event);
  prepare_skills(state, params, event);
  const auto game = team_game(state, params, event, true);
  Outcome outcome = Outcome::Draw;
  if (event.label != 1) outcome = game.difference() > 0.0 ? Outcome::Win : Outcome::Loss;
  const auto status = apply_team_update(state, event, outcome, game);
  state.record_event(event);
  return status;
}

double novelty_predict_proba(const LearnerState& state, const TrueSkillParams& params, const EngagementEvent& event) {
  const auto game = team_game(state, params, event, true);
  const double d = game.difference();
  return clamp_probability(
      normal::interval_probability((-game.margin - d) / game.spread, (game.margin - d) / game.spread));
}

void InkParams::validate() const {
  if (!(tau >= 0.0 && tau <= 1.0)) throw Error(ErrorKind::InvalidArgument, "ink tau must lie in [0,1]");
  if (!(w_interest > 0.0) || !(w_novelty > 0.0))
    throw Error(ErrorKind::InvalidArgument, "ink weights must be positive");
}

double ink_combine(const InkWeights& w, double p_interest, double p_novelty) {
  return (w.interest * p_interest + w.novelty * p_novelty) / (w.interest + w.novelty);
}

bool ink_update(InkWeights& w, const InkParams& params, double p_interest, double p_novelty, int label) {
  if (params.greedy) {
    const int ensemble = ink_combine(w, p_interest, p_novelty) >= 0.5 ? 1 : 0;
    if (ensemble == label) return false;
  }
  const double y = label == 1 ? 1.0 : 0.0;
  w.interest *= std::exp(-params.tau * std::abs(p_interest - y));
  w.novelty *= std::exp(-params.tau * std::abs(p_novelty - y));
  // Rescale long sessions away from underflow; the ratio is what matters.
  if (const double total = w.interest + w.novelty; total < 1e-200) {
    w.interest /= total;
    w.novelty /= total;
  }
  return true;
}

void KtParams::validate() const {
  auto unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!unit(p_learn) || !unit(p_slip) || !unit(p_guess) || !unit(init_mastery))
    throw Error(ErrorKind::InvalidArgument, "kt probabilities must lie in [0,1]");
  if (!(p_slip + p_guess < 1.0)) throw Error(ErrorKind::InvalidArgument, "p_slip + p_guess must be < 1");
}

double kt_predict_proba(const BernoulliSkillMap& state, const KtParams& params, const EngagementEvent& event) {
  require_kcs(event);
  double total = 0.0;
  for (const auto& kc : event.kcs) {
    auto it = state.find(kc.kc_id);
    const double pi = it == state.end() ? params.init_mastery : it->second.mastery;
    total += pi * (1.0 - params.p_slip) + (1.0 - pi) * params.p_guess;
  }
  return total / static_cast<double>(event.kcs.size());
}

void kt_fit(BernoulliSkillMap& state, const KtParams& params, const EngagementEvent& event) {
  require_kcs(event);
  for (const auto& kc : event.kcs) {
    auto [it, _] = state.try_emplace(kc.kc_id, BernoulliSkill{params.init_mastery});
    double pi = it->second.mastery;
    const double mastered = event.label == 1 ? pi * (1.0 - params.p_slip) : pi * params.p_slip;
    const double unmastered = event.label == 1 ? (1.0 - pi) * params.p_guess : (1.0 - pi) * (1.0 - params.p_guess);
    if (const double evidence = mastered + unmastered; evidence > 0.0) pi = mastered / evidence;
    pi += (1.0 - pi) * params.p_learn;
    it->second.mastery = std::clamp(pi, 0.0, 1.0);
  }
}

double coverage_cosine(const EngagementEvent& a, const EngagementEvent& b) {
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (const auto& x : a.kcs) {
    na += x.coverage * x.coverage;
    for (const auto& y : b.kcs) {
      if (x.kc_id == y.kc_id) dot += x.coverage * y.coverage;
    }
  }
  for (const auto& y : b.kcs) nb += y.coverage * y.coverage;
  if (na <= 0.0 || nb <= 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), 0.0, 1.0);
}

double concept_jaccard(const EngagementEvent& a, const EngagementEvent& b) {
  std::vector<KcId> sa;
  std::vector<KcId> sb;
  for (const auto& x : a.kcs) sa.push_back(x.kc_id);
  for (const auto& y : b.kcs) sb.push_back(y.kc_id);
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  sa.erase(std::unique(sa.begin(), sa.end()), sa.end());
  sb.erase(std::unique(sb.begin(), sb.end()), sb.end());
  std::vector<KcId> common;
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(common));
  const auto unite = sa.size() + sb.size() - common.size();
  if (unite == 0) return 0.0;
  return static_cast<double>(common.size()) / static_cast<double>(unite);
}

UserJaccardTable::UserJaccardTable(const Dataset& train) {
  for (const auto& [user, session] : train.sessions) {
    for (const auto& ev : session.events) viewers_[ev.fragment].push_back(user);
  }
  for (auto& [_, users] : viewers_) {
    std::sort(users.begin(), users.end());
    users.erase(std::unique(users.begin(), users.end()), users.end());
  }
}

namespace {

double sorted_jaccard(const std::vector<UserId>& a, const std::vector<UserId>& b) {
  std::size_t common = 0;
  for (auto ia = a.begin(), ib = b.begin(); ia != a.end() && ib != b.end();) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++common;
      ++ia;
      ++ib;
    }
  }
  const auto unite = a.size() + b.size() - common;
  return unite == 0 ? 0.0 : static_cast<double>(common) / static_cast<double>(unite);
}

}  // namespace

double UserJaccardTable::similarity(const FragmentId& a, const FragmentId& b) const {
  auto ia = viewers_.find(a);
  auto ib = viewers_.find(b);
  if (ia == viewers_.end() || ib == viewers_.end()) return 0.0;
  return sorted_jaccard(ia->second, ib->second);
}

std::map<std::pair<FragmentId, FragmentId>, double> UserJaccardTable::dense_table() const {
  std::map<std::pair<FragmentId, FragmentId>, double> table;
  for (auto ia = viewers_.begin(); ia != viewers_.end(); ++ia) {
    for (auto ib = ia; ib != viewers_.end(); ++ib) {
      const double s = sorted_jaccard(ia->second, ib->second);
      if (s > 0.0) table[{ia->first, ib->first}] = s;
    }
  }
  return table;
}

double tf_score(const ScalarSkillMap& state, const EngagementEvent& event) {
  require_kcs(event);
  double total = 0.0;
  for (const auto& kc : event.kcs) total += state.value(kc.kc_id);
  return total / static_cast<double>(event.kcs.size());
}

void tf_fit(ScalarSkillMap& state, TfMode mode, const EngagementEvent& event) {
  if (event.label != 1) return;
  for (const auto& kc : event.kcs) state.add(kc.kc_id, mode == TfMode::Binary ? 1.0 : kc.coverage);
}

// ---------------------------------------------------------------------------

InterestModel::InterestModel(TrueSkillParams params) : params_(params) { params_.validate(); }

double InterestModel::predict_proba(const EngagementEvent& event) const {
  return interest_predict_proba(state_, params_, event);
}

void InterestModel::fit(const EngagementEvent& event) {
  state_.user_id = event.user_id;
  underflowed_ |= interest_fit(state_, params_, event).underflow;
}

std::unique_ptr<EngagementModel> InterestModel::fresh() const { return std::make_unique<InterestModel>(params_); }

NoveltyModel::NoveltyModel(TrueSkillParams params) : params_(params) { params_.validate(); }

double NoveltyModel::predict_proba(const EngagementEvent& event) const {
  return novelty_predict_proba(state_, params_, event);
}

void NoveltyModel::fit(const EngagementEvent& event) {
  state_.user_id = event.user_id;
  underflowed_ |= novelty_fit(state_, params_, event).underflow;
}

std::unique_ptr<EngagementModel> NoveltyModel::fresh() const { return std::make_unique<NoveltyModel>(params_); }

InkModel::InkModel(TrueSkillParams interest, TrueSkillParams novelty, InkParams meta)
    : interest_(interest), novelty_(novelty), meta_(meta), weights_{meta.w_interest, meta.w_novelty} {
  meta_.validate();
}

double InkModel::predict_proba(const EngagementEvent& event) const {
  return ink_combine(weights_, interest_.predict_proba(event), novelty_.predict_proba(event));
}

void InkModel::fit(const EngagementEvent& event) {
  const double p_interest = interest_.predict_proba(event);
  const double p_novelty = novelty_.predict_proba(event);
  ink_update(weights_, meta_, p_interest, p_novelty, event.label);
  interest_.fit(event);
  novelty_.fit(event);
}

std::unique_ptr<EngagementModel> InkModel::fresh() const {
  return std::make_unique<InkModel>(interest_.params(), novelty_.params(), meta_);
}

KtModel::KtModel(KtParams params) : params_(params) { params_.validate(); }

double KtModel::predict_proba(const EngagementEvent& event) const {
  return kt_predict_proba(state_, params_, event);
}

void KtModel::fit(const EngagementEvent& event) { kt_fit(state_, params_, event); }

std::unique_ptr<EngagementModel> KtModel::fresh() const { return std::make_unique<KtModel>(params_); }

PairwiseModel::PairwiseModel(double threshold, int first_event_label)
    : threshold_(threshold), first_event_label_(first_event_label) {
  if (!std::isfinite(threshold)) throw Error(ErrorKind::InvalidArgument, "threshold must be finite");
  if (first_event_label != 0 && first_event_label != 1)
    throw Error(ErrorKind::InvalidArgument, "first_event_label must be 0 or 1");
}

std::optional<double> PairwiseModel::score(const EngagementEvent& event) const {
  if (!previous_) return std::nullopt;
  return similarity(*previous_, event);
}

double PairwiseModel::predict_proba(const EngagementEvent& event) const {
  const auto s = score(event);
  if (!s) return first_event_label_;
  return *s >= threshold_ ? 1.0 : 0.0;
}

CosineModel::CosineModel(double threshold, int first_event_label) : PairwiseModel(threshold, first_event_label) {}

std::unique_ptr<EngagementModel> CosineModel::fresh() const {
  return std::make_unique<CosineModel>(threshold(), first_event_label());
}

double CosineModel::similarity(const EngagementEvent& prev, const EngagementEvent& cur) const {
  return coverage_cosine(prev, cur);
}

JaccardConceptModel::JaccardConceptModel(double threshold, int first_event_label)
    : PairwiseModel(threshold, first_event_label) {}

std::unique_ptr<EngagementModel> JaccardConceptModel::fresh() const {
  return std::make_unique<JaccardConceptModel>(threshold(), first_event_label());
}

double JaccardConceptModel::similarity(const EngagementEvent& prev, const EngagementEvent& cur) const {
  return concept_jaccard(prev, cur);
}

JaccardUserModel::JaccardUserModel(std::shared_ptr<const UserJaccardTable> table, double threshold,
                                   int first_event_label)
    : PairwiseModel(threshold, first_event_label), table_(std::move(table)) {
  if (!table_) throw Error(ErrorKind::InvalidArgument, "jaccard-u needs a training similarity table");
}

std::unique_ptr<EngagementModel> JaccardUserModel::fresh() const {
  return std::make_unique<JaccardUserModel>(table_, threshold(), first_event_label());
}

double JaccardUserModel::similarity(const EngagementEvent& prev, const EngagementEvent& cur) const {
  return table_->similarity(prev.fragment, cur.fragment);
}

TfModel::TfModel(TfMode mode, double threshold) : mode_(mode), threshold_(threshold) {
  if (!std::isfinite(threshold)) throw Error(ErrorKind::InvalidArgument, "threshold must be finite");
}

double TfModel::predict_proba(const EngagementEvent& event) const {
  return tf_score(state_, event) >= threshold_ ? 1.0 : 0.0;
}

std::unique_ptr<EngagementModel> TfModel::fresh() const { return std::make_unique<TfModel>(mode_, threshold_); }

}  // namespace truelearn
