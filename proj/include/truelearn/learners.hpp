#pragma once

// Engagement prediction algorithms. Every model follows the same online
// contract: predict_proba / predict read the learner state built from past
// events only, fit folds in one labelled event afterwards.

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "truelearn/data_model.hpp"
#include "truelearn/skills.hpp"

namespace truelearn {

// ---------------------------------------------------------------------------
// Gaussian message passing primitives
// ---------------------------------------------------------------------------

enum class Outcome { Win, Loss, Draw };

struct TruncatedPosterior {
  double mean = 0.0;
  double variance = 0.0;
  bool underflow = false;
};

/// Posterior moments of a N(prior_mean, prior_var) skill after observing the
/// outcome of t = skill + noise, noise ~ N(0, perf_var): t > margin (win),
/// t < -margin (loss) or |t| <= margin (draw). On numerical underflow the
/// prior is returned with `underflow` set.
TruncatedPosterior truncated_gaussian_update(double prior_mean, double prior_var, double perf_var, Outcome outcome,
                                             double margin);

/// Draw margin for a game with `n_performances` noisy performances.
double draw_margin(double draw_probability, double beta, int n_performances);

// ---------------------------------------------------------------------------
// TrueLearn family
// ---------------------------------------------------------------------------

struct TrueSkillParams {
  double beta = 0.5;
  double tau = 0.0;
  double draw_probability = 0.52;
  double init_variance = 1.0;
  double init_mean = 0.0;
  /// Content performance is coverage * content_scale.
  double content_scale = 1.0;
  /// Interest only: use the draw margin for win/loss truncation instead of 0.
  bool use_draw_margin = false;

  static TrueSkillParams interest_defaults();
  static TrueSkillParams novelty_defaults();
  void validate() const;
};

/// Summary of the learner-vs-content game for one event.
struct TeamGame {
  double team_mean = 0.0;
  double team_variance = 0.0;
  double content_mean = 0.0;
  int n_performances = 0;
  /// Standard deviation of the performance difference.
  double spread = 0.0;
  double margin = 0.0;

  double difference() const { return team_mean - content_mean; }
};

TeamGame team_game(const LearnerState& state, const TrueSkillParams& params, const EngagementEvent& event,
                   bool with_margin);

struct FitStatus {
  bool underflow = false;
};

FitStatus interest_fit(LearnerState& state, const TrueSkillParams& params, const EngagementEvent& event);
double interest_predict_proba(const LearnerState& state, const TrueSkillParams& params, const EngagementEvent& event);

FitStatus novelty_fit(LearnerState& state, const TrueSkillParams& params, const EngagementEvent& event);
double novelty_predict_proba(const LearnerState& state, const TrueSkillParams& params, const EngagementEvent& event);

struct InkParams {
  bool greedy = true;
  double tau = 0.5;
  double w_interest = 1.0;
  double w_novelty = 1.0;

  void validate() const;
};

struct InkWeights {
  double interest = 1.0;
  double novelty = 1.0;
};

double ink_combine(const InkWeights& w, double p_interest, double p_novelty);

/// Exponentiated-gradient step on the combiner weights; returns whether the
/// weights changed.
bool ink_update(InkWeights& w, const InkParams& params, double p_interest, double p_novelty, int label);

// ---------------------------------------------------------------------------
// Baselines
// ---------------------------------------------------------------------------

struct KtParams {
  double p_learn = 0.1;
  double p_slip = 0.1;
  double p_guess = 0.2;
  double init_mastery = 0.0;

  void validate() const;
};

double kt_predict_proba(const BernoulliSkillMap& state, const KtParams& params, const EngagementEvent& event);
void kt_fit(BernoulliSkillMap& state, const KtParams& params, const EngagementEvent& event);

/// Cosine between the sparse KC-coverage vectors of two events; 0 for a zero vector.
double coverage_cosine(const EngagementEvent& a, const EngagementEvent& b);

/// Jaccard index of the KC-id sets of two events; 0 when both are empty.
double concept_jaccard(const EngagementEvent& a, const EngagementEvent& b);

/// Fragment similarity by overlap of the training learners who watched them.
class UserJaccardTable {
 public:
  UserJaccardTable() = default;
  explicit UserJaccardTable(const Dataset& train);

  /// 0 for fragments absent from the training data.
  double similarity(const FragmentId& a, const FragmentId& b) const;
  std::size_t fragment_count() const { return viewers_.size(); }

  /// Every fragment pair (a <= b) with nonzero similarity.
  std::map<std::pair<FragmentId, FragmentId>, double> dense_table() const;

 private:
  std::map<FragmentId, std::vector<UserId>> viewers_;
};

enum class TfMode { Binary, Cosine };

double tf_score(const ScalarSkillMap& state, const EngagementEvent& event);
void tf_fit(ScalarSkillMap& state, TfMode mode, const EngagementEvent& event);

// ---------------------------------------------------------------------------
// Uniform model interface
// ---------------------------------------------------------------------------

/// Per-learner online model.
class EngagementModel {
 public:
  virtual ~EngagementModel() = default;

  virtual std::string_view name() const = 0;
  virtual double predict_proba(const EngagementEvent& event) const = 0;
  virtual int predict(const EngagementEvent& event) const { return predict_proba(event) >= 0.5 ? 1 : 0; }
  virtual void fit(const EngagementEvent& event) = 0;
  /// Same hyperparameters, empty learner state.
  virtual std::unique_ptr<EngagementModel> fresh() const = 0;
  /// Gaussian learner state, when the model keeps one.
  virtual const LearnerState* learner_state() const { return nullptr; }
  /// Whether fit ever reported a numerical underflow.
  virtual bool underflowed() const { return false; }
};

class InterestModel final : public EngagementModel {
 public:
  explicit InterestModel(TrueSkillParams params = TrueSkillParams::interest_defaults());

  std::string_view name() const override { return "interest"; }
  double predict_proba(const EngagementEvent& event) const override;
  void fit(const EngagementEvent& event) override;
  std::unique_ptr<EngagementModel> fresh() const override;
  const LearnerState* learner_state() const override { return &state_; }
  bool underflowed() const override { return underflowed_; }

  const TrueSkillParams& params() const { return params_; }

 private:
  TrueSkillParams params_;
  LearnerState state_;
  bool underflowed_ = false;
};

class NoveltyModel final : public EngagementModel {
 public:
  explicit NoveltyModel(TrueSkillParams params = TrueSkillParams::novelty_defaults());

  std::string_view name() const override { return "novelty"; }
  double predict_proba(const EngagementEvent& event) const override;
  void fit(const EngagementEvent& event) override;
  std::unique_ptr<EngagementModel> fresh() const override;
  const LearnerState* learner_state() const override { return &state_; }
  bool underflowed() const override { return underflowed_; }

  const TrueSkillParams& params() const { return params_; }

 private:
  TrueSkillParams params_;
  LearnerState state_;
  bool underflowed_ = false;
};

class InkModel final : public EngagementModel {
 public:
  InkModel(TrueSkillParams interest = TrueSkillParams::interest_defaults(),
           TrueSkillParams novelty = TrueSkillParams::novelty_defaults(), InkParams meta = {});

  std::string_view name() const override { return "ink"; }
  double predict_proba(const EngagementEvent& event) const override;
  void fit(const EngagementEvent& event) override;
  std::unique_ptr<EngagementModel> fresh() const override;
  /// The knowledge (novelty) state.
  const LearnerState* learner_state() const override { return novelty_.learner_state(); }
  bool underflowed() const override { return interest_.underflowed() || novelty_.underflowed(); }

  const InkWeights& weights() const { return weights_; }
  const InterestModel& interest() const { return interest_; }
  const NoveltyModel& novelty() const { return novelty_; }

 private:
  InterestModel interest_;
  NoveltyModel novelty_;
  InkParams meta_;
  InkWeights weights_;
};

class KtModel final : public EngagementModel {
 public:
  explicit KtModel(KtParams params = {});

  std::string_view name() const override { return "kt"; }
  double predict_proba(const EngagementEvent& event) const override;
  void fit(const EngagementEvent& event) override;
  std::unique_ptr<EngagementModel> fresh() const override;

  const BernoulliSkillMap& mastery() const { return state_; }

 private:
  KtParams params_;
  BernoulliSkillMap state_;
};

/// Shared pieces of the pairwise baselines, which compare each event with the
/// learner's previous one. Hard 0/1 probabilities.
class PairwiseModel : public EngagementModel {
 public:
  PairwiseModel(double threshold, int first_event_label);

  double predict_proba(const EngagementEvent& event) const final;
  void fit(const EngagementEvent& event) final { previous_ = event; }
  /// Similarity to the previous event; nullopt for a session's first event.
  std::optional<double> score(const EngagementEvent& event) const;
  double threshold() const { return threshold_; }

 protected:
  virtual double similarity(const EngagementEvent& prev, const EngagementEvent& cur) const = 0;
  int first_event_label() const { return first_event_label_; }

 private:
  double threshold_;
  int first_event_label_;
  std::optional<EngagementEvent> previous_;
};

class CosineModel final : public PairwiseModel {
 public:
  explicit CosineModel(double threshold = 0.5, int first_event_label = 1);
  std::string_view name() const override { return "cosine"; }
  std::unique_ptr<EngagementModel> fresh() const override;

 private:
  double similarity(const EngagementEvent& prev, const EngagementEvent& cur) const override;
};

class JaccardConceptModel final : public PairwiseModel {
 public:
  explicit JaccardConceptModel(double threshold = 0.2, int first_event_label = 1);
  std::string_view name() const override { return "jaccard-c"; }
  std::unique_ptr<EngagementModel> fresh() const override;

 private:
  double similarity(const EngagementEvent& prev, const EngagementEvent& cur) const override;
};

class JaccardUserModel final : public PairwiseModel {
 public:
  JaccardUserModel(std::shared_ptr<const UserJaccardTable> table, double threshold = 0.1, int first_event_label = 1);
  std::string_view name() const override { return "jaccard-u"; }
  std::unique_ptr<EngagementModel> fresh() const override;

 private:
  double similarity(const EngagementEvent& prev, const EngagementEvent& cur) const override;
  std::shared_ptr<const UserJaccardTable> table_;
};

class TfModel final : public EngagementModel {
 public:
  TfModel(TfMode mode, double threshold);
  std::string_view name() const override { return mode_ == TfMode::Binary ? "tf-binary" : "tf-cosine"; }
  double predict_proba(const EngagementEvent& event) const override;
  void fit(const EngagementEvent& event) override { tf_fit(state_, mode_, event); }
  std::unique_ptr<EngagementModel> fresh() const override;

  const ScalarSkillMap& accumulators() const { return state_; }

 private:
  TfMode mode_;
  double threshold_;
  ScalarSkillMap state_;
};

}  // namespace truelearn
