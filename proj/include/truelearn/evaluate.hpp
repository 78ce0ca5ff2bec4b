#pragma once

// Sequential hold-out evaluation: each learner's t-th event is predicted from
// events 1..t-1 only, then folded into the model.

#include <cstdint>
#include <functional>
#include <optional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "truelearn/config.hpp"
#include "truelearn/data_model.hpp"
#include "truelearn/learners.hpp"

namespace truelearn {

struct ScoredPrediction {
  double proba = 0.0;
  int predicted = 0;
  int label = 0;

  bool operator==(const ScoredPrediction&) const = default;
};

/// Replays one session through `model`, which should hold a fresh learner
/// state. Each event is scored before fit sees its label. With skip_first the first
/// event is fitted but not scored.
std::vector<ScoredPrediction> replay_session(EngagementModel& model, const Session& session, bool skip_first = false);

struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;

  std::int64_t total() const { return tp + fp + tn + fn; }
  void add(int predicted, int label);
  ConfusionCounts& operator+=(const ConfusionCounts& o);
  bool operator==(const ConfusionCounts&) const = default;
};

/// Precision and recall are 0 when their denominator is 0; f1 is 0 when
/// precision + recall is 0.
struct Metrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  static Metrics from(const ConfusionCounts& c);
};

struct TimestepMetrics {
  std::size_t t = 0;  // 1-based scored-event index
  std::size_t n_learners = 0;
  ConfusionCounts counts;
  Metrics metrics;
};

struct LearnerPredictions {
  UserId user_id = 0;
  std::vector<ScoredPrediction> predictions;
};

struct EvalReport {
  Metrics micro;
  ConfusionCounts counts;
  Metrics macro;
  std::vector<TimestepMetrics> per_timestep;
  std::map<UserId, Metrics> per_learner;
  std::size_t n_learners = 0;
  std::size_t n_events = 0;
};

/// Micro metrics pool confusion counts over all events; macro averages the
/// per-learner metrics; per_timestep[t-1] pools the t-th scored event of every
/// learner that has one.
EvalReport compute_metrics(const std::vector<LearnerPredictions>& learners);

inline constexpr int kReportSchemaVersion = 1;

nlohmann::json report_to_json(const EvalReport& report);

struct EvalOptions {
  bool skip_first = false;
  unsigned jobs = 0;  // 0 = hardware concurrency
  bool keep_states = false;
};

struct EvaluationRun {
  EvalReport report;
  std::vector<LearnerPredictions> learners;
  /// Final Gaussian learner states (keep_states, models that have one).
  std::vector<LearnerState> states;
};

/// Replays every session of `ds` through a fresh copy of `prototype`,
/// one worker per learner.
EvaluationRun evaluate_dataset(const EngagementModel& prototype, const Dataset& ds, const EvalOptions& options = {});

enum class Objective { MicroF1, MacroF1, MicroAccuracy, MacroAccuracy };

double objective_value(const EvalReport& report, Objective objective);

/// Parameter key -> candidate values. std::map keeps keys sorted so the
/// tie-breaking tuple order is well defined.
using Grid = std::map<std::string, std::vector<double>>;
using GridPoint = std::vector<std::pair<std::string, double>>;

/// Default search grid per model family, used when no grid is given.
Grid default_grid(ModelKind kind);

struct SweepRow {
  GridPoint point;
  double objective = 0.0;
  Metrics micro;
  Metrics macro;
};

struct SweepResult {
  GridPoint best_point;
  ModelConfig best_config;
  double best_objective = 0.0;
  std::vector<SweepRow> table;
};

/// Exhaustive Cartesian sweep on `train`. Ties go to the lexicographically
/// smallest value tuple (keys in sorted order).
SweepResult grid_sweep(const ModelConfig& base, const Grid& grid, const Dataset& train,
                       const ModelContext& context = {}, Objective objective = Objective::MicroF1,
                       const EvalOptions& options = {});

/// Same sweep with a caller-supplied scorer (used to plant synthetic objectives).
SweepResult grid_sweep(const ModelConfig& base, const Grid& grid,
                       const std::function<SweepRow(const ModelConfig&)>& score_point, unsigned jobs = 0);

struct TTestResult {
  double t_stat = 0.0;
  double p_one_tailed = 0.5;
  bool degenerate = false;
};

/// Paired t-test for mean(a) > mean(b). Zero-variance differences give
/// t = +-inf and p = 0 or 1 (t = 0, p = 0.5 when all differences vanish).
TTestResult paired_ttest(const std::vector<double>& a, const std::vector<double>& b);

/// Runs fn(i) for i in [0, n) on up to `jobs` threads.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn);

}  // namespace truelearn
