#include "truelearn/evaluate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

#include "truelearn/error.hpp"

namespace truelearn {

std::vector<ScoredPrediction> replay_session(EngagementModel& model, const Session& session, bool skip_first) {
  std::vector<ScoredPrediction> out;
  out.reserve(session.events.size());
  bool first = true;
  for (const auto& ev : session.events) {
    if (!(first && skip_first)) {
      const double proba = model.predict_proba(ev);
      out.push_back({proba, model.predict(ev), ev.label});
    }
    model.fit(ev);
    first = false;
  }
  return out;
}

void ConfusionCounts::add(int predicted, int label) {
  if (predicted == 1) {
    label == 1 ? ++tp : ++fp;
  } else {
    label == 1 ? ++fn : ++tn;
  }
}

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) {
  tp += o.tp;
  fp += o.fp;
  tn += o.tn;
  fn += o.fn;
  return *this;
}

Metrics Metrics::from(const ConfusionCounts& c) {
  auto ratio = [](std::int64_t num, std::int64_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  Metrics m;
  m.accuracy = ratio(c.tp + c.tn, c.total());
  m.precision = ratio(c.tp, c.tp + c.fp);
  m.recall = ratio(c.tp, c.tp + c.fn);
  m.f1 = m.precision + m.recall == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

EvalReport compute_metrics(const std::vector<LearnerPredictions>& learners) {
  EvalReport report;
  Metrics macro_sum;
  for (const auto& learner : learners) {
    if (learner.predictions.empty()) continue;
    ConfusionCounts own;
    for (std::size_t i = 0; i < learner.predictions.size(); ++i) {
      const auto& p = learner.predictions[i];
      own.add(p.predicted, p.label);
      if (report.per_timestep.size() <= i) report.per_timestep.push_back({i + 1, 0, {}, {}});
      report.per_timestep[i].counts.add(p.predicted, p.label);
      ++report.per_timestep[i].n_learners;
    }
    report.counts += own;
    const auto m = Metrics::from(own);
    report.per_learner[learner.user_id] = m;
    macro_sum.accuracy += m.accuracy;
    macro_sum.precision += m.precision;
    macro_sum.recall += m.recall;
    macro_sum.f1 += m.f1;
    ++report.n_learners;
  }
  if (report.counts.total() == 0) throw Error(ErrorKind::NoPredictions, "no scored predictions");

  report.n_events = static_cast<std::size_t>(report.counts.total());
  report.micro = Metrics::from(report.counts);
  const auto n = static_cast<double>(report.n_learners);
  report.macro = {macro_sum.accuracy / n, macro_sum.precision / n, macro_sum.recall / n, macro_sum.f1 / n};
  for (auto& step : report.per_timestep) step.metrics = Metrics::from(step.counts);
  return report;
}

namespace {

nlohmann::json metrics_json(const Metrics& m) {
  return {{"accuracy", m.accuracy}, {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
}

nlohmann::json counts_json(const ConfusionCounts& c) {
  return {{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}};
}

}  // namespace

nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : report.per_timestep) {
    auto j = metrics_json(s.metrics);
    j["t"] = s.t;
    j["n_learners"] = s.n_learners;
    steps.push_back(std::move(j));
  }
  return {{"schema_version", kReportSchemaVersion},
          {"n_learners", report.n_learners},
          {"n_events", report.n_events},
          {"micro", metrics_json(report.micro)},
          {"confusion", counts_json(report.counts)},
          {"macro", metrics_json(report.macro)},
          {"per_timestep", std::move(steps)}};
}

void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  const auto workers = static_cast<unsigned>(std::min<std::size_t>(jobs, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = n;
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

EvaluationRun evaluate_dataset(const EngagementModel& prototype, const Dataset& ds, const EvalOptions& options) {
  std::vector<const Session*> sessions;
  sessions.reserve(ds.sessions.size());
  for (const auto& [_, s] : ds.sessions) sessions.push_back(&s);

  EvaluationRun run;
  run.learners.resize(sessions.size());
  std::vector<std::optional<LearnerState>> states(options.keep_states ? sessions.size() : 0);

  parallel_for(sessions.size(), options.jobs, [&](std::size_t i) {
    auto model = prototype.fresh();
    run.learners[i] = {sessions[i]->user_id, replay_session(*model, *sessions[i], options.skip_first)};
    if (options.keep_states) {
      if (const auto* state = model->learner_state()) states[i] = *state;
    }
  });

  for (auto& s : states) {
    if (s) run.states.push_back(std::move(*s));
  }
  run.report = compute_metrics(run.learners);
  return run;
}

double objective_value(const EvalReport& report, Objective objective) {
  switch (objective) {
    case Objective::MicroF1: return report.micro.f1;
    case Objective::MacroF1: return report.macro.f1;
    case Objective::MicroAccuracy: return report.micro.accuracy;
    case Objective::MacroAccuracy: return report.macro.accuracy;
  }
  return report.micro.f1;
}

Grid default_grid(ModelKind kind) {
  switch (kind) {
    case ModelKind::Interest:
      return {{"interest.beta", {0.5, 2.0, 8.83}}, {"interest.init_variance", {1.0, 50.0, 300.0}}};
    case ModelKind::Novelty:
      return {{"novelty.beta", {0.1, 0.2, 0.42, 0.6}},
              {"novelty.draw_probability", {0.3, 0.52, 0.7}},
              {"novelty.init_variance", {0.1, 0.25, 0.5}}};
    case ModelKind::Ink: return {{"ink.greedy", {0.0, 1.0}}, {"ink.tau", {0.1, 0.5, 1.0}}};
    case ModelKind::Kt:
      return {{"kt.p_guess", {0.1, 0.2, 0.3, 0.45}},
              {"kt.p_learn", {0.05, 0.1, 0.2, 0.4}},
              {"kt.p_slip", {0.05, 0.1, 0.2, 0.3}}};
    case ModelKind::Cosine: return {{"threshold", {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}}};
    case ModelKind::JaccardConcept: return {{"threshold", {0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.8}}};
    case ModelKind::JaccardUser: return {{"threshold", {0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5}}};
    case ModelKind::TfBinary: return {{"threshold", {0.5, 1.0, 2.0, 3.0, 5.0, 8.0}}};
    case ModelKind::TfCosine: return {{"threshold", {0.1, 0.25, 0.5, 1.0, 2.0, 4.0}}};
  }
  return {};
}

namespace {

std::vector<GridPoint> cartesian(const Grid& grid) {
  std::vector<GridPoint> points{{}};
  for (const auto& [key, values] : grid) {
    if (values.empty()) throw Error(ErrorKind::EmptyGrid, "no values for '" + key + "'");
    std::vector<GridPoint> next;
    next.reserve(points.size() * values.size());
    for (const auto& p : points) {
      for (double v : values) {
        auto q = p;
        q.emplace_back(key, v);
        next.push_back(std::move(q));
      }
    }
    points = std::move(next);
  }
  return points;
}

bool tuple_less(const GridPoint& a, const GridPoint& b) {
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    if (a[i].second != b[i].second) return a[i].second < b[i].second;
  }
  return a.size() < b.size();
}

ModelConfig apply_point(const ModelConfig& base, const GridPoint& point) {
  auto config = base;
  for (const auto& [key, value] : point) config.set_number(key, value);
  config.validate();
  return config;
}

}  // namespace

SweepResult grid_sweep(const ModelConfig& base, const Grid& grid,
                       const std::function<SweepRow(const ModelConfig&)>& score_point, unsigned jobs) {
  if (grid.empty()) throw Error(ErrorKind::EmptyGrid, "empty grid");
  const auto points = cartesian(grid);
  // Reject bad keys or values before spending any evaluation time.
  std::vector<ModelConfig> configs;
  configs.reserve(points.size());
  for (const auto& p : points) configs.push_back(apply_point(base, p));

  SweepResult result;
  result.table.resize(points.size());
  parallel_for(points.size(), jobs, [&](std::size_t i) {
    auto row = score_point(configs[i]);
    row.point = points[i];
    result.table[i] = std::move(row);
  });

  std::size_t best = 0;
  for (std::size_t i = 1; i < result.table.size(); ++i) {
    const auto& cand = result.table[i];
    const auto& inc = result.table[best];
    if (cand.objective > inc.objective || (cand.objective == inc.objective && tuple_less(cand.point, inc.point)))
      best = i;
  }
  result.best_point = result.table[best].point;
  result.best_objective = result.table[best].objective;
  result.best_config = configs[best];
  return result;
}

SweepResult grid_sweep(const ModelConfig& base, const Grid& grid, const Dataset& train, const ModelContext& context,
                       Objective objective, const EvalOptions& options) {
  auto inner = options;
  inner.jobs = 1;
  inner.keep_states = false;
  return grid_sweep(
      base, grid,
      [&](const ModelConfig& config) {
        const auto model = make_model(config, context);
        const auto run = evaluate_dataset(*model, train, inner);
        return SweepRow{{}, objective_value(run.report, objective), run.report.micro, run.report.macro};
      },
      options.jobs);
}

TTestResult paired_ttest(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2)
    throw Error(ErrorKind::InvalidArgument, "paired t-test needs two equal-length samples of size >= 2");
  const auto n = static_cast<double>(a.size());
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : d) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (n - 1.0));

  // Differences that agree to rounding count as zero variance.
  if (sd <= 1e-14 * std::max(1.0, std::abs(mean))) {
    if (std::abs(mean) <= 1e-14) return {0.0, 0.5, true};
    const double inf = std::numeric_limits<double>::infinity();
    return mean > 0.0 ? TTestResult{inf, 0.0, true} : TTestResult{-inf, 1.0, true};
  }
  const double t = mean / (sd / std::sqrt(n));
  const boost::math::students_t dist(n - 1.0);
  return {t, boost::math::cdf(boost::math::complement(dist, t)), false};
}

}  // namespace truelearn
