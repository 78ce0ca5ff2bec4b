#pragma once

// Static SVG renderings of a learner state. Every mark carries data-*
// attributes with the values it encodes so documents can be checked by
// parsing them back.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "truelearn/skills.hpp"

namespace truelearn {

enum class PlotKind { Bar, Dot, Bubble, Line };

std::optional<PlotKind> parse_plot_kind(std::string_view name);

struct PlotSpec {
  PlotKind kind = PlotKind::Bar;
  std::size_t top_k = 15;
  int width = 800;
  int height = 480;
  std::string title = "Learner state";
};

/// 95% interval mean +- 1.96 sd.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

Interval confidence_interval(double mean, double variance);

/// Optional titles for the KC axis labels.
using KcTitles = std::map<KcId, std::string>;

std::string render_bar(const std::vector<SkillSummary>& skills, const PlotSpec& spec, const KcTitles& titles = {});
std::string render_dot(const std::vector<SkillSummary>& skills, const PlotSpec& spec, const KcTitles& titles = {});
std::string render_bubble(const std::vector<SkillSummary>& skills, const PlotSpec& spec, const KcTitles& titles = {});

struct HistoryPoint {
  double t = 0.0;
  double mean = 0.0;
  /// Absent for models without uncertainty (KT, IRT).
  std::optional<double> variance;
};

std::string render_line(const std::vector<HistoryPoint>& history, const PlotSpec& spec);

/// Dispatches on spec.kind for the state-based kinds (bar, dot, bubble).
std::string render_state(const LearnerState& state, const PlotSpec& spec, const KcTitles& titles = {});

}  // namespace truelearn
