#include "truelearn/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "truelearn/error.hpp"

namespace truelearn {

namespace {

constexpr double kZ95 = 1.96;
constexpr double kMarginLeft = 64;
constexpr double kMarginRight = 24;
constexpr double kMarginTop = 48;
constexpr double kMarginBottom = 96;

std::string px(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string kc_label(KcId kc, const KcTitles& titles) {
  auto it = titles.find(kc);
  return it == titles.end() ? "KC " + std::to_string(kc) : it->second;
}

void open_svg(std::ostringstream& out, double width, double height, const std::string& title) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px(width) << "\" height=\"" << px(height)
      << "\" viewBox=\"0 0 " << px(width) << ' ' << px(height) << "\">\n"
      << "  <title>" << escape(title) << "</title>\n"
      << "  <text class=\"title\" x=\"" << px(width / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
      << escape(title) << "</text>\n";
}

void close_svg(std::ostringstream& out) { out << "</svg>\n"; }

/// Linear map from data values to vertical pixels of the plot area.
struct ValueAxis {
  double lo;
  double hi;
  double top;
  double bottom;

  double y(double v) const { return bottom - (v - lo) / (hi - lo) * (bottom - top); }
};

ValueAxis make_axis(double lo, double hi, double top, double bottom) {
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  return {lo, hi, top, bottom};
}

void draw_value_axis(std::ostringstream& out, const ValueAxis& axis, double x_left, double x_right,
                     const std::string& label) {
  out << "  <line class=\"axis\" x1=\"" << px(x_left) << "\" y1=\"" << px(axis.top) << "\" x2=\"" << px(x_left)
      << "\" y2=\"" << px(axis.bottom) << "\" stroke=\"#333\"/>\n"
      << "  <line class=\"axis\" x1=\"" << px(x_left) << "\" y1=\"" << px(axis.bottom) << "\" x2=\"" << px(x_right)
      << "\" y2=\"" << px(axis.bottom) << "\" stroke=\"#333\"/>\n";
  for (double v : {axis.lo, axis.hi}) {
    out << "  <text class=\"tick\" x=\"" << px(x_left - 6) << "\" y=\"" << px(axis.y(v) + 4)
        << "\" text-anchor=\"end\" font-size=\"10\">" << px(v) << "</text>\n";
  }
  if (!label.empty()) {
    out << "  <text class=\"axis-label\" x=\"16\" y=\"" << px((axis.top + axis.bottom) / 2)
        << "\" transform=\"rotate(-90 16 " << px((axis.top + axis.bottom) / 2)
        << ")\" text-anchor=\"middle\" font-size=\"12\">" << escape(label) << "</text>\n";
  }
}

enum class IntervalMark { Bar, Dot };

std::string render_interval_plot(const std::vector<SkillSummary>& skills, const PlotSpec& spec, const KcTitles& titles,
                                 IntervalMark mark) {
  if (skills.empty()) throw Error(ErrorKind::EmptyState, "nothing to plot");
  const auto n = std::min(skills.size(), std::max<std::size_t>(spec.top_k, 1));

  double lo = 0.0;
  double hi = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto ci = confidence_interval(skills[i].mean, skills[i].variance);
    lo = std::min(lo, ci.lo);
    hi = std::max(hi, ci.hi);
  }
  const double width = spec.width;
  const double height = spec.height;
  const auto axis = make_axis(lo, hi, kMarginTop, height - kMarginBottom);
  const double slot = (width - kMarginLeft - kMarginRight) / static_cast<double>(n);

  std::ostringstream out;
  open_svg(out, width, height, spec.title);
  draw_value_axis(out, axis, kMarginLeft, width - kMarginRight, "Skill mean");
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = skills[i];
    const auto ci = confidence_interval(s.mean, s.variance);
    const double cx = kMarginLeft + slot * (static_cast<double>(i) + 0.5);
    const std::string data = " data-kc=\"" + std::to_string(s.kc_id) + "\" data-mean=\"" + exact(s.mean) +
                             "\" data-variance=\"" + exact(s.variance) + "\"";
    if (mark == IntervalMark::Bar) {
      const double bar_w = slot * 0.6;
      // Bars grow from the axis minimum so height is monotone in the mean.
      out << "  <rect class=\"bar\"" << data << " x=\"" << px(cx - bar_w / 2) << "\" y=\"" << px(axis.y(s.mean))
          << "\" width=\"" << px(bar_w) << "\" height=\"" << px(axis.bottom - axis.y(s.mean))
          << "\" fill=\"#4c72b0\"/>\n";
    } else {
      out << "  <circle class=\"dot\"" << data << " cx=\"" << px(cx) << "\" cy=\"" << px(axis.y(s.mean))
          << "\" r=\"5\" fill=\"#4c72b0\"/>\n";
    }
    out << "  <line class=\"whisker\" data-kc=\"" << s.kc_id << "\" data-lo=\"" << exact(ci.lo) << "\" data-hi=\""
        << exact(ci.hi) << "\" x1=\"" << px(cx) << "\" y1=\"" << px(axis.y(ci.hi)) << "\" x2=\"" << px(cx)
        << "\" y2=\"" << px(axis.y(ci.lo)) << "\" stroke=\"#222\" stroke-width=\"1.5\"/>\n";
    const double ly = axis.bottom + 12;
    out << "  <text class=\"kc-label\" x=\"" << px(cx) << "\" y=\"" << px(ly) << "\" transform=\"rotate(45 " << px(cx)
        << ' ' << px(ly) << ")\" font-size=\"10\">" << escape(kc_label(s.kc_id, titles)) << "</text>\n";
  }
  close_svg(out);
  return out.str();
}

}  // namespace

std::optional<PlotKind> parse_plot_kind(std::string_view name) {
  if (name == "bar") return PlotKind::Bar;
  if (name == "dot") return PlotKind::Dot;
  if (name == "bubble") return PlotKind::Bubble;
  if (name == "line") return PlotKind::Line;
  return std::nullopt;
}

Interval confidence_interval(double mean, double variance) {
  const double half = kZ95 * std::sqrt(std::max(0.0, variance));
  return {mean - half, mean + half};
}

std::string render_bar(const std::vector<SkillSummary>& skills, const PlotSpec& spec, const KcTitles& titles) {
  return render_interval_plot(skills, spec, titles, IntervalMark::Bar);
}

std::string render_dot(const std::vector<SkillSummary>& skills, const PlotSpec& spec, const KcTitles& titles) {
  return render_interval_plot(skills, spec, titles, IntervalMark::Dot);
}

std::string render_bubble(const std::vector<SkillSummary>& skills, const PlotSpec& spec, const KcTitles& titles) {
  if (skills.empty()) throw Error(ErrorKind::EmptyState, "nothing to plot");
  const auto n = std::min(skills.size(), std::max<std::size_t>(spec.top_k, 1));
  constexpr double kMinRadius = 10.0;
  constexpr double kMaxRadius = 40.0;
  constexpr double kMinOpacity = 0.2;

  auto [mean_lo, mean_hi] = std::minmax_element(skills.begin(), skills.begin() + static_cast<std::ptrdiff_t>(n),
                                                [](const auto& a, const auto& b) { return a.mean < b.mean; });
  auto [var_lo, var_hi] = std::minmax_element(skills.begin(), skills.begin() + static_cast<std::ptrdiff_t>(n),
                                              [](const auto& a, const auto& b) { return a.variance < b.variance; });
  const double m0 = mean_lo->mean;
  const double m1 = mean_hi->mean;
  const double v0 = var_lo->variance;
  const double v1 = var_hi->variance;

  const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
  const auto rows = (n + cols - 1) / cols;
  const double cell = 2 * kMaxRadius + 16;
  const double width = std::max<double>(spec.width, static_cast<double>(cols) * cell + 40);
  const double height = std::max<double>(spec.height, static_cast<double>(rows) * cell + 72);
  const double x0 = (width - static_cast<double>(cols) * cell) / 2;
  const double y0 = 48;

  std::ostringstream out;
  open_svg(out, width, height, spec.title);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = skills[i];
    const double mean_frac = m1 > m0 ? (s.mean - m0) / (m1 - m0) : 0.5;
    const double var_frac = v1 > v0 ? (s.variance - v0) / (v1 - v0) : 0.5;
    const double r = kMinRadius + (kMaxRadius - kMinRadius) * mean_frac;
    // Lower variance (more certainty) is darker.
    const double opacity = kMinOpacity + (1.0 - kMinOpacity) * (1.0 - var_frac);
    const double cx = x0 + cell * (static_cast<double>(i % cols) + 0.5);
    const double cy = y0 + cell * (static_cast<double>(i / cols) + 0.5);
    out << "  <circle class=\"bubble\" data-kc=\"" << s.kc_id << "\" data-mean=\"" << exact(s.mean)
        << "\" data-variance=\"" << exact(s.variance) << "\" cx=\"" << px(cx) << "\" cy=\"" << px(cy) << "\" r=\""
        << px(r) << "\" fill=\"#1f5f8b\" fill-opacity=\"" << px(opacity) << "\"/>\n";
    out << "  <text class=\"kc-label\" x=\"" << px(cx) << "\" y=\"" << px(cy + kMaxRadius + 10)
        << "\" text-anchor=\"middle\" font-size=\"10\">" << escape(kc_label(s.kc_id, titles)) << "</text>\n";
  }
  close_svg(out);
  return out.str();
}

std::string render_line(const std::vector<HistoryPoint>& history, const PlotSpec& spec) {
  if (history.empty()) throw Error(ErrorKind::EmptyHistory, "no history points");
  const bool with_band =
      std::all_of(history.begin(), history.end(), [](const auto& p) { return p.variance.has_value(); });

  double lo = history.front().mean;
  double hi = lo;
  double t0 = history.front().t;
  double t1 = t0;
  for (const auto& p : history) {
    const auto ci = with_band ? confidence_interval(p.mean, *p.variance) : Interval{p.mean, p.mean};
    lo = std::min(lo, ci.lo);
    hi = std::max(hi, ci.hi);
    t0 = std::min(t0, p.t);
    t1 = std::max(t1, p.t);
  }
  const double width = spec.width;
  const double height = spec.height;
  const auto axis = make_axis(lo, hi, kMarginTop, height - kMarginBottom);
  const double x_left = kMarginLeft;
  const double x_right = width - kMarginRight;
  auto x = [&](double t) { return t1 > t0 ? x_left + (t - t0) / (t1 - t0) * (x_right - x_left) : (x_left + x_right) / 2; };

  std::ostringstream out;
  open_svg(out, width, height, spec.title);
  draw_value_axis(out, axis, x_left, x_right, "Skill mean");
  if (with_band) {
    out << "  <polygon class=\"band\" fill=\"#4c72b0\" fill-opacity=\"0.25\" points=\"";
    for (const auto& p : history) out << px(x(p.t)) << ',' << px(axis.y(confidence_interval(p.mean, *p.variance).hi)) << ' ';
    for (auto it = history.rbegin(); it != history.rend(); ++it)
      out << px(x(it->t)) << ',' << px(axis.y(confidence_interval(it->mean, *it->variance).lo)) << ' ';
    out << "\"/>\n";
  }
  out << "  <polyline class=\"mean\" fill=\"none\" stroke=\"#4c72b0\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < history.size(); ++i) {
    if (i) out << ' ';
    out << px(x(history[i].t)) << ',' << px(axis.y(history[i].mean));
  }
  out << "\"/>\n";
  out << "  <text class=\"axis-label\" x=\"" << px((x_left + x_right) / 2) << "\" y=\"" << px(height - 24)
      << "\" text-anchor=\"middle\" font-size=\"12\">Time</text>\n";
  close_svg(out);
  return out.str();
}

std::string render_state(const LearnerState& state, const PlotSpec& spec, const KcTitles& titles) {
  const auto skills = export_state(state, std::max<std::size_t>(spec.top_k, 1));
  switch (spec.kind) {
    case PlotKind::Bar: return render_bar(skills, spec, titles);
    case PlotKind::Dot: return render_dot(skills, spec, titles);
    case PlotKind::Bubble: return render_bubble(skills, spec, titles);
    case PlotKind::Line: break;
  }
  throw Error(ErrorKind::InvalidArgument, "line plots need a skill history, not a state snapshot");
}

}  // namespace truelearn
