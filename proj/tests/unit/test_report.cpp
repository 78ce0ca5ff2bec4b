#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "svg_marks.hpp"
#include "truelearn/error.hpp"
#include "truelearn/report.hpp"

using namespace truelearn;
using svgcheck::of_class;
using svgcheck::parse_marks;

namespace {

LearnerState random_state(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> var(0.01, 2.0);
  LearnerState s;
  for (int k = 0; k < n; ++k) s.skills[k] = {z(rng), var(rng)};
  return s;
}

}  // namespace

TEST_CASE("confidence interval") {
  const auto ci = confidence_interval(1.0, 4.0);
  CHECK(ci.lo == doctest::Approx(1.0 - 1.96 * 2.0));
  CHECK(ci.hi == doctest::Approx(1.0 + 1.96 * 2.0));
}

TEST_CASE("plot kinds") {
  CHECK(parse_plot_kind("bubble") == PlotKind::Bubble);
  CHECK_FALSE(parse_plot_kind("pie").has_value());
}

TEST_CASE("bar and dot charts encode means and intervals") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto state = random_state(rng, 3 + trial);
    for (auto kind : {PlotKind::Bar, PlotKind::Dot}) {
      PlotSpec spec;
      spec.kind = kind;
      spec.top_k = 10;
      const auto marks = parse_marks(render_state(state, spec));
      const auto bars = of_class(marks, kind == PlotKind::Bar ? "bar" : "dot");
      const auto whiskers = of_class(marks, "whisker");
      REQUIRE(bars.size() == std::min<std::size_t>(10, state.skills.size()));
      REQUIRE(whiskers.size() == bars.size());
      for (std::size_t i = 0; i < bars.size(); ++i) {
        const auto& sk = state.skills.at(static_cast<KcId>(bars[i].num("data-kc")));
        CHECK(bars[i].num("data-mean") == sk.mean);
        CHECK(bars[i].num("data-variance") == sk.variance);
        const auto ci = confidence_interval(sk.mean, sk.variance);
        CHECK(whiskers[i].num("data-lo") == doctest::Approx(ci.lo));
        CHECK(whiskers[i].num("data-hi") == doctest::Approx(ci.hi));
        if (i > 0) {
          CHECK(bars[i].num("data-mean") <= bars[i - 1].num("data-mean"));
          if (kind == PlotKind::Bar) CHECK(bars[i].num("height") <= bars[i - 1].num("height") + 0.01);
          else CHECK(bars[i].num("cy") >= bars[i - 1].num("cy") - 0.01);
        }
      }
    }
  }
}

TEST_CASE("bubble size follows the mean and opacity falls with variance") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const auto state = random_state(rng, 2 + trial);
    PlotSpec spec;
    spec.kind = PlotKind::Bubble;
    const auto bubbles = of_class(parse_marks(render_state(state, spec)), "bubble");
    for (const auto& a : bubbles) {
      for (const auto& b : bubbles) {
        if (a.num("data-mean") < b.num("data-mean")) CHECK(a.num("r") <= b.num("r") + 0.01);
        if (a.num("data-variance") < b.num("data-variance"))
          CHECK(a.num("fill-opacity") >= b.num("fill-opacity") - 0.01);
      }
    }
  }
}

TEST_CASE("line chart draws a band only with variances") {
  std::vector<HistoryPoint> h{{0, 0.1, 0.5}, {1, 0.3, 0.4}, {2, 0.2, 0.2}};
  PlotSpec spec;
  spec.kind = PlotKind::Line;
  auto marks = parse_marks(render_line(h, spec));
  CHECK(of_class(marks, "band").size() == 1);
  CHECK(of_class(marks, "mean").size() == 1);
  h[1].variance.reset();
  marks = parse_marks(render_line(h, spec));
  CHECK(of_class(marks, "band").empty());
  CHECK_THROWS_AS(render_line({}, spec), Error);
  CHECK_THROWS_AS(render_state(LearnerState{}, spec), Error);
}

TEST_CASE("titles are escaped and used as labels") {
  LearnerState s;
  s.skills[1] = {0.5, 0.1};
  PlotSpec spec;
  spec.title = "A <b> & \"c\"";
  const auto svg = render_state(s, spec, {{1, "Graphs & trees"}});
  const auto marks = parse_marks(svg);
  CHECK(svg.find("Graphs &amp; trees") != std::string::npos);
  CHECK(of_class(marks, "kc-label").size() == 1);
  CHECK_THROWS_AS(render_bar({}, spec), Error);
}

TEST_CASE("rendering is a pure function") {
  std::mt19937_64 rng(9);
  const auto state = random_state(rng, 12);
  for (auto kind : {PlotKind::Bar, PlotKind::Dot, PlotKind::Bubble}) {
    PlotSpec spec;
    spec.kind = kind;
    CHECK(render_state(state, spec) == render_state(LearnerState(state), spec));
  }
}
