#include "truelearn/normal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

namespace truelearn::normal {

namespace {

constexpr double kTail = 6.0;
constexpr int kFractionTerms = 80;

}  // namespace

double pdf(double x) { return std::exp(-0.5 * x * x) * std::numbers::inv_sqrtpi / std::numbers::sqrt2; }

double cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double ppf(double p) { return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p); }

double mills_ratio(double x) {
  if (x < kTail) return 0.5 * std::erfc(x / std::numbers::sqrt2) / pdf(x);
  // Laplace continued fraction x + 1/(x + 2/(x + 3/(x + ...))).
  double f = x;
  for (int k = kFractionTerms; k >= 1; --k) f = x + k / f;
  return 1.0 / f;
}

double interval_probability(double lo, double hi) {
  if (hi <= lo) return 0.0;
  if (lo > 0.0) return cdf(-lo) - cdf(-hi);
  return cdf(hi) - cdf(lo);
}

double v_win(double t, double margin) {
  const double s = t - margin;
  return 1.0 / mills_ratio(-s);
}

double w_win(double t, double margin) {
  const double s = t - margin;
  const double v = v_win(t, margin);
  return std::clamp(v * (v + s), 0.0, 1.0);
}

namespace {

struct DrawTerms {
  double v;
  double w;
};

// Assumes t <= 0 so the interval [-margin - t, margin - t] has b >= |a|.
DrawTerms draw_terms_nonpositive(double t, double margin) {
  const double a = -margin - t;
  const double b = margin - t;
  if (a > 0.0) {
    // Both bounds in the upper tail; factor pdf(a) out of every term.
    const double e = std::exp(-0.5 * (b - a) * (b + a));
    const double denom = mills_ratio(a) - mills_ratio(b) * e;
    const double v = (1.0 - e) / denom;
    const double w = v * v + (b * e - a) / denom;
    return {v, w};
  }
  const double denom = cdf(b) - cdf(a);
  const double v = (pdf(a) - pdf(b)) / denom;
  const double w = v * v + (b * pdf(b) - a * pdf(a)) / denom;
  return {v, w};
}

DrawTerms draw_terms(double t, double margin) {
  if (t > 0.0) {
    auto mirrored = draw_terms_nonpositive(-t, margin);
    return {-mirrored.v, mirrored.w};
  }
  return draw_terms_nonpositive(t, margin);
}

}  // namespace

double v_draw(double t, double margin) { return draw_terms(t, margin).v; }

double w_draw(double t, double margin) { return std::clamp(draw_terms(t, margin).w, 0.0, 1.0); }

}  // namespace truelearn::normal
