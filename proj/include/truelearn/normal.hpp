#pragma once

// Standard normal helpers and the additive truncated-Gaussian correction
// functions used by the TrueSkill-style updates. Evaluations stay finite in
// the far tails by switching to Mills-ratio forms once |t| > 6.

namespace truelearn::normal {

double pdf(double x);
double cdf(double x);
/// Inverse CDF, 0 < p < 1.
double ppf(double p);

/// Mills ratio R(x) = (1 - cdf(x)) / pdf(x).
double mills_ratio(double x);

/// P(lo < Z < hi) for Z ~ N(0,1), accurate when both bounds sit in one tail.
double interval_probability(double lo, double hi);

/// Correction terms for the truncation t > margin (win); t and margin are
/// expressed in units of the performance-difference standard deviation.
double v_win(double t, double margin);
double w_win(double t, double margin);

/// Correction terms for the truncation |t| <= margin (draw).
double v_draw(double t, double margin);
double w_draw(double t, double margin);

}  // namespace truelearn::normal
