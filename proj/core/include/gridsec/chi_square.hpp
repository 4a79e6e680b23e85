#pragma once

namespace gridsec {

// Threshold the source uses for 71 degrees of freedom at 95%. The exact
// quantile is about 91.67; this value is kept for comparison runs.
inline constexpr double kPaperCompatThreshold = 89.5;

// Upper-tail quantile of the chi-square distribution: P(X > tau) = alpha.
// Wilson-Hilferty start refined by Newton steps on the regularized gamma CDF.
double chi_square_threshold(int df, double alpha);

double chi_square_cdf(double x, int df);

}  // namespace gridsec
