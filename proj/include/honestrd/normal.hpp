#pragma once

namespace honestrd {

double normal_pdf(double z);
double normal_cdf(double z);

//! Inverse of normal_cdf. Throws DomainError unless 0 < p < 1.
double normal_quantile(double p);

//! 1-alpha quantile of |N(b,1)|, b >= 0.
double cv(double b, double alpha);

//! Smallest t >= 0 with cv(t, alpha) >= c; 0 when c <= cv(0, alpha).
double cv_inverse(double c, double alpha);

} // namespace honestrd
