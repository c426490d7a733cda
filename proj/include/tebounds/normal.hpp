#pragma once

namespace tebounds {

/// Standard normal CDF.
double normal_cdf(double x);

/// Inverse standard normal CDF (Wichura's AS241, about 1e-16 relative).
/// Throws DomainError unless 0 < p < 1.
double normal_quantile(double p);

}  // namespace tebounds
