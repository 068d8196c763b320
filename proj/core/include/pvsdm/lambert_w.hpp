#pragma once

namespace pvsdm {

/// Principal branch W0(x) for x >= -1/e, by Halley iteration to ~1e-15
/// relative. Throws DomainError below the branch point.
double lambert_w0(double x);

/// W0(exp(z)) without forming exp(z). For large z this solves
/// w + ln(w) = z, so arguments far beyond the double range are fine.
double lambert_w0_of_exp(double z);

}  // namespace pvsdm
