#pragma once

#include <vector>

namespace capnav {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

/// Ordinary least squares y = slope*x + intercept. Needs >= 2 distinct x.
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

/// Fractional (average) ranks, 1-based.
std::vector<double> ranks(const std::vector<double>& values);

/// Spearman rank correlation with average ranks for ties. Returns 0 when
/// either series is constant (no ordering to correlate).
double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace capnav
