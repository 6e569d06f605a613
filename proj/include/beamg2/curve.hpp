#pragma once

#include <vector>

namespace beamg2 {

/// A g2(tau) curve on an ascending lag grid with per-point statistical
/// uncertainty (zero for analytic curves).
struct CorrelationCurve {
    std::vector<double> tau;
    std::vector<double> g2;
    std::vector<double> sigma;
};

} // namespace beamg2
