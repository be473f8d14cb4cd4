#pragma once

#include <vector>

#include "depbound/bounds.hpp"
#include "depbound/distributions.hpp"

namespace depbound {

// Range of constants the sum can be forced to concentrate on: low is the
// best-case level-1 bound, high the worst-case level-0 bound. The tuple is
// jointly mixable exactly when the sum admits a constant coupling, which
// requires low <= high.
struct CenterInterval {
    double low = 0.0;
    double high = 0.0;
    bool nonempty = false;
};

enum class JmVerdict { JM, NotJM, Inconclusive };

struct JmReport {
    JmVerdict verdict = JmVerdict::Inconclusive;
    CenterInterval interval;
};

CenterInterval center_interval(const std::vector<QuantileModel>& marginals,
                               const OptimizerOptions& opts = {});

// Decides mixability for marginals with finite means. Conclusive only when
// every density is monotone on its support; otherwise Inconclusive with the
// center interval attached. Throws MeanUndefined if any mean is not finite.
JmReport jm_check_finite_mean(const std::vector<QuantileModel>& marginals,
                              const OptimizerOptions& opts = {});

// Location-scale family with symmetric unimodal density: mixable iff twice
// the largest scale is at most the sum of the scales.
bool jm_check_location_scale(const std::vector<double>& scales);

}  // namespace depbound
