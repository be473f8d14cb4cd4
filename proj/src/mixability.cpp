#include "depbound/mixability.hpp"

#include <algorithm>
#include <cmath>

namespace depbound {

namespace {

bool monotone_density(const QuantileModel& m) {
    return m.density_shape == DensityShape::DecreasingOnSupport ||
           m.density_shape == DensityShape::IncreasingOnSupport;
}

}  // namespace

CenterInterval center_interval(const std::vector<QuantileModel>& marginals,
                               const OptimizerOptions& opts) {
    if (marginals.empty()) throw Error("BadInput", "need at least one marginal");
    CenterInterval ci;
    ci.low = detail::run_bound(marginals, Direction::LowerQuantile, 1.0, 0.0, opts).value;
    ci.high = detail::run_bound(marginals, Direction::UpperQuantile, 0.0, 0.0, opts).value;
    ci.nonempty = ci.low <= ci.high + 1e-9 * (1.0 + std::abs(ci.high));
    return ci;
}

JmReport jm_check_finite_mean(const std::vector<QuantileModel>& marginals,
                              const OptimizerOptions& opts) {
    if (marginals.empty()) throw Error("BadInput", "need at least one marginal");
    for (const QuantileModel& m : marginals)
        if (!m.mean_finite) throw Error("MeanUndefined", "marginal mean diverges");

    JmReport rep;
    rep.interval = center_interval(marginals, opts);

    bool all_mono = true;
    bool all_dec = true;
    bool all_inc = true;
    for (const QuantileModel& m : marginals) {
        all_mono = all_mono && monotone_density(m);
        all_dec = all_dec && m.density_shape == DensityShape::DecreasingOnSupport;
        all_inc = all_inc && m.density_shape == DensityShape::IncreasingOnSupport;
    }
    if (!all_mono) {
        rep.verdict = JmVerdict::Inconclusive;
        return rep;
    }

    double msum = 0.0;
    for (const QuantileModel& m : marginals) msum += mean(m);

    if (all_dec || all_inc) {
        double max_range = 0.0;
        double slack = 0.0;
        for (const QuantileModel& m : marginals) {
            double lo = right_quantile(m, 0.0);
            double hi = left_quantile(m, 1.0);
            max_range = std::max(max_range, hi - lo);
            slack += all_dec ? mean(m) - lo : hi - mean(m);
        }
        bool ok = std::isfinite(max_range) && std::isfinite(slack) &&
                  max_range <= slack + 1e-9 * (1.0 + std::abs(slack));
        rep.verdict = ok ? JmVerdict::JM : JmVerdict::NotJM;
        return rep;
    }

    double tol = 1e-5 * (1.0 + std::abs(msum));
    bool eq = std::abs(rep.interval.low - msum) <= tol && std::abs(rep.interval.high - msum) <= tol;
    rep.verdict = eq ? JmVerdict::JM : JmVerdict::NotJM;
    return rep;
}

bool jm_check_location_scale(const std::vector<double>& scales) {
    if (scales.empty()) throw Error("BadInput", "need at least one scale");
    double sum = 0.0;
    double mx = 0.0;
    for (double s : scales) {
        if (!(s > 0.0)) throw Error("BadInput", "scales must be positive");
        sum += s;
        mx = std::max(mx, s);
    }
    return 2.0 * mx <= sum * (1.0 + 1e-15);
}

}  // namespace depbound
