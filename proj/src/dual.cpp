#include "depbound/dual.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iterator>
#include <string>
#include <vector>

#include "depbound/numeric.hpp"

namespace depbound {

namespace {

[[noreturn]] void fail(const char* code, const std::string& msg) { throw Error(code, msg); }

void require(bool ok, const char* code, const std::string& msg) {
    if (!ok) fail(code, msg);
}

// Probability levels for quantile-anchored starting points.
constexpr double kLevels[] = {1e-5,  1e-4,  1e-3,  0.005, 0.01,  0.02,  0.05,
                              0.08,  0.12,  0.17,  0.23,  0.30,  0.38,  0.46,
                              0.54,  0.62,  0.70,  0.77,  0.83,  0.88,  0.92,
                              0.95,  0.97,  0.985, 0.995, 0.999, 0.9999};

// Anchor configurations whose exact value sits on the target level compute
// with last-bit noise; the pad keeps them from reading as strictly below it.
constexpr double kLevelPad = 1e-12;

// Smallest x with value(x) strictly under alpha. Brackets by geometric
// widening, then bisects keeping value(lo) >= alpha > value(hi), and returns
// the high end so the result itself satisfies the strict inequality.
double invert_decreasing(const std::function<double(double)>& value, double lo, double hi,
                         double alpha) {
    if (!(lo < hi)) lo = hi - 1e-3 * (1.0 + std::abs(hi));
    auto below = [&](double x) { return value(x) < alpha - kLevelPad; };
    double step = std::max(1.0, 0.1 * (1.0 + std::abs(hi)));
    int guard = 0;
    while (!below(hi)) {
        require(++guard <= 60, "BracketFailed",
                "no threshold pushes the dual value under the target");
        hi += step;
        step *= 2.0;
    }
    step = std::max(1.0, 0.1 * (1.0 + std::abs(lo)));
    guard = 0;
    while (below(lo)) {
        require(++guard <= 60, "BracketFailed",
                "dual value stays under the target arbitrarily far down");
        hi = lo;
        lo -= step;
        step *= 2.0;
    }
    double tol = 1e-8 * (1.0 + (hi - lo));
    for (int it = 0; it < 200 && hi - lo > tol; ++it) {
        double mid = 0.5 * (lo + hi);
        if (below(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

}  // namespace

double survival_window_integral(const QuantileModel& m, double lo, double hi) {
    require(!std::isnan(lo) && !std::isnan(hi), "BadInput", "window endpoints must not be NaN");
    require(lo <= hi, "BadInput", "window needs lo <= hi");
    if (lo == hi) return 0.0;
    require(lo > -kInf, "NonFiniteIntegrand", "survival integral diverges toward minus infinity");
    if (hi == kInf) {
        require(m.upper_tail_finite, "NonFiniteIntegrand",
                "survival integral diverges over an unbounded window");
        double ul = cdf(m, lo);
        double v = quantile_window_integral(m, ul, 1.0) - lo * (1.0 - ul);
        return std::max(v, 0.0);
    }
    // integrate 1 - F by parts: the quantile integral covers the band between
    // the two cdf levels, the rest is rectangles
    double ul = cdf(m, lo);
    double uh = cdf(m, hi);
    double v = quantile_window_integral(m, ul, uh) - lo * (uh - ul) + (hi - lo) * (1.0 - uh);
    return std::max(v, 0.0);
}

DualEvaluation d_n(const std::vector<QuantileModel>& marginals, double x,
                   const OptimizerOptions& opts) {
    const std::size_t n = marginals.size();
    require(n >= 1, "BadInput", "need at least one marginal");
    require(std::isfinite(x), "BadInput", "threshold must be finite");
    require(opts.max_evals >= 1 && opts.tol > 0.0, "BadInput", "optimizer options must be positive");

    DualEvaluation ev;
    ev.x = x;

    std::vector<double> tops(n);
    for (std::size_t i = 0; i < n; ++i) tops[i] = left_quantile(marginals[i], 1.0);
    bool tops_finite = std::all_of(tops.begin(), tops.end(), [](double v) { return v < kInf; });
    if (tops_finite) {
        double top = 0.0;
        for (double v : tops) top += v;
        if (x >= top) {
            // every window can sit flush against the top of its support,
            // where the survival function vanishes
            double shift = ((x - top) + 1e-9 * (1.0 + std::abs(x))) / (2.0 * static_cast<double>(n));
            ev.value = 0.0;
            ev.r = tops;
            for (double& ri : ev.r) ri -= shift;
            return ev;
        }
    }

    const double margin = 1e-12 * (1.0 + std::abs(x));
    long evals = 0;
    const long budget = std::max<long>(64, opts.max_evals);

    // The closed-form window integral carries cancellation noise of order
    // |endpoint| * eps when the window is far from the mass, and the search
    // would otherwise chase those phantom dips below flat plateaus. Windows
    // entirely past the mass on either side therefore get their exact values.
    auto window_term = [&](const QuantileModel& m, double lo, double width) -> double {
        if (cdf(m, lo) >= 1.0) return 0.0;
        double hi = lo + width;
        if (cdf(m, hi) <= 0.0) return width;
        return survival_window_integral(m, lo, hi);
    };
    auto objective = [&](const std::vector<double>& r) -> double {
        double s = 0.0;
        for (double ri : r) s += ri;
        double width = x - s;
        if (!(width > margin)) return kInf;
        ++evals;
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            acc += window_term(marginals[i], r[i], width);
        }
        return acc / width;
    };

    bool has_best = false;
    double best_v = kInf;
    std::vector<double> best_r;
    auto consider = [&](const std::vector<double>& r, double v) {
        if (!std::isfinite(v)) return;
        double eps = has_best ? 1e-12 * (1.0 + std::abs(best_v)) : 0.0;
        if (!has_best || v < best_v - eps) {
            has_best = true;
            best_v = v;
            best_r = r;
        }
    };

    auto level_point = [&](double u) {
        std::vector<double> r(n);
        for (std::size_t i = 0; i < n; ++i) r[i] = left_quantile(marginals[i], u);
        return r;
    };
    auto finite_point = [](const std::vector<double>& r) {
        for (double ri : r) {
            if (!std::isfinite(ri)) return false;
        }
        return true;
    };

    // The descent start is chosen among interior anchors only. Deep equal
    // splits flatten toward the plateau and their values still count, but a
    // descent launched from that flat region goes nowhere.
    bool has_start = false;
    double start_v = kInf;
    std::vector<double> start_r;
    auto consider_start = [&](const std::vector<double>& r, double v) {
        consider(r, v);
        if (std::isfinite(v) && v < start_v) {
            has_start = true;
            start_v = v;
            start_r = r;
        }
    };

    // anchors that start every window at a common probability level
    const int nlev = static_cast<int>(std::size(kLevels));
    int best_level = -1;
    for (int j = 0; j < nlev; ++j) {
        std::vector<double> r = level_point(kLevels[j]);
        if (!finite_point(r)) continue;
        double v = objective(r);
        if (std::isfinite(v) && v < start_v) best_level = j;
        consider_start(r, v);
    }
    if (best_level >= 0) {
        double ulo = kLevels[std::max(0, best_level - 1)];
        double uhi = kLevels[std::min(nlev - 1, best_level + 1)];
        auto along = [&](double u) { return objective(level_point(u)); };
        double ustar = num::golden_min(along, ulo, uhi, 1e-10);
        std::vector<double> r = level_point(ustar);
        if (finite_point(r)) consider_start(r, objective(r));
    }
    {
        std::vector<double> r(n, (x - 1.0) / static_cast<double>(n));
        consider_start(r, objective(r));
    }

    // deep equal splits; far below every support the averages flatten out
    double s0 = 1.0 + std::abs(x);
    for (int k = 0; k <= 48; ++k) {
        double shift = std::ldexp(s0, k);
        if (!std::isfinite(shift)) break;
        std::vector<double> r(n, (x - shift) / static_cast<double>(n));
        consider(r, objective(r));
    }

    require(has_best, "OptimizerFailed", "no feasible anchor for the inner minimization");
    if (!has_start) {
        start_v = best_v;
        start_r = best_r;
    }

    // Coordinate descent in transfer coordinates: the first n-1 entries are
    // window starts, the last is the shared width, and the final start
    // balances the sum. Sliding one window against the last at constant width
    // decouples the coordinates far better than moving raw starts, where every
    // move also reshapes the width of all windows.
    auto assemble = [&](const std::vector<double>& c) {
        std::vector<double> r(n);
        double s = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            r[i] = c[i];
            s += c[i];
        }
        r[n - 1] = x - c[n - 1] - s;
        return r;
    };
    std::vector<double> coord(n);
    {
        double s = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            coord[i] = start_r[i];
            s += start_r[i];
        }
        coord[n - 1] = x - s - start_r[n - 1];
    }
    double curv = start_v;
    int stalled = 0;
    for (int sweep = 0; sweep < 80 && evals < budget && stalled < 2; ++sweep) {
        double entry = curv;
        for (std::size_t k = 0; k < n && evals < budget; ++k) {
            bool is_width = k + 1 == n;
            auto line = [&](double z) {
                std::vector<double> c = coord;
                c[k] = z;
                return objective(assemble(c));
            };
            double span = 1.0 + std::abs(x) / static_cast<double>(n) + std::abs(coord[k]);
            double lo = is_width ? std::max(margin, coord[k] - span) : coord[k] - span;
            double hi = coord[k] + span;
            for (int grow = 0; grow < 8 && lo < hi; ++grow) {
                double xtol = std::max(opts.tol, 1e-11 * (1.0 + hi - lo));
                double z = num::golden_min(line, lo, hi, xtol);
                double vz = line(z);
                if (std::isfinite(vz) && vz < curv - 1e-13 * (1.0 + std::abs(curv))) {
                    coord[k] = z;
                    curv = vz;
                }
                double w = hi - lo;
                if (z - lo < 1e-6 * w && (!is_width || lo > margin)) {
                    lo = is_width ? std::max(margin, lo - 3.0 * w) : lo - 3.0 * w;
                } else if (hi - z < 1e-6 * w) {
                    hi += 3.0 * w;
                } else {
                    break;
                }
            }
        }
        consider(assemble(coord), curv);
        stalled = curv < entry - 1e-12 * (1.0 + std::abs(entry)) ? 0 : stalled + 1;
    }
    consider(assemble(coord), curv);

    ev.value = std::clamp(best_v, 0.0, static_cast<double>(n));
    ev.r = best_r;
    ev.evaluations = evals;
    return ev;
}

DualBound dual_bound(const std::vector<QuantileModel>& marginals, double t,
                     const OptimizerOptions& opts) {
    const std::size_t n = marginals.size();
    require(n >= 1, "BadInput", "need at least one marginal");
    require(t >= 0.0 && t < 1.0, "OutOfDomain", "level must lie in [0,1)");
    const double alpha = 1.0 - t;

    OptimizerOptions inner = opts;
    inner.max_evals = std::max<long>(2000, opts.max_evals / 25);

    long total = 0;
    auto dval = [&](double x) {
        DualEvaluation e = d_n(marginals, x, inner);
        total += e.evaluations + 1;
        return e.value;
    };

    double hi = 0.0;
    bool tops_finite = true;
    for (const auto& m : marginals) {
        double q = left_quantile(m, 1.0);
        if (!(q < kInf)) {
            tops_finite = false;
            break;
        }
        hi += q;
    }
    if (!tops_finite) {
        double u = 1.0 - alpha / (4.0 * static_cast<double>(n));
        hi = 0.0;
        for (const auto& m : marginals) hi += right_quantile(m, u);
    }
    require(std::isfinite(hi), "BracketFailed", "no finite upper anchor for the threshold search");

    double lo = 0.0;
    for (const auto& m : marginals) lo += right_quantile(m, t);
    if (!std::isfinite(lo)) lo = hi - std::max(1.0, 0.1 * (1.0 + std::abs(hi)));

    DualBound out;
    out.value = invert_decreasing(dval, lo, hi, alpha);
    DualEvaluation fin = d_n(marginals, out.value, inner);
    out.r = fin.r;
    out.bracketed = true;
    out.evaluations = total + fin.evaluations;
    return out;
}

double reduced_dual_bound(const QuantileModel& m, int n, double t, const OptimizerOptions& opts) {
    require(n >= 1, "BadInput", "count must be positive");
    require(t >= 0.0 && t < 1.0, "OutOfDomain", "level must lie in [0,1)");
    require(opts.max_evals >= 1 && opts.tol > 0.0, "BadInput", "optimizer options must be positive");
    const double alpha = 1.0 - t;
    const double nn = static_cast<double>(n);

    auto dval = [&](double x) -> double {
        double cap = x / nn;
        double margin = 1e-12 * (1.0 + std::abs(cap));
        auto value_at = [&](double a) -> double {
            double width = x - nn * a;
            if (!(width > 0.0)) return kInf;
            return nn * survival_window_integral(m, a, a + width) / width;
        };
        std::vector<double> as;
        for (double u : kLevels) {
            double a = left_quantile(m, u);
            if (std::isfinite(a) && a < cap - margin) as.push_back(a);
        }
        for (int p = -9; p <= 9; ++p) {
            as.push_back(cap - (1.0 + std::abs(cap)) * std::pow(10.0, p));
        }
        std::sort(as.begin(), as.end());
        as.erase(std::unique(as.begin(), as.end()), as.end());

        bool has = false;
        double best = kInf;
        std::size_t bi = 0;
        for (std::size_t i = 0; i < as.size(); ++i) {
            double v = value_at(as[i]);
            if (!std::isfinite(v)) continue;
            double eps = has ? 1e-15 * (1.0 + std::abs(best)) : 0.0;
            if (!has || v < best - eps) {
                has = true;
                best = v;
                bi = i;
            }
        }
        require(has, "OptimizerFailed", "no feasible anchor for the reduced inner minimization");
        double alo = as[bi > 0 ? bi - 1 : bi];
        double ahi = as[bi + 1 < as.size() ? bi + 1 : bi];
        if (alo < ahi) {
            double xtol = std::max(1e-13, 1e-11 * (1.0 + std::abs(cap)));
            double astar = num::golden_min(value_at, alo, ahi, xtol);
            double v = value_at(astar);
            if (std::isfinite(v) && v < best) best = v;
        }
        return std::clamp(best, 0.0, nn);
    };

    double hi;
    double qtop = left_quantile(m, 1.0);
    if (qtop < kInf) {
        hi = nn * qtop;
    } else {
        hi = nn * right_quantile(m, 1.0 - alpha / (4.0 * nn));
    }
    require(std::isfinite(hi), "BracketFailed", "no finite upper anchor for the threshold search");
    double lo = nn * right_quantile(m, t);
    if (!std::isfinite(lo)) lo = hi - std::max(1.0, 0.1 * (1.0 + std::abs(hi)));

    return invert_decreasing(dval, lo, hi, alpha);
}

CorrespondenceReport correspondence(const std::vector<QuantileModel>& marginals,
                                    const SimplexWeights& beta, double x) {
    const std::size_t n = marginals.size();
    require(n >= 1, "BadInput", "need at least one marginal");
    require(std::isfinite(x), "BadInput", "threshold must be finite");
    require(beta.beta.size() == n + 1, "BadInput",
            "weights must have one entry per marginal plus the window");
    require(beta.budget > 0.0 && beta.budget <= 1.0 + 1e-12, "BadInput",
            "budget must lie in (0,1]");
    double sum = 0.0;
    for (double b : beta.beta) {
        require(b >= -1e-12, "DegenerateBeta", "weights must be nonnegative");
        sum += b;
    }
    require(std::abs(sum - beta.budget) <= 1e-9, "DegenerateBeta",
            "weights must sum to the budget");

    for (const auto& m : marginals) {
        bool atomless = false;
        switch (m.family) {
            case Family::Pareto:
            case Family::Uniform:
            case Family::Lognormal:
            case Family::Gamma:
            case Family::Exponential:
            case Family::Cauchy:
                atomless = true;
                break;
            case Family::TableQuantile: {
                atomless = true;
                for (std::size_t k = 1; k < m.grid_q.size(); ++k) {
                    atomless = atomless && m.grid_q[k] > m.grid_q[k - 1];
                }
                break;
            }
            default:
                atomless = false;
        }
        require(atomless, "DiscontinuousMarginal", "anchor levels need atomless marginals");
        if (m.cap < kInf) {
            double below = cdf(m, std::nextafter(m.cap, -kInf));
            require(1.0 - below <= 1e-12, "DiscontinuousMarginal",
                    "value cap concentrates an atom at the cap");
        }
    }

    const double b0 = beta.beta[0];
    CorrespondenceReport rep;
    rep.r.resize(n);
    rep.residuals.resize(n);
    double rsum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double level = std::clamp(1.0 - b0 - beta.beta[i + 1], 0.0, 1.0);
        double ri = level > 0.0 ? left_quantile(marginals[i], level)
                                : right_quantile(marginals[i], 0.0);
        require(std::isfinite(ri), "BadInput", "anchor level hits an unbounded quantile");
        rep.r[i] = ri;
        rsum += ri;
    }
    for (std::size_t i = 0; i < n; ++i) {
        double z = x - rsum + rep.r[i];
        double resid = std::abs(cdf(marginals[i], z) - (1.0 - beta.beta[i + 1]));
        rep.residuals[i] = resid;
        rep.max_residual = std::max(rep.max_residual, resid);
    }
    return rep;
}

}  // namespace depbound
