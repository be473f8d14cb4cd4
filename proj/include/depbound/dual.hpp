#pragma once

#include <vector>

#include "depbound/bounds.hpp"
#include "depbound/distributions.hpp"

namespace depbound {

// One evaluation of the dual function: the inf over window anchors r with
// sum(r) < x of the averaged survival integrals. value always lands in [0, n].
struct DualEvaluation {
    double x = 0.0;
    double value = 0.0;
    std::vector<double> r;
    long evaluations = 0;
};

struct DualBound {
    double value = 0.0;
    std::vector<double> r;  // inner minimizer at the returned threshold
    bool bracketed = false;
    long evaluations = 0;
};

// Verification of the link between a weight vector and the dual anchors:
// r_i is placed so that F_i(r_i) = 1 - b_0 - b_i, and residuals report how far
// F_i(x - sum(r) + r_i) lands from 1 - b_i.
struct CorrespondenceReport {
    std::vector<double> r;
    std::vector<double> residuals;
    double max_residual = 0.0;
};

// Integral of P(X > y) over [lo, hi], computed from the quantile-side closed
// forms. lo = -inf always diverges; hi = +inf diverges when the upper tail
// has an unbounded integral.
double survival_window_integral(const QuantileModel& m, double lo, double hi);

DualEvaluation d_n(const std::vector<QuantileModel>& marginals, double x,
                   const OptimizerOptions& opts = {});

// Smallest x with d_n below 1 - t, located by bisection; an upper bound for
// the worst-case quantile of the sum at level t.
DualBound dual_bound(const std::vector<QuantileModel>& marginals, double t,
                     const OptimizerOptions& opts = {});

// Homogeneous form: n copies of one marginal, anchors restricted to a common
// scalar a < x/n.
double reduced_dual_bound(const QuantileModel& m, int n, double t,
                          const OptimizerOptions& opts = {});

CorrespondenceReport correspondence(const std::vector<QuantileModel>& marginals,
                                    const SimplexWeights& beta, double x);

}  // namespace depbound
