#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "depbound/distributions.hpp"

namespace depbound {

// Weight vector (b_0, b_1, ..., b_n) on the scaled simplex: entries are
// nonnegative and sum to budget. b_0 is the shared averaging window width.
struct SimplexWeights {
    std::vector<double> beta;
    double budget = 1.0;
};

enum class Direction { UpperQuantile, LowerQuantile, UpperRVaR, LowerRVaR };

enum class Sharpness {
    NLe2,
    DecreasingDensities,
    IncreasingDensities,
    LowerMutualExclusive,
    UpperMutualExclusive,
    JointlyMixable,
    NotCertified,
};

struct OptimizerOptions {
    int grid_res = 12;        // lattice subdivisions per axis
    long max_evals = 10000;   // evaluation budget for the refinement stages
    double tol = 1e-9;        // termination diameter / step size
    std::uint64_t seed = 0;   // drives the Latin-hypercube seeding for n > 3
};

struct BoundResult {
    double value = 0.0;
    SimplexWeights optimizer;
    Direction direction = Direction::UpperQuantile;
    Sharpness sharpness = Sharpness::NotCertified;
    long evaluations = 0;
    bool converged = false;
};

// Sum of upper-window averages R_{b_i, b_0}; at b_0 = 0 the pure left-quantile
// sum. Signed infinities are legal values; an inf - inf mix throws UndefinedForm.
double r_plus(const std::vector<QuantileModel>& marginals, const SimplexWeights& w);

// Mirror image: sum of R_{1 - b_i - b_0, b_0}; at b_0 = 0 the right-quantile sum.
double r_minus(const std::vector<QuantileModel>& marginals, const SimplexWeights& w);

// Worst-case quantile of the sum at level t: minimize r_plus over the closure
// of (1-t) times the simplex.
BoundResult upper_quantile_bound(const std::vector<QuantileModel>& marginals, double t,
                                 const OptimizerOptions& opts = {});

// Best-case quantile at level t: maximize r_minus over t times the simplex.
BoundResult lower_quantile_bound(const std::vector<QuantileModel>& marginals, double t,
                                 const OptimizerOptions& opts = {});

// Worst-case RVaR over the window [1-t-s, 1-t]: b_0 >= s, budget t+s.
BoundResult upper_rvar_bound(const std::vector<QuantileModel>& marginals, double t, double s,
                             const OptimizerOptions& opts = {});

// Best-case counterpart: b_0 >= s, budget 1-t.
BoundResult lower_rvar_bound(const std::vector<QuantileModel>& marginals, double t, double s,
                             const OptimizerOptions& opts = {});

// Homogeneous one-dimensional forms: n identical marginals, scalar window
// parameter. Return (value, argmin/argmax alpha).
std::pair<double, double> reduced_upper_bound(const QuantileModel& m, int n, double t);
std::pair<double, double> reduced_lower_bound(const QuantileModel& m, int n, double t);

// Which structural condition, if any, certifies the bound as attained.
Sharpness sharpness_certificate(const std::vector<QuantileModel>& marginals, double t,
                                Direction direction, const OptimizerOptions& opts = {});

struct MeanSandwich {
    double lower = 0.0;
    double mean_sum = 0.0;
    double upper = 0.0;
};

// (best-case level-1 bound, sum of means, worst-case level-0 bound); the three
// are returned in that order and verified to be decreasing.
MeanSandwich mean_sandwich(const std::vector<QuantileModel>& marginals,
                           const OptimizerOptions& opts = {});

// Cap every marginal at the sum of the per-component quantiles at 1-(1-t)/n.
// upper_quantile_bound applies this automatically when some marginal is
// nonnegative with an unbounded mean; the bound value is unchanged by it.
std::vector<QuantileModel> truncate_for_level(const std::vector<QuantileModel>& marginals,
                                              double t);

namespace detail {
// Optimization core without the sharpness pass; the mixability checks call
// this to avoid mutual recursion. s is ignored for the quantile directions.
BoundResult run_bound(const std::vector<QuantileModel>& marginals, Direction dir, double t,
                      double s, const OptimizerOptions& opts);
}

}  // namespace depbound
