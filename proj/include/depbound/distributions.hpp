#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace depbound {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Error with a machine-readable code; the CLI maps codes to exit statuses.
struct Error : std::runtime_error {
    std::string code;
    Error(std::string c, const std::string& msg) : std::runtime_error(msg), code(std::move(c)) {}
};

// Extended-real helper: IEEE infinities are legal values; the one thing plain
// doubles cannot express is inf + (-inf), which must never silently become NaN.
struct ExtendedReal {
    double value = 0.0;
    bool undefined = false;
};

ExtendedReal ext_add(ExtendedReal a, double b);

enum class Family {
    Pareto,          // p1 = scale, p2 = theta (tail index)
    Uniform,         // p1 = a, p2 = b
    Lognormal,       // p1 = m, p2 = s
    Gamma,           // p1 = k (shape), p2 = theta (scale)
    Exponential,     // p1 = rate
    Cauchy,          // p1 = loc, p2 = scale
    DiscreteUniform, // atoms, equal mass
    Empirical,       // atoms, equal mass
    PointMass,       // p1 = c
    TableQuantile,   // grid_u/grid_q piecewise-linear quantile
};

enum class DensityShape {
    DecreasingOnSupport,
    IncreasingOnSupport,
    DecreasingBeyond,
    IncreasingBeyond,
    IncreasingBelow,
    DecreasingBelow,
    Unknown,
};

enum class Side { Left, Right };

// A one-dimensional distribution seen purely through its quantile functions.
// Slicing and truncation are carried as a probability window [win_lo, win_hi]
// of the base family plus a value cap, so every transform stays exact.
struct QuantileModel {
    Family family = Family::PointMass;
    double p1 = 0.0;
    double p2 = 0.0;
    std::vector<double> atoms;   // sorted, equal mass 1/m
    std::vector<double> grid_u;  // TableQuantile nodes, grid_u[0]=0, back()=1
    std::vector<double> grid_q;

    double win_lo = 0.0;
    double win_hi = 1.0;
    double cap = kInf;

    DensityShape density_shape = DensityShape::Unknown;
    double shape_level = 0.0;  // threshold level for the *Beyond/*Below shapes

    bool mean_finite = true;
    bool lower_tail_finite = true;  // integral of the quantile near u=0 converges
    bool upper_tail_finite = true;  // near u=1
};

// Factories.
QuantileModel pareto(double scale, double theta);
QuantileModel uniform(double a, double b);
QuantileModel lognormal(double m, double s);
QuantileModel gamma_dist(double k, double theta);
QuantileModel exponential(double rate);
QuantileModel cauchy(double loc, double scale);
QuantileModel discrete_uniform(std::vector<double> values);
QuantileModel empirical(std::vector<double> values);
QuantileModel point_mass(double c);
QuantileModel table_quantile(std::vector<double> us, std::vector<double> qs);

// q-_u for u in (0,1], q+_u for u in [0,1); OutOfDomain otherwise.
double left_quantile(const QuantileModel& m, double u);
double right_quantile(const QuantileModel& m, double u);
double quantile(const QuantileModel& m, double u, Side side);

// Support endpoints: (q+_0, q-_1).
std::pair<double, double> support(const QuantileModel& m);

// Right-continuous CDF F(x) = P(X <= x), exact per family.
double cdf(const QuantileModel& m, double x);

// Integral of the quantile function over [a, b] (may be +-inf; never NaN —
// a doubly divergent full window throws MeanUndefined at the rvar level).
double quantile_window_integral(const QuantileModel& m, double a, double b);

// Average of the quantile over the window [1-beta-alpha, 1-beta].
// ES_a = rvar(m, 0, a); LES_a = rvar(m, 1-a, a); mean = rvar(m, 0, 1).
double rvar(const QuantileModel& m, double beta, double alpha);
double mean(const QuantileModel& m);

// Conditional-slice transforms (all exact; quantile of the result composes
// the window mapping with the base family closed forms).
QuantileModel slice(const QuantileModel& m, double a, double b);
QuantileModel tail_upper(const QuantileModel& m, double t);
QuantileModel truncate_upper(const QuantileModel& m, double cap);

// Density-monotonicity predicates used by sharpness certificates only.
bool density_decreasing_beyond(const QuantileModel& m, double t);
bool density_increasing_below(const QuantileModel& m, double t);

// Parse {"family": "...", "params": {...}} (or "values": [...]) specs.
QuantileModel model_from_json(const std::string& json_text);
std::vector<QuantileModel> models_from_json(const std::string& json_text);

}  // namespace depbound
