#include "depbound/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include <boost/math/special_functions/gamma.hpp>

#include "depbound/numeric.hpp"
#include "json.hpp"

namespace depbound {

namespace {

[[noreturn]] void fail(const char* code, const std::string& msg) { throw Error(code, msg); }

void require(bool ok, const char* code, const std::string& msg) {
    if (!ok) fail(code, msg);
}

bool is_atomic(Family f) { return f == Family::DiscreteUniform || f == Family::Empirical; }

double gamma_unit_quantile(double k, double v) {
    if (v <= 0.0) return 0.0;
    if (v >= 1.0) return kInf;
    double x = boost::math::gamma_p_inv(k, v);
    // polish with a bracket-safeguarded Newton step until |F(x) - v| <= 1e-12
    for (int it = 0; it < 40; ++it) {
        double err = boost::math::gamma_p(k, x) - v;
        if (std::abs(err) <= 1e-12) break;
        double d = boost::math::gamma_p_derivative(k, x);
        double step = d > 0.0 ? err / d : 0.0;
        double next = x - step;
        if (!(next > 0.0) || !std::isfinite(next)) next = 0.5 * x;
        x = next;
    }
    return x;
}

double cauchy_quantile(double loc, double sc, double v) {
    if (v <= 0.0) return -kInf;
    if (v >= 1.0) return kInf;
    if (v == 0.5) return loc;
    // cotangent forms keep precision in both tails
    if (v < 0.5) return loc - sc / std::tan(M_PI * v);
    return loc + sc / std::tan(M_PI * (1.0 - v));
}

double table_quantile_at(const QuantileModel& m, double v) {
    const auto& U = m.grid_u;
    const auto& Q = m.grid_q;
    if (v <= 0.0) return Q.front();
    if (v >= 1.0) return Q.back();
    std::size_t i = std::upper_bound(U.begin(), U.end(), v) - U.begin();
    double f = (v - U[i - 1]) / (U[i] - U[i - 1]);
    return Q[i - 1] + f * (Q[i] - Q[i - 1]);
}

// Quantile of the base family (window and cap not yet applied); for continuous
// families both sides coincide, so only the atomic ones branch on side.
double base_quantile(const QuantileModel& m, double v, Side side) {
    switch (m.family) {
        case Family::Pareto:
            if (v >= 1.0) return kInf;
            return m.p1 * std::pow(1.0 - v, -1.0 / m.p2);
        case Family::Uniform:
            return m.p1 + (m.p2 - m.p1) * std::min(std::max(v, 0.0), 1.0);
        case Family::Lognormal:
            if (v <= 0.0) return 0.0;
            if (v >= 1.0) return kInf;
            return std::exp(m.p1 + m.p2 * num::normal_quantile(v));
        case Family::Gamma:
            return m.p2 * gamma_unit_quantile(m.p1, v);
        case Family::Exponential:
            if (v >= 1.0) return kInf;
            return -std::log1p(-v) / m.p1;
        case Family::Cauchy:
            return cauchy_quantile(m.p1, m.p2, v);
        case Family::PointMass:
            return m.p1;
        case Family::TableQuantile:
            return table_quantile_at(m, v);
        case Family::DiscreteUniform:
        case Family::Empirical: {
            const auto sz = static_cast<double>(m.atoms.size());
            long k;
            if (side == Side::Left) {
                k = static_cast<long>(std::ceil(v * sz - 1e-12));
                k = std::max(1L, std::min(k, static_cast<long>(m.atoms.size())));
                return m.atoms[static_cast<std::size_t>(k - 1)];
            }
            k = static_cast<long>(std::floor(v * sz + 1e-12));
            k = std::max(0L, std::min(k, static_cast<long>(m.atoms.size()) - 1));
            return m.atoms[static_cast<std::size_t>(k)];
        }
    }
    fail("BadInput", "unhandled family");
}

// Right-continuous CDF of the base family.
double base_cdf(const QuantileModel& m, double x) {
    switch (m.family) {
        case Family::Pareto:
            return x < m.p1 ? 0.0 : 1.0 - std::pow(m.p1 / x, m.p2);
        case Family::Uniform:
            return std::min(std::max((x - m.p1) / (m.p2 - m.p1), 0.0), 1.0);
        case Family::Lognormal:
            return x <= 0.0 ? 0.0 : num::normal_cdf((std::log(x) - m.p1) / m.p2);
        case Family::Gamma:
            return x <= 0.0 ? 0.0 : boost::math::gamma_p(m.p1, x / m.p2);
        case Family::Exponential:
            return x <= 0.0 ? 0.0 : -std::expm1(-m.p1 * x);
        case Family::Cauchy:
            return 0.5 + std::atan((x - m.p1) / m.p2) / M_PI;
        case Family::PointMass:
            return x >= m.p1 ? 1.0 : 0.0;
        case Family::TableQuantile: {
            const auto& U = m.grid_u;
            const auto& Q = m.grid_q;
            if (x < Q.front()) return 0.0;
            if (x >= Q.back()) return 1.0;
            std::size_t j = std::upper_bound(Q.begin(), Q.end(), x) - Q.begin();
            // Q[j-1] <= x < Q[j], a strictly increasing stretch of the table
            return U[j - 1] + (U[j] - U[j - 1]) * (x - Q[j - 1]) / (Q[j] - Q[j - 1]);
        }
        case Family::DiscreteUniform:
        case Family::Empirical: {
            auto cnt = std::upper_bound(m.atoms.begin(), m.atoms.end(), x) - m.atoms.begin();
            return static_cast<double>(cnt) / static_cast<double>(m.atoms.size());
        }
    }
    fail("BadInput", "unhandled family");
}

// Divergence of the base quantile integral at the ends of [0,1].
bool base_lower_integrable(const QuantileModel& m) { return m.family != Family::Cauchy; }

bool base_upper_integrable(const QuantileModel& m) {
    if (m.family == Family::Cauchy) return false;
    if (m.family == Family::Pareto) return m.p2 > 1.0;
    return true;
}

double log_sin_pi(double v) {
    double t = std::min(v, 1.0 - v);  // sin(pi v) is symmetric about 1/2
    return std::log(std::sin(M_PI * t));
}

double atoms_window_integral(const std::vector<double>& atoms, double A, double B) {
    const auto sz = static_cast<double>(atoms.size());
    // for a window a few ulp wide of a cell edge, the sliver of the neighbor
    // cell is a rounding artifact, and dividing by a thin width amplifies it;
    // wide windows dilute the same few ulp to nothing, so leave them alone
    if (B - A < 1e-6) {
        auto snap = [&](double u) {
            double edge = std::round(u * sz) / sz;
            return std::abs(u - edge) <= 4e-16 ? edge : u;
        };
        A = snap(A);
        B = snap(B);
    }
    long k0 = std::max(0L, static_cast<long>(std::floor(A * sz)));
    long k1 = std::min(static_cast<long>(atoms.size()), static_cast<long>(std::ceil(B * sz)));
    double s = 0.0;
    for (long k = k0; k < k1; ++k) {
        double lo = std::max(A, static_cast<double>(k) / sz);
        double hi = std::min(B, static_cast<double>(k + 1) / sz);
        if (hi > lo) s += atoms[static_cast<std::size_t>(k)] * (hi - lo);
    }
    return s;
}

// Exact integral of the base quantile over [A, B] within [0, 1]; signed
// infinity when one tail makes it diverge, MeanUndefined when both do.
double base_window_integral(const QuantileModel& m, double A, double B) {
    if (B <= A) return 0.0;
    bool lo_div = A <= 0.0 && !base_lower_integrable(m);
    bool hi_div = B >= 1.0 && !base_upper_integrable(m);
    if (lo_div && hi_div) fail("MeanUndefined", "both tail integrals diverge");
    if (lo_div) return -kInf;
    if (hi_div) return kInf;
    switch (m.family) {
        case Family::Pareto: {
            if (m.p2 == 1.0) return m.p1 * (std::log1p(-A) - (B >= 1.0 ? -kInf : std::log1p(-B)));
            double p = 1.0 - 1.0 / m.p2;
            double hi = B >= 1.0 ? 0.0 : std::pow(1.0 - B, p);
            return m.p1 / p * (std::pow(1.0 - A, p) - hi);
        }
        case Family::Uniform:
            // factored so thin windows stay well conditioned
            return (B - A) * (m.p1 + 0.5 * (m.p2 - m.p1) * (A + B));
        case Family::Lognormal: {
            double e = std::exp(m.p1 + 0.5 * m.p2 * m.p2);
            double za = A <= 0.0 ? -kInf : num::normal_quantile(A);
            double zb = B >= 1.0 ? kInf : num::normal_quantile(B);
            return e * (num::normal_cdf(zb - m.p2) - num::normal_cdf(za - m.p2));
        }
        case Family::Gamma: {
            double ta = A <= 0.0 ? 0.0 : boost::math::gamma_p(m.p1 + 1.0, gamma_unit_quantile(m.p1, A));
            double tb = B >= 1.0 ? 1.0 : boost::math::gamma_p(m.p1 + 1.0, gamma_unit_quantile(m.p1, B));
            return m.p1 * m.p2 * (tb - ta);
        }
        case Family::Exponential: {
            auto anti = [&](double v) {
                if (v >= 1.0) return 0.0;
                double om = 1.0 - v;
                return -om * (1.0 - std::log(om)) / m.p1;
            };
            return anti(B) - anti(A);
        }
        case Family::Cauchy:
            return m.p1 * (B - A) + m.p2 / M_PI * (log_sin_pi(A) - log_sin_pi(B));
        case Family::PointMass:
            return m.p1 * (B - A);
        case Family::TableQuantile: {
            const auto& U = m.grid_u;
            double s = 0.0;
            for (std::size_t j = 0; j + 1 < U.size(); ++j) {
                double lo = std::max(A, U[j]);
                double hi = std::min(B, U[j + 1]);
                if (hi > lo)
                    s += 0.5 * (table_quantile_at(m, lo) + table_quantile_at(m, hi)) * (hi - lo);
            }
            return s;
        }
        case Family::DiscreteUniform:
        case Family::Empirical:
            return atoms_window_integral(m.atoms, A, B);
    }
    fail("BadInput", "unhandled family");
}

void refresh_flags(QuantileModel& m) {
    m.lower_tail_finite = m.win_lo > 0.0 || base_lower_integrable(m);
    m.upper_tail_finite = m.win_hi < 1.0 || m.cap < kInf || base_upper_integrable(m);
    m.mean_finite = m.lower_tail_finite && m.upper_tail_finite;
    if (m.density_shape == DensityShape::DecreasingBeyond && m.win_lo >= m.shape_level - 1e-15)
        m.density_shape = DensityShape::DecreasingOnSupport;
}

std::vector<double> sorted_finite(std::vector<double> v, const char* what) {
    require(!v.empty(), "BadInput", std::string(what) + " needs at least one value");
    for (double x : v)
        require(std::isfinite(x), "BadInput", std::string(what) + " values must be finite");
    std::sort(v.begin(), v.end());
    return v;
}

}  // namespace

ExtendedReal ext_add(ExtendedReal a, double b) {
    if (a.undefined) return a;
    if (std::isinf(a.value) && std::isinf(b) && (a.value > 0) != (b > 0)) return {0.0, true};
    return {a.value + b, false};
}

QuantileModel pareto(double scale, double theta) {
    require(scale > 0 && theta > 0, "BadInput", "pareto needs scale > 0 and theta > 0");
    QuantileModel m;
    m.family = Family::Pareto;
    m.p1 = scale;
    m.p2 = theta;
    m.density_shape = DensityShape::DecreasingOnSupport;
    refresh_flags(m);
    return m;
}

QuantileModel uniform(double a, double b) {
    require(std::isfinite(a) && std::isfinite(b) && a < b, "BadInput", "uniform needs a < b");
    QuantileModel m;
    m.family = Family::Uniform;
    m.p1 = a;
    m.p2 = b;
    m.density_shape = DensityShape::DecreasingOnSupport;  // constant density
    refresh_flags(m);
    return m;
}

QuantileModel lognormal(double mu, double s) {
    require(std::isfinite(mu) && s > 0, "BadInput", "lognormal needs finite m and s > 0");
    QuantileModel m;
    m.family = Family::Lognormal;
    m.p1 = mu;
    m.p2 = s;
    m.density_shape = DensityShape::DecreasingBeyond;
    m.shape_level = num::normal_cdf(-s);  // CDF level of the mode exp(m - s^2)
    refresh_flags(m);
    return m;
}

QuantileModel gamma_dist(double k, double theta) {
    require(k > 0 && theta > 0, "BadInput", "gamma needs k > 0 and theta > 0");
    QuantileModel m;
    m.family = Family::Gamma;
    m.p1 = k;
    m.p2 = theta;
    if (k <= 1.0) {
        m.density_shape = DensityShape::DecreasingOnSupport;
    } else {
        m.density_shape = DensityShape::DecreasingBeyond;
        m.shape_level = boost::math::gamma_p(k, k - 1.0);  // mode (k-1)theta
    }
    refresh_flags(m);
    return m;
}

QuantileModel exponential(double rate) {
    require(rate > 0, "BadInput", "exponential needs rate > 0");
    QuantileModel m;
    m.family = Family::Exponential;
    m.p1 = rate;
    m.density_shape = DensityShape::DecreasingOnSupport;
    refresh_flags(m);
    return m;
}

QuantileModel cauchy(double loc, double scale) {
    require(std::isfinite(loc) && scale > 0, "BadInput", "cauchy needs finite loc and scale > 0");
    QuantileModel m;
    m.family = Family::Cauchy;
    m.p1 = loc;
    m.p2 = scale;
    m.density_shape = DensityShape::DecreasingBeyond;
    m.shape_level = 0.5;
    refresh_flags(m);
    return m;
}

QuantileModel discrete_uniform(std::vector<double> values) {
    QuantileModel m;
    m.family = Family::DiscreteUniform;
    m.atoms = sorted_finite(std::move(values), "discrete_uniform");
    refresh_flags(m);
    return m;
}

QuantileModel empirical(std::vector<double> values) {
    QuantileModel m;
    m.family = Family::Empirical;
    m.atoms = sorted_finite(std::move(values), "empirical");
    refresh_flags(m);
    return m;
}

QuantileModel point_mass(double c) {
    require(std::isfinite(c), "BadInput", "point_mass needs a finite value");
    QuantileModel m;
    m.family = Family::PointMass;
    m.p1 = c;
    m.density_shape = DensityShape::DecreasingOnSupport;
    refresh_flags(m);
    return m;
}

QuantileModel table_quantile(std::vector<double> us, std::vector<double> qs) {
    require(us.size() == qs.size() && us.size() >= 2, "BadInput",
            "table_quantile needs matching grids with at least two nodes");
    require(std::abs(us.front()) <= 1e-12 && std::abs(us.back() - 1.0) <= 1e-12, "BadInput",
            "table_quantile grid_u must run from 0 to 1");
    us.front() = 0.0;
    us.back() = 1.0;
    for (std::size_t i = 0; i + 1 < us.size(); ++i)
        require(us[i] < us[i + 1], "BadInput", "table_quantile grid_u must be strictly increasing");
    for (std::size_t i = 0; i < qs.size(); ++i) {
        require(std::isfinite(qs[i]), "BadInput", "table_quantile grid_q must be finite");
        if (i > 0) require(qs[i - 1] <= qs[i], "BadInput", "table_quantile grid_q must be nondecreasing");
    }
    QuantileModel m;
    m.family = Family::TableQuantile;
    m.grid_u = std::move(us);
    m.grid_q = std::move(qs);
    refresh_flags(m);
    return m;
}

double left_quantile(const QuantileModel& m, double u) {
    require(u > 0.0 && u <= 1.0, "OutOfDomain", "left quantile needs u in (0,1]");
    double v = m.win_lo + (m.win_hi - m.win_lo) * u;
    return std::min(base_quantile(m, std::min(v, m.win_hi), Side::Left), m.cap);
}

double right_quantile(const QuantileModel& m, double u) {
    require(u >= 0.0 && u < 1.0, "OutOfDomain", "right quantile needs u in [0,1)");
    double v = m.win_lo + (m.win_hi - m.win_lo) * u;
    return std::min(base_quantile(m, std::min(v, m.win_hi), Side::Right), m.cap);
}

double quantile(const QuantileModel& m, double u, Side side) {
    return side == Side::Left ? left_quantile(m, u) : right_quantile(m, u);
}

std::pair<double, double> support(const QuantileModel& m) {
    return {right_quantile(m, 0.0), left_quantile(m, 1.0)};
}

double cdf(const QuantileModel& m, double x) {
    if (m.cap < kInf && x >= m.cap) return 1.0;
    double w = m.win_hi - m.win_lo;
    return std::min(std::max((base_cdf(m, x) - m.win_lo) / w, 0.0), 1.0);
}

double quantile_window_integral(const QuantileModel& m, double a, double b) {
    require(a >= -1e-15 && b <= 1.0 + 1e-15 && a <= b + 1e-15, "OutOfDomain",
            "window must satisfy 0 <= a <= b <= 1");
    a = std::min(std::max(a, 0.0), 1.0);
    b = std::min(std::max(b, 0.0), 1.0);
    if (b <= a) return 0.0;
    const double w = m.win_hi - m.win_lo;
    double A = m.win_lo + w * a;
    double B = std::min(m.win_lo + w * b, m.win_hi);
    if (m.cap == kInf) return base_window_integral(m, A, B) / w;
    double ustar = base_cdf(m, m.cap);  // base mass at or below the cap
    double s = 0.0;
    double bc = std::min(B, ustar);
    if (bc > A) s += base_window_integral(m, A, bc);
    double from = std::max(A, ustar);
    if (B > from) s += m.cap * (B - from);
    return s / w;
}

double rvar(const QuantileModel& m, double beta, double alpha) {
    require(beta >= -1e-12 && alpha > 0.0 && beta + alpha <= 1.0 + 1e-12, "OutOfDomain",
            "rvar needs 0 <= beta < beta+alpha <= 1");
    beta = std::max(beta, 0.0);
    double b = std::min(1.0 - beta, 1.0);
    double a = std::max(1.0 - beta - alpha, 0.0);
    // interior hair-thin windows cancel catastrophically in the closed forms;
    // tail-anchored ones must keep the exact form, whose endpoint terms are exact.
    // The quantile varies on the scale of the distance to the nearer endpoint,
    // so a window much thinner than that distance is flat enough for a midpoint.
    if (a > 0.0 && b < 1.0) {
        double guard = std::min(a, 1.0 - b);
        if (alpha < std::max(1e-9, 1e-6 * guard)) return left_quantile(m, 0.5 * (a + b));
    }
    return quantile_window_integral(m, a, b) / alpha;
}

double mean(const QuantileModel& m) { return rvar(m, 0.0, 1.0); }

QuantileModel slice(const QuantileModel& m, double a, double b) {
    require(a >= 0.0 && b <= 1.0, "OutOfDomain", "slice needs 0 <= a and b <= 1");
    require(a < b, "EmptySlice", "slice needs a < b");
    const double w = m.win_hi - m.win_lo;
    double lo = m.win_lo + w * a;
    double hi = std::min(m.win_lo + w * b, m.win_hi);

    if (m.family == Family::PointMass) return point_mass(std::min(m.p1, m.cap));
    if (is_atomic(m.family)) {
        // re-materialize when the window lands on atom boundaries
        const auto sz = static_cast<double>(m.atoms.size());
        double ia = lo * sz, ib = hi * sz;
        if (std::abs(ia - std::round(ia)) < 1e-9 && std::abs(ib - std::round(ib)) < 1e-9) {
            auto lo_i = static_cast<std::size_t>(std::llround(ia));
            auto hi_i = static_cast<std::size_t>(std::llround(ib));
            QuantileModel r = m;
            r.atoms.assign(m.atoms.begin() + lo_i, m.atoms.begin() + hi_i);
            r.win_lo = 0.0;
            r.win_hi = 1.0;
            refresh_flags(r);
            return r;
        }
    }
    if (m.family == Family::Uniform && m.cap >= m.p2) {
        QuantileModel r = uniform(m.p1 + (m.p2 - m.p1) * lo, m.p1 + (m.p2 - m.p1) * hi);
        return r;
    }

    QuantileModel r = m;
    r.win_lo = lo;
    r.win_hi = hi;
    refresh_flags(r);
    return r;
}

QuantileModel tail_upper(const QuantileModel& m, double t) {
    require(t >= 0.0 && t < 1.0, "OutOfDomain", "tail_upper needs t in [0,1)");
    if (t == 0.0) return m;
    return slice(m, t, 1.0);
}

QuantileModel truncate_upper(const QuantileModel& m, double cap) {
    if (cap >= m.cap) return m;
    if (is_atomic(m.family) && m.win_lo == 0.0 && m.win_hi == 1.0 && m.cap == kInf) {
        QuantileModel r = m;
        for (double& x : r.atoms) x = std::min(x, cap);
        refresh_flags(r);
        return r;
    }
    if (m.family == Family::PointMass && m.cap == kInf) return point_mass(std::min(m.p1, cap));
    QuantileModel r = m;
    r.cap = cap;
    refresh_flags(r);
    return r;
}

bool density_decreasing_beyond(const QuantileModel& m, double t) {
    if (t >= 1.0) return true;
    if (m.family == Family::Uniform || m.family == Family::PointMass) return true;
    if (m.cap < kInf && base_cdf(m, m.cap) < m.win_hi - 1e-14) return false;  // atom at the cap
    double v = m.win_lo + (m.win_hi - m.win_lo) * std::max(t, 0.0);
    switch (m.density_shape) {
        case DensityShape::DecreasingOnSupport:
            return true;
        case DensityShape::DecreasingBeyond:
            return v >= m.shape_level - 1e-12;
        default:
            return false;
    }
}

bool density_increasing_below(const QuantileModel& m, double t) {
    if (t <= 0.0) return true;
    if (m.family == Family::Uniform || m.family == Family::PointMass) return true;
    if (m.cap < kInf && base_cdf(m, m.cap) < m.win_hi - 1e-14 &&
        left_quantile(m, std::min(t, 1.0)) >= m.cap)
        return false;  // region reaches the atom at the cap
    double v = m.win_lo + (m.win_hi - m.win_lo) * std::min(t, 1.0);
    // unimodal families: increasing below the same mode level the shape records
    if (m.density_shape == DensityShape::DecreasingBeyond) return v <= m.shape_level + 1e-12;
    return false;
}

namespace {

QuantileModel model_from(const nlohmann::json& j) {
    require(j.is_object(), "BadInput", "model spec must be an object");
    require(j.contains("family"), "BadInput", "model spec missing \"family\"");
    std::string fam = j.at("family").get<std::string>();
    std::transform(fam.begin(), fam.end(), fam.begin(), [](unsigned char c) { return std::tolower(c); });
    nlohmann::json params = j.value("params", nlohmann::json::object());
    auto need = [&](const char* key) {
        require(params.contains(key) && params.at(key).is_number(), "BadInput",
                "family \"" + fam + "\" needs numeric param \"" + key + "\"");
        return params.at(key).get<double>();
    };
    auto values = [&]() {
        const nlohmann::json* arr = nullptr;
        if (j.contains("values")) arr = &j.at("values");
        else if (params.contains("values")) arr = &params.at("values");
        require(arr != nullptr && arr->is_array(), "BadInput",
                "family \"" + fam + "\" needs an array \"values\"");
        return arr->get<std::vector<double>>();
    };
    if (fam == "pareto") return pareto(need("scale"), need("theta"));
    if (fam == "uniform") return uniform(need("a"), need("b"));
    if (fam == "lognormal") return lognormal(need("m"), need("s"));
    if (fam == "gamma") return gamma_dist(need("k"), need("theta"));
    if (fam == "exponential") return exponential(need("rate"));
    if (fam == "cauchy") return cauchy(need("loc"), need("scale"));
    if (fam == "discrete_uniform") return discrete_uniform(values());
    if (fam == "empirical") return empirical(values());
    if (fam == "point_mass" || fam == "pointmass") return point_mass(need("c"));
    if (fam == "table_quantile") {
        require(j.contains("grid_u") && j.contains("grid_q"), "BadInput",
                "family \"table_quantile\" needs arrays \"grid_u\" and \"grid_q\"");
        return table_quantile(j.at("grid_u").get<std::vector<double>>(),
                              j.at("grid_q").get<std::vector<double>>());
    }
    fail("BadInput", "unknown family \"" + fam + "\"");
}

nlohmann::json parse_or_fail(const std::string& text) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail("BadInput", std::string("invalid JSON: ") + e.what());
    }
}

}  // namespace

QuantileModel model_from_json(const std::string& json_text) {
    return model_from(parse_or_fail(json_text));
}

std::vector<QuantileModel> models_from_json(const std::string& json_text) {
    nlohmann::json j = parse_or_fail(json_text);
    const nlohmann::json* arr = nullptr;
    if (j.is_array()) arr = &j;
    else if (j.is_object() && j.contains("models") && j.at("models").is_array()) arr = &j.at("models");
    else if (j.is_object() && j.contains("family")) {
        return {model_from(j)};
    }
    require(arr != nullptr, "BadInput", "expected a model object, an array, or {\"models\": [..]}");
    std::vector<QuantileModel> out;
    out.reserve(arr->size());
    for (const auto& item : *arr) {
        QuantileModel mod = model_from(item);
        auto count = item.value("count", 1);
        require(count >= 1, "BadInput", "\"count\" must be a positive integer");
        for (int c = 0; c < count; ++c) out.push_back(mod);
    }
    require(!out.empty(), "BadInput", "model list is empty");
    return out;
}

}  // namespace depbound
