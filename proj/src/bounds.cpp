#include "depbound/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "depbound/numeric.hpp"

namespace depbound {

namespace {

constexpr double kFaceEps = 1e-12;

[[noreturn]] void fail(const char* code, const std::string& msg) { throw Error(code, msg); }

void require(bool ok, const char* code, const std::string& msg) {
    if (!ok) fail(code, msg);
}

// Sum that keeps signed infinities apart instead of letting them annihilate.
struct ExtSum {
    double sum = 0.0;
    bool pos = false;
    bool neg = false;
    void add(double x) {
        if (x == kInf) pos = true;
        else if (x == -kInf) neg = true;
        else sum += x;
    }
    bool mixed() const { return pos && neg; }
    double value() const { return pos ? kInf : (neg ? -kInf : sum); }
};

struct Eval {
    double value = 0.0;
    bool defined = false;
};

struct Problem {
    const std::vector<QuantileModel>* marginals = nullptr;
    double budget = 1.0;
    double min_b0 = 0.0;    // RVaR targets keep the shared window at least this wide
    bool maximize = false;  // lower-bound directions maximize the mirror form
    double free_budget() const { return std::max(budget - min_b0, 0.0); }
};

bool lex_less(const std::vector<double>& a, const std::vector<double>& b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < b[i]) return true;
        if (a[i] > b[i]) return false;
    }
    return false;
}

void project(std::vector<double>& x, double fb) {
    double s = 0.0;
    for (double& xi : x) {
        if (!(xi > 0.0)) xi = 0.0;
        s += xi;
    }
    if (s > fb) {
        if (fb <= 0.0) {
            for (double& xi : x) xi = 0.0;
        } else {
            double c = fb / s;
            for (double& xi : x) xi *= c;
        }
    }
}

// Limit of the objective as b0 shrinks to zero with the free coordinates held:
// a pure quantile sum corrected by the smallest jump among the shifted
// components, because the vanishing window's budget has to be paid by one of
// them. For continuous marginals the correction is zero.
Eval face_value(const Problem& P, const std::vector<double>& x) {
    const auto& ms = *P.marginals;
    ExtSum acc;
    double min_gap = kInf;
    bool active = false;
    for (std::size_t i = 0; i < ms.size(); ++i) {
        const QuantileModel& m = ms[i];
        double bi = x[i];
        double val = 0.0;
        double gap = 0.0;
        if (!P.maximize) {
            if (bi >= 1.0 - kFaceEps) {
                val = right_quantile(m, 0.0);
            } else {
                double u = 1.0 - bi;
                val = left_quantile(m, u);
                if (bi > kFaceEps) gap = right_quantile(m, u) - val;
            }
        } else {
            if (bi >= 1.0 - kFaceEps) {
                val = left_quantile(m, 1.0);
            } else {
                val = right_quantile(m, bi);
                gap = (bi > kFaceEps) ? val - left_quantile(m, bi) : 0.0;
            }
        }
        acc.add(val);
        if (bi > kFaceEps) {
            active = true;
            if (std::isfinite(gap)) min_gap = std::min(min_gap, gap);
        }
    }
    if (acc.mixed()) return {0.0, false};
    double v = acc.value();
    if (std::isfinite(v) && active && std::isfinite(min_gap))
        v += P.maximize ? -min_gap : min_gap;
    return {v, true};
}

Eval interior_value(const Problem& P, const std::vector<double>& x, double b0) {
    const auto& ms = *P.marginals;
    ExtSum acc;
    for (std::size_t i = 0; i < ms.size(); ++i) {
        double beta = P.maximize ? 1.0 - x[i] - b0 : x[i];
        if (beta < 0.0) beta = 0.0;
        if (beta + b0 > 1.0) beta = 1.0 - b0;
        double v;
        try {
            v = rvar(ms[i], beta, b0);
        } catch (const Error&) {
            return {0.0, false};
        }
        if (std::isnan(v)) return {0.0, false};
        acc.add(v);
    }
    if (acc.mixed()) return {0.0, false};
    return {acc.value(), true};
}

Eval eval_point(const Problem& P, const std::vector<double>& x) {
    double s = 0.0;
    for (double xi : x) s += xi;
    double b0 = P.budget - s;
    if (b0 < P.min_b0) b0 = P.min_b0;
    if (b0 <= kFaceEps) return face_value(P, x);
    return interior_value(P, x, b0);
}

// Running best with deterministic tie-breaking: among equal values the
// lexicographically smallest free-coordinate tuple wins.
struct Tracker {
    Problem P;
    bool has = false;
    double best = 0.0;
    std::vector<double> bx;
    long evals = 0;

    // smaller score is better in both directions; undefined points rank last
    double probe(const std::vector<double>& x) {
        Eval e = eval_point(P, x);
        ++evals;
        if (!e.defined) return kInf;
        consider(x, e.value);
        return P.maximize ? -e.value : e.value;
    }
    void consider(const std::vector<double>& x, double v) {
        if (!has) {
            has = true;
            best = v;
            bx = x;
            return;
        }
        double eps = std::isfinite(best) ? 1e-12 * (1.0 + std::abs(best)) : 0.0;
        bool better = P.maximize ? (v > best + eps) : (v < best - eps);
        if (better) {
            best = v;
            bx = x;
            return;
        }
        bool tie = (v == best) || std::abs(v - best) <= eps;
        if (tie && lex_less(x, bx)) {
            best = v;
            bx = x;
        }
    }
};

// Candidate starting points for the refinement stages, kept well separated so
// the restarts explore different basins.
struct SeedPool {
    double radius = 0.0;
    struct Entry {
        double score;
        std::vector<double> x;
    };
    std::vector<Entry> entries;

    void consider(double score, const std::vector<double>& x) {
        if (!(score < kInf)) return;
        for (Entry& e : entries) {
            double d = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) d = std::max(d, std::abs(e.x[i] - x[i]));
            if (d <= radius) {
                if (score < e.score) {
                    e.score = score;
                    e.x = x;
                    resort();
                }
                return;
            }
        }
        entries.push_back({score, x});
        resort();
        if (entries.size() > 6) entries.pop_back();
    }
    void resort() {
        std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
            if (a.score != b.score) return a.score < b.score;
            return lex_less(a.x, b.x);
        });
    }
};

bool nelder_mead(Tracker& T, std::vector<double> start, double step, long eval_cap, double tol) {
    const std::size_t n = start.size();
    const double fb = T.P.free_budget();
    if (n == 0 || fb <= 0.0) {
        T.probe(start);
        return true;
    }
    const long base = T.evals;
    project(start, fb);
    std::vector<std::vector<double>> X;
    std::vector<double> F;
    X.reserve(n + 1);
    F.reserve(n + 1);
    auto add_vertex = [&](std::vector<double> v) {
        project(v, fb);
        F.push_back(T.probe(v));
        X.push_back(std::move(v));
    };
    add_vertex(start);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> v = X[0];
        v[i] = (v[i] + step > fb) ? std::max(0.0, v[i] - step) : v[i] + step;
        add_vertex(v);
    }
    std::vector<std::size_t> order(n + 1);
    while (T.evals - base < eval_cap) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (F[a] != F[b]) return F[a] < F[b];
            return lex_less(X[a], X[b]);
        });
        std::vector<std::vector<double>> Xs(n + 1);
        std::vector<double> Fs(n + 1);
        for (std::size_t i = 0; i <= n; ++i) {
            Xs[i] = X[order[i]];
            Fs[i] = F[order[i]];
        }
        X.swap(Xs);
        F.swap(Fs);

        double diam = 0.0;
        for (std::size_t i = 1; i <= n; ++i)
            for (std::size_t j = 0; j < n; ++j) diam = std::max(diam, std::abs(X[i][j] - X[0][j]));
        if (diam <= tol) return true;

        std::vector<double> c(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) c[j] += X[i][j] / double(n);
        auto trial = [&](double coef) {
            std::vector<double> v(n);
            for (std::size_t j = 0; j < n; ++j) v[j] = c[j] + coef * (c[j] - X[n][j]);
            project(v, fb);
            return v;
        };
        std::vector<double> vr = trial(1.0);
        double fr = T.probe(vr);
        if (fr < F[0]) {
            std::vector<double> ve = trial(2.0);
            double fe = T.probe(ve);
            if (fe < fr) {
                X[n] = std::move(ve);
                F[n] = fe;
            } else {
                X[n] = std::move(vr);
                F[n] = fr;
            }
        } else if (fr < F[n - 1]) {
            X[n] = std::move(vr);
            F[n] = fr;
        } else {
            std::vector<double> vc = trial(fr < F[n] ? 0.5 : -0.5);
            double fc = T.probe(vc);
            if (fc < std::min(fr, F[n])) {
                X[n] = std::move(vc);
                F[n] = fc;
            } else {
                for (std::size_t i = 1; i <= n; ++i) {
                    for (std::size_t j = 0; j < n; ++j) X[i][j] = X[0][j] + 0.5 * (X[i][j] - X[0][j]);
                    project(X[i], fb);
                    F[i] = T.probe(X[i]);
                }
            }
        }
    }
    return false;
}

// Cyclic one-dimensional refinement of the incumbent: grid plus golden section
// along each free coordinate, with the shared window absorbing the slack.
// Returns true when a full sweep makes no further progress.
bool coordinate_polish(Tracker& T, long eval_cap, double tol) {
    if (!T.has) return false;
    const double fb = T.P.free_budget();
    const std::size_t n = T.P.marginals->size();
    if (fb <= 0.0 || n == 0) return true;
    const long base = T.evals;
    bool improved = true;
    int sweeps = 0;
    while (improved && sweeps < 48 && T.evals - base < eval_cap) {
        double before = T.best;
        for (std::size_t i = 0; i < n && T.evals - base < eval_cap; ++i) {
            std::vector<double> x = T.bx;
            double others = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) others += x[j];
            double hi = fb - others;
            if (hi < 0.0) hi = 0.0;
            if (hi <= tol) continue;
            auto slice = [&](double z) {
                std::vector<double> y = x;
                y[i] = std::min(std::max(z, 0.0), hi);
                return T.probe(y);
            };
            double zb = std::min(x[i], hi);
            double sb = slice(zb);
            const int G = 16;
            for (int k = 0; k <= G; ++k) {
                double z = hi * k / G;
                double sc = slice(z);
                if (sc < sb) {
                    sb = sc;
                    zb = z;
                }
            }
            double half = hi / G;
            double lo2 = std::max(0.0, zb - half);
            double hi2 = std::min(hi, zb + half);
            if (hi2 > lo2) {
                double zg = num::golden_min(slice, lo2, hi2, std::max(tol, hi * 1e-12));
                slice(zg);
            }
        }
        double eps = 1e-11 * (1.0 + std::abs(before));
        improved = T.P.maximize ? (T.best > before + eps) : (T.best < before - eps);
        ++sweeps;
    }
    return !improved;
}

// Levels where a marginal's quantile has a kink or jump, in its own u scale.
std::vector<double> model_u_kinks(const QuantileModel& m) {
    std::vector<double> ks;
    double w = m.win_hi - m.win_lo;
    if (w <= 0.0) return ks;
    auto push_base = [&](double bv) {
        double u = (bv - m.win_lo) / w;
        if (u > 1e-12 && u < 1.0 - 1e-12) ks.push_back(u);
    };
    std::size_t na = m.atoms.size();
    if (na > 1)
        for (std::size_t k = 1; k < na; ++k) push_base(double(k) / double(na));
    for (double g : m.grid_u) push_base(g);
    if (m.cap < kInf) {
        double u = cdf(m, std::nextafter(m.cap, -kInf));
        if (u > 1e-12 && u < 1.0 - 1e-12) ks.push_back(u);
    }
    return ks;
}

std::vector<double> axis_values(const Problem& P, std::size_t i, int grid_res,
                                std::size_t per_axis_cap) {
    const double fb = P.free_budget();
    std::vector<double> vals;
    vals.push_back(0.0);
    vals.push_back(fb);
    for (int k = 1; k < grid_res; ++k) vals.push_back(fb * k / grid_res);
    vals.push_back(fb * 1e-7);
    vals.push_back(fb * (1.0 - 1e-7));
    for (double u : model_u_kinks((*P.marginals)[i])) {
        for (double c : {u, 1.0 - u})
            if (c > 0.0 && c < fb) vals.push_back(c);
    }
    std::sort(vals.begin(), vals.end());
    std::vector<double> out;
    double tol = 1e-14 * (1.0 + fb);
    for (double v : vals)
        if (out.empty() || v - out.back() > tol) out.push_back(v);
    if (out.size() > per_axis_cap && per_axis_cap >= 2) {
        std::vector<double> thin;
        for (std::size_t j = 0; j < per_axis_cap; ++j) {
            std::size_t idx = j * (out.size() - 1) / (per_axis_cap - 1);
            if (thin.empty() || out[idx] != thin.back()) thin.push_back(out[idx]);
        }
        out.swap(thin);
    }
    return out;
}

void lattice_stage(const Problem& P, Tracker& T, SeedPool& pool, const OptimizerOptions& opts) {
    const std::size_t n = P.marginals->size();
    const double fb = P.free_budget();
    std::size_t cap = (n == 1) ? 257 : (n == 2 ? 97 : 41);
    std::vector<std::vector<double>> axes(n);
    for (std::size_t i = 0; i < n; ++i) axes[i] = axis_values(P, i, opts.grid_res, cap);

    std::vector<std::size_t> idx(n, 0);
    std::vector<double> x(n);
    while (true) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = axes[i][idx[i]];
            s += x[i];
        }
        if (s <= fb * (1.0 + 1e-12) + 1e-300) {
            if (s > fb && s > 0.0) {
                double c = fb / s;
                for (double& xi : x) xi *= c;
            }
            pool.consider(T.probe(x), x);
        }
        std::size_t d = 0;
        while (d < n && ++idx[d] == axes[d].size()) {
            idx[d] = 0;
            ++d;
        }
        if (d == n) break;
    }
}

void sampled_stage(const Problem& P, Tracker& T, SeedPool& pool, const OptimizerOptions& opts) {
    const std::size_t n = P.marginals->size();
    const double fb = P.free_budget();
    auto feed = [&](std::vector<double> x) {
        project(x, fb);
        pool.consider(T.probe(x), x);
    };
    feed(std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> x(n, 0.0);
        x[i] = fb;
        feed(std::move(x));
    }
    feed(std::vector<double>(n, fb / double(n)));
    feed(std::vector<double>(n, P.budget / double(n + 1)));

    // Latin hypercube over n+1 strata, pushed onto the simplex through
    // exponential spacings; slot 0 is the slack left to the shared window.
    const int S = 64;
    num::CounterRng rng(opts.seed, 0x1a77ce);
    std::vector<std::vector<int>> perm(n + 1, std::vector<int>(S));
    for (std::size_t d = 0; d <= n; ++d) {
        std::vector<int> id(S);
        std::iota(id.begin(), id.end(), 0);
        std::vector<std::uint64_t> key(S);
        for (int j = 0; j < S; ++j) key[j] = rng.bits(d * S + std::uint64_t(j));
        std::sort(id.begin(), id.end(), [&](int a, int b) {
            return key[a] != key[b] ? key[a] < key[b] : a < b;
        });
        perm[d] = id;
    }
    for (int j = 0; j < S; ++j) {
        double tot = 0.0;
        std::vector<double> e(n + 1);
        for (std::size_t d = 0; d <= n; ++d) {
            double u = (perm[d][j] + 0.5) / S;
            e[d] = -std::log1p(-u);
            tot += e[d];
        }
        std::vector<double> x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = fb * e[i + 1] / tot;
        feed(std::move(x));
    }
}

bool monotone_density(const QuantileModel& m) {
    return m.density_shape == DensityShape::DecreasingOnSupport ||
           m.density_shape == DensityShape::IncreasingOnSupport;
}

// Joint-mixability test used by the certificate: exact window criterion for
// single-direction monotone densities, optimizer equality check otherwise.
bool tails_jointly_mixable(const std::vector<QuantileModel>& tails, const OptimizerOptions& opts) {
    for (const QuantileModel& m : tails)
        if (!m.mean_finite || !monotone_density(m)) return false;
    bool all_dec = true;
    bool all_inc = true;
    for (const QuantileModel& m : tails) {
        all_dec = all_dec && m.density_shape == DensityShape::DecreasingOnSupport;
        all_inc = all_inc && m.density_shape == DensityShape::IncreasingOnSupport;
    }
    double msum = 0.0;
    for (const QuantileModel& m : tails) msum += mean(m);
    if (all_dec || all_inc) {
        double max_range = 0.0;
        double slack = 0.0;
        for (const QuantileModel& m : tails) {
            double lo = right_quantile(m, 0.0);
            double hi = left_quantile(m, 1.0);
            max_range = std::max(max_range, hi - lo);
            slack += all_dec ? mean(m) - lo : hi - mean(m);
        }
        if (!std::isfinite(max_range) || !std::isfinite(slack)) return false;
        return max_range <= slack + 1e-9 * (1.0 + std::abs(slack));
    }
    double lo = detail::run_bound(tails, Direction::LowerQuantile, 1.0, 0.0, opts).value;
    double hi = detail::run_bound(tails, Direction::UpperQuantile, 0.0, 0.0, opts).value;
    double tol = 1e-5 * (1.0 + std::abs(msum));
    return std::abs(lo - msum) <= tol && std::abs(hi - msum) <= tol;
}

void check_weights(std::size_t n, const SimplexWeights& w) {
    require(w.budget > 0.0 && w.budget <= 1.0 + 1e-12, "BadInput", "budget must lie in (0,1]");
    require(w.beta.size() == n + 1, "BadInput", "weights must have one entry per marginal plus the window");
    double sum = 0.0;
    for (double b : w.beta) {
        require(b >= -1e-12, "DegenerateBeta", "weights must be nonnegative");
        sum += b;
    }
    require(std::abs(sum - w.budget) <= 1e-9, "DegenerateBeta", "weights must sum to the budget");
}

}  // namespace

namespace detail {

BoundResult run_bound(const std::vector<QuantileModel>& marginals, Direction dir, double t,
                      double s, const OptimizerOptions& opts) {
    const std::size_t n = marginals.size();
    require(n >= 1, "BadInput", "need at least one marginal");
    require(opts.grid_res >= 1 && opts.max_evals >= 1 && opts.tol > 0.0, "BadInput",
            "optimizer options out of range");
    double budget = 0.0;
    double min_b0 = 0.0;
    bool maximize = false;
    switch (dir) {
        case Direction::UpperQuantile:
            require(t >= 0.0 && t < 1.0, "OutOfDomain", "level must lie in [0,1)");
            budget = 1.0 - t;
            break;
        case Direction::LowerQuantile:
            require(t > 0.0 && t <= 1.0, "OutOfDomain", "level must lie in (0,1]");
            budget = t;
            maximize = true;
            break;
        case Direction::UpperRVaR:
            require(s > 0.0, "OutOfDomain", "window width must be positive");
            require(t >= 0.0 && t + s <= 1.0 + 1e-12, "OutOfDomain", "window must fit in [0,1]");
            if (t + s > 1.0) s = 1.0 - t;
            budget = t + s;
            min_b0 = s;
            break;
        case Direction::LowerRVaR:
            require(s > 0.0, "OutOfDomain", "window width must be positive");
            require(t >= 0.0 && t + s <= 1.0 + 1e-12, "OutOfDomain", "window must fit in [0,1]");
            if (t + s > 1.0) s = 1.0 - t;
            budget = 1.0 - t;
            min_b0 = s;
            maximize = true;
            break;
    }

    std::vector<QuantileModel> work;
    const std::vector<QuantileModel>* use = &marginals;
    if (dir == Direction::UpperQuantile) {
        bool heavy = false;
        for (const QuantileModel& m : marginals)
            if (!m.upper_tail_finite && support(m).first >= 0.0) heavy = true;
        if (heavy) {
            work = truncate_for_level(marginals, t);
            use = &work;
        }
    }

    Problem P{use, budget, min_b0, maximize};
    Tracker T;
    T.P = P;
    const double fb = P.free_budget();
    SeedPool pool;
    pool.radius = std::max(fb * 0.05, 1e-9);

    bool converged = false;
    if (fb <= 0.0) {
        std::vector<double> z(n, 0.0);
        T.probe(z);
        converged = true;
    } else {
        if (n <= 3)
            lattice_stage(P, T, pool, opts);
        else
            sampled_stage(P, T, pool, opts);

        const long lattice_end = T.evals;
        std::vector<std::vector<double>> seeds;
        for (std::size_t i = 0; i < pool.entries.size() && i < 4; ++i)
            seeds.push_back(pool.entries[i].x);
        if (seeds.empty() && T.has) seeds.push_back(T.bx);
        const long per = std::max<long>(opts.max_evals / long(seeds.size() + 2), 64);
        for (const auto& seed : seeds) {
            if (T.evals - lattice_end >= opts.max_evals) break;
            converged = nelder_mead(T, seed, fb * 0.15, per, opts.tol) || converged;
        }
        if (T.has && T.evals - lattice_end < opts.max_evals)
            converged = nelder_mead(T, T.bx, fb * 0.02, per, opts.tol) || converged;
        long rest = opts.max_evals - (T.evals - lattice_end);
        if (T.has && rest > 64) converged = coordinate_polish(T, rest, opts.tol) || converged;
    }

    require(T.has, "OptimizerFailed", "objective undefined on the whole feasible set");

    BoundResult R;
    R.value = T.best;
    R.direction = dir;
    R.evaluations = T.evals;
    R.converged = converged;
    R.optimizer.budget = budget;
    R.optimizer.beta.assign(n + 1, 0.0);
    double sx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        R.optimizer.beta[i + 1] = T.bx[i];
        sx += T.bx[i];
    }
    double b0 = budget - sx;
    if (b0 < 1e-15) b0 = 0.0;
    R.optimizer.beta[0] = b0;
    return R;
}

}  // namespace detail

double r_plus(const std::vector<QuantileModel>& marginals, const SimplexWeights& w) {
    check_weights(marginals.size(), w);
    double b0 = std::max(w.beta[0], 0.0);
    ExtSum acc;
    if (b0 > kFaceEps) {
        for (std::size_t i = 0; i < marginals.size(); ++i) {
            double bi = std::min(std::max(w.beta[i + 1], 0.0), 1.0 - b0);
            double v;
            try {
                v = rvar(marginals[i], bi, b0);
            } catch (const Error& e) {
                if (e.code == "MeanUndefined")
                    fail("UndefinedForm", "window average diverges at both ends");
                throw;
            }
            acc.add(v);
        }
    } else {
        for (std::size_t i = 0; i < marginals.size(); ++i) {
            double bi = std::max(w.beta[i + 1], 0.0);
            acc.add(bi >= 1.0 - 1e-12 ? right_quantile(marginals[i], 0.0)
                                      : left_quantile(marginals[i], 1.0 - bi));
        }
    }
    require(!acc.mixed(), "UndefinedForm", "opposite infinities in the component sum");
    return acc.value();
}

double r_minus(const std::vector<QuantileModel>& marginals, const SimplexWeights& w) {
    check_weights(marginals.size(), w);
    double b0 = std::max(w.beta[0], 0.0);
    ExtSum acc;
    if (b0 > kFaceEps) {
        for (std::size_t i = 0; i < marginals.size(); ++i) {
            double bi = std::min(std::max(w.beta[i + 1], 0.0), 1.0 - b0);
            double lo = std::max(1.0 - bi - b0, 0.0);
            double v;
            try {
                v = rvar(marginals[i], lo, b0);
            } catch (const Error& e) {
                if (e.code == "MeanUndefined")
                    fail("UndefinedForm", "window average diverges at both ends");
                throw;
            }
            acc.add(v);
        }
    } else {
        for (std::size_t i = 0; i < marginals.size(); ++i) {
            double bi = std::max(w.beta[i + 1], 0.0);
            acc.add(bi >= 1.0 - 1e-12 ? left_quantile(marginals[i], 1.0)
                                      : right_quantile(marginals[i], bi));
        }
    }
    require(!acc.mixed(), "UndefinedForm", "opposite infinities in the component sum");
    return acc.value();
}

std::vector<QuantileModel> truncate_for_level(const std::vector<QuantileModel>& marginals,
                                              double t) {
    const std::size_t n = marginals.size();
    require(n >= 1, "BadInput", "need at least one marginal");
    require(t >= 0.0 && t < 1.0, "OutOfDomain", "level must lie in [0,1)");
    double u = 1.0 - (1.0 - t) / double(n);
    double cap = 0.0;
    for (const QuantileModel& m : marginals) cap += right_quantile(m, u);
    std::vector<QuantileModel> out;
    out.reserve(n);
    for (const QuantileModel& m : marginals) out.push_back(truncate_upper(m, cap));
    return out;
}

BoundResult upper_quantile_bound(const std::vector<QuantileModel>& marginals, double t,
                                 const OptimizerOptions& opts) {
    BoundResult r = detail::run_bound(marginals, Direction::UpperQuantile, t, 0.0, opts);
    r.sharpness = sharpness_certificate(marginals, t, Direction::UpperQuantile, opts);
    return r;
}

BoundResult lower_quantile_bound(const std::vector<QuantileModel>& marginals, double t,
                                 const OptimizerOptions& opts) {
    BoundResult r = detail::run_bound(marginals, Direction::LowerQuantile, t, 0.0, opts);
    r.sharpness = sharpness_certificate(marginals, t, Direction::LowerQuantile, opts);
    return r;
}

BoundResult upper_rvar_bound(const std::vector<QuantileModel>& marginals, double t, double s,
                             const OptimizerOptions& opts) {
    BoundResult r = detail::run_bound(marginals, Direction::UpperRVaR, t, s, opts);
    double level = std::max(1.0 - t - s, 0.0);
    r.sharpness = sharpness_certificate(marginals, level, Direction::UpperRVaR, opts);
    return r;
}

BoundResult lower_rvar_bound(const std::vector<QuantileModel>& marginals, double t, double s,
                             const OptimizerOptions& opts) {
    BoundResult r = detail::run_bound(marginals, Direction::LowerRVaR, t, s, opts);
    r.sharpness = sharpness_certificate(marginals, 1.0 - t, Direction::LowerRVaR, opts);
    return r;
}

std::pair<double, double> reduced_upper_bound(const QuantileModel& m, int n, double t) {
    require(n >= 1, "BadInput", "count must be positive");
    require(t >= 0.0 && t < 1.0, "OutOfDomain", "level must lie in [0,1)");
    const double amax = (1.0 - t) / n;
    auto value_at = [&](double a) -> double {
        if (a <= 0.0) {
            try {
                return n * rvar(m, 0.0, 1.0 - t);
            } catch (const Error&) {
                return kInf;
            }
        }
        double w = 1.0 - t - n * a;
        if (a >= amax || w <= 0.0) {
            double u = 1.0 - amax;
            double v = right_quantile(m, u);
            if (n > 1) {
                double ql = left_quantile(m, u);
                if (ql == -kInf || v == kInf) return (ql == -kInf) ? -kInf : kInf;
                v += (n - 1) * ql;
            }
            return v;
        }
        try {
            return n * rvar(m, a, w);
        } catch (const Error&) {
            return kInf;
        }
    };

    std::vector<double> grid;
    grid.push_back(0.0);
    grid.push_back(amax);
    for (int k = 1; k < 128; ++k) grid.push_back(amax * k / 128.0);
    for (int j = 0; j < 64; ++j) {
        double f = std::pow(10.0, -8.0 + 8.0 * j / 63.0);
        grid.push_back(amax * f);
        grid.push_back(amax * (1.0 - f));
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    double best_v = kInf;
    double best_a = 0.0;
    std::size_t best_k = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        double v = value_at(grid[k]);
        double eps = std::isfinite(best_v) ? 1e-15 * (1.0 + std::abs(best_v)) : 0.0;
        if (v < best_v - eps) {
            best_v = v;
            best_a = grid[k];
            best_k = k;
        }
    }
    double lo = grid[best_k > 0 ? best_k - 1 : 0];
    double hi = grid[std::min(best_k + 1, grid.size() - 1)];
    if (hi > lo && std::isfinite(best_v)) {
        double ag = num::golden_min(value_at, lo, hi, std::max(1e-13, amax * 1e-11));
        double vg = value_at(ag);
        if (vg < best_v) {
            best_v = vg;
            best_a = ag;
        }
    }
    return {best_v, best_a};
}

std::pair<double, double> reduced_lower_bound(const QuantileModel& m, int n, double t) {
    require(n >= 1, "BadInput", "count must be positive");
    require(t > 0.0 && t <= 1.0, "OutOfDomain", "level must lie in (0,1]");
    const double amax = t / n;
    auto value_at = [&](double a) -> double {
        if (a <= 0.0) {
            try {
                return n * rvar(m, 1.0 - t, t);
            } catch (const Error&) {
                return -kInf;
            }
        }
        double w = t - n * a;
        if (a >= amax || w <= 0.0) {
            double u = amax;
            double v = (u >= 1.0) ? left_quantile(m, 1.0) : left_quantile(m, u);
            if (n > 1) {
                double qr = (u >= 1.0) ? left_quantile(m, 1.0) : right_quantile(m, u);
                if (qr == kInf || v == -kInf) return (qr == kInf) ? kInf : -kInf;
                v += (n - 1) * qr;
            }
            return v;
        }
        try {
            return n * rvar(m, 1.0 - t + (n - 1) * a, w);
        } catch (const Error&) {
            return -kInf;
        }
    };

    std::vector<double> grid;
    grid.push_back(0.0);
    grid.push_back(amax);
    for (int k = 1; k < 128; ++k) grid.push_back(amax * k / 128.0);
    for (int j = 0; j < 64; ++j) {
        double f = std::pow(10.0, -8.0 + 8.0 * j / 63.0);
        grid.push_back(amax * f);
        grid.push_back(amax * (1.0 - f));
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    double best_v = -kInf;
    double best_a = 0.0;
    std::size_t best_k = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        double v = value_at(grid[k]);
        double eps = std::isfinite(best_v) ? 1e-15 * (1.0 + std::abs(best_v)) : 0.0;
        if (v > best_v + eps) {
            best_v = v;
            best_a = grid[k];
            best_k = k;
        }
    }
    double lo = grid[best_k > 0 ? best_k - 1 : 0];
    double hi = grid[std::min(best_k + 1, grid.size() - 1)];
    if (hi > lo && std::isfinite(best_v)) {
        auto neg = [&](double a) { return -value_at(a); };
        double ag = num::golden_min(neg, lo, hi, std::max(1e-13, amax * 1e-11));
        double vg = value_at(ag);
        if (vg > best_v) {
            best_v = vg;
            best_a = ag;
        }
    }
    return {best_v, best_a};
}

namespace {

// Mirror checks of density_decreasing_beyond / density_increasing_below for
// the secondary monotonicity cases of the quantile bounds.
bool density_increasing_beyond(const QuantileModel& m, double t) {
    if (t >= 1.0) return true;
    if (m.family == Family::Uniform || m.family == Family::PointMass) return true;
    if (m.cap < kInf && cdf(m, std::nextafter(m.cap, -kInf)) < 1.0 - 1e-14) return false;
    double v = m.win_lo + (m.win_hi - m.win_lo) * std::max(t, 0.0);
    switch (m.density_shape) {
        case DensityShape::IncreasingOnSupport:
            return true;
        case DensityShape::IncreasingBeyond:
            return v >= m.shape_level - 1e-12;
        case DensityShape::DecreasingBeyond:
            // unimodal with the whole window below the mode
            return m.win_hi <= m.shape_level + 1e-12;
        default:
            return false;
    }
}

bool density_decreasing_below(const QuantileModel& m, double t) {
    if (t <= 0.0) return true;
    if (m.family == Family::Uniform || m.family == Family::PointMass) return true;
    if (m.cap < kInf && cdf(m, std::nextafter(m.cap, -kInf)) < 1.0 - 1e-14 &&
        left_quantile(m, std::min(t, 1.0)) >= m.cap)
        return false;
    double v = m.win_lo + (m.win_hi - m.win_lo) * std::min(t, 1.0);
    switch (m.density_shape) {
        case DensityShape::DecreasingOnSupport:
            return true;
        case DensityShape::DecreasingBelow:
            return v <= m.shape_level + 1e-12;
        case DensityShape::DecreasingBeyond:
            // unimodal with the whole window past the mode
            return m.win_lo >= m.shape_level - 1e-12;
        default:
            return false;
    }
}

// Mass of (right_quantile(L), top] per marginal; the open/closed flags select
// the half-open variant on each end.
double upper_tail_mass(const QuantileModel& m, double L, bool closed_left) {
    double a = right_quantile(m, L);
    if (a == kInf) return 0.0;
    double hi = left_quantile(m, 1.0);
    double top = 0.0;
    if (closed_left) {
        // [a, hi): drop the top endpoint's atom
        if (std::isfinite(hi)) top = 1.0 - cdf(m, std::nextafter(hi, -kInf));
        double below = (a == -kInf) ? 0.0 : cdf(m, std::nextafter(a, -kInf));
        return std::max(1.0 - below - top, 0.0);
    }
    // (a, hi]
    if (a == -kInf) return 1.0;
    return std::max(1.0 - cdf(m, a), 0.0);
}

double lower_tail_mass(const QuantileModel& m, double L, bool closed_left) {
    double b = left_quantile(m, L);
    double lo = right_quantile(m, 0.0);
    if (closed_left) {
        // [lo, b): everything strictly under b
        if (b == -kInf) return 0.0;
        double under = std::isfinite(b) ? cdf(m, std::nextafter(b, -kInf)) : 1.0;
        return std::max(under, 0.0);
    }
    // (lo, b]: drop the bottom endpoint's atom
    double bottom = (lo == -kInf || lo == kInf) ? 0.0 : cdf(m, lo);
    double upto = (b == kInf) ? 1.0 : (b == -kInf ? 0.0 : cdf(m, b));
    return std::max(upto - bottom, 0.0);
}

}  // namespace

Sharpness sharpness_certificate(const std::vector<QuantileModel>& marginals, double t,
                                Direction direction, const OptimizerOptions& opts) {
    const std::size_t n = marginals.size();
    if (n <= 2) return Sharpness::NLe2;
    bool upper = direction == Direction::UpperQuantile || direction == Direction::UpperRVaR;
    bool quantile = direction == Direction::UpperQuantile || direction == Direction::LowerQuantile;
    if (upper) {
        if (t < 0.0 || t >= 1.0) return Sharpness::NotCertified;
        bool all_dec = true;
        for (const QuantileModel& m : marginals) all_dec = all_dec && density_decreasing_beyond(m, t);
        if (all_dec) return Sharpness::DecreasingDensities;
        if (quantile) {
            bool all_inc = true;
            for (const QuantileModel& m : marginals)
                all_inc = all_inc && density_increasing_beyond(m, t);
            if (all_inc) return Sharpness::IncreasingDensities;
        }
        double mass_open = 0.0;
        double mass_closed = 0.0;
        for (const QuantileModel& m : marginals) {
            mass_open += upper_tail_mass(m, t, false);
            mass_closed += upper_tail_mass(m, t, true);
        }
        if (mass_open <= 1.0 - t + 1e-12 || (quantile && mass_closed <= 1.0 - t + 1e-12))
            return Sharpness::UpperMutualExclusive;
        if (quantile) {
            std::vector<QuantileModel> tails;
            tails.reserve(n);
            for (const QuantileModel& m : marginals) tails.push_back(tail_upper(m, t));
            if (tails_jointly_mixable(tails, opts)) return Sharpness::JointlyMixable;
        }
    } else {
        if (t <= 0.0 || t > 1.0) return Sharpness::NotCertified;
        bool all_inc = true;
        for (const QuantileModel& m : marginals) all_inc = all_inc && density_increasing_below(m, t);
        if (all_inc) return Sharpness::IncreasingDensities;
        if (quantile) {
            bool all_dec = true;
            for (const QuantileModel& m : marginals)
                all_dec = all_dec && density_decreasing_below(m, t);
            if (all_dec) return Sharpness::DecreasingDensities;
        }
        double mass_open = 0.0;
        double mass_closed = 0.0;
        for (const QuantileModel& m : marginals) {
            mass_closed += lower_tail_mass(m, t, true);
            mass_open += lower_tail_mass(m, t, false);
        }
        if (mass_closed <= t + 1e-12 || (quantile && mass_open <= t + 1e-12))
            return Sharpness::LowerMutualExclusive;
        if (quantile) {
            std::vector<QuantileModel> lows;
            lows.reserve(n);
            for (const QuantileModel& m : marginals) lows.push_back(slice(m, 0.0, t));
            if (tails_jointly_mixable(lows, opts)) return Sharpness::JointlyMixable;
        }
    }
    return Sharpness::NotCertified;
}

MeanSandwich mean_sandwich(const std::vector<QuantileModel>& marginals,
                           const OptimizerOptions& opts) {
    require(!marginals.empty(), "BadInput", "need at least one marginal");
    double msum = 0.0;
    for (const QuantileModel& m : marginals) {
        require(m.mean_finite, "MeanUndefined", "every marginal needs a finite mean");
        msum += mean(m);
    }
    MeanSandwich s;
    s.mean_sum = msum;
    s.lower = detail::run_bound(marginals, Direction::LowerQuantile, 1.0, 0.0, opts).value;
    s.upper = detail::run_bound(marginals, Direction::UpperQuantile, 0.0, 0.0, opts).value;
    double tol = 1e-6 * (1.0 + std::abs(msum));
    require(s.lower >= msum - tol && s.upper <= msum + tol, "OptimizerFailed",
            "bound chain violated");
    return s;
}

}  // namespace depbound
