#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include "depbound/bounds.hpp"
#include "depbound/distributions.hpp"
#include "depbound/mixability.hpp"

using namespace depbound;

namespace {

std::vector<QuantileModel> three_point_cube() {
    auto m = discrete_uniform({1, 2, 3});
    return {m, m, m};
}

std::vector<QuantileModel> sign_cube() {
    auto m = discrete_uniform({-1, 1});
    return {m, m, m};
}

std::vector<QuantileModel> crew_columns() {
    return {discrete_uniform({44, 66, 67, 71, 87}), discrete_uniform({10, 32, 48, 57, 60}),
            discrete_uniform({24, 37, 41, 43, 83})};
}

std::vector<QuantileModel> mixed_battery(int which) {
    switch (which) {
        case 2:
            return {pareto(1, 1.0 / 3.0), lognormal(0, 1), gamma_dist(1, 2)};
        case 3:
            return {pareto(1, 3), lognormal(-1, 1), gamma_dist(1, 2)};
        case 4:
            return {pareto(1, 3), lognormal(0, 1), gamma_dist(3, 2)};
        default:
            return {pareto(1, 3), lognormal(0, 1), gamma_dist(1, 2)};
    }
}

std::string thrown_code(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code;
    }
    return "";
}

// Highest achievable minimum row sum when each column of atoms may be
// reordered freely; columns must share one atom count.
double brute_max_min_sum(const std::vector<std::vector<double>>& cols) {
    const std::size_t M = cols[0].size();
    double best = -kInf;
    if (cols.size() == 1) return *std::min_element(cols[0].begin(), cols[0].end());
    std::vector<double> c2 = cols[1];
    std::sort(c2.begin(), c2.end());
    if (cols.size() == 2) {
        do {
            double lo = kInf;
            for (std::size_t k = 0; k < M; ++k) lo = std::min(lo, cols[0][k] + c2[k]);
            best = std::max(best, lo);
        } while (std::next_permutation(c2.begin(), c2.end()));
        return best;
    }
    std::vector<double> c3 = cols[2];
    std::sort(c2.begin(), c2.end());
    do {
        std::sort(c3.begin(), c3.end());
        do {
            double lo = kInf;
            for (std::size_t k = 0; k < M; ++k)
                lo = std::min(lo, cols[0][k] + c2[k] + c3[k]);
            best = std::max(best, lo);
        } while (std::next_permutation(c3.begin(), c3.end()));
    } while (std::next_permutation(c2.begin(), c2.end()));
    return best;
}

}  // namespace

TEST_SUITE("weighted sums") {
    TEST_CASE("upper form at the full-window corner is the mean sum") {
        SimplexWeights w{{1.0, 0.0, 0.0, 0.0}, 1.0};
        CHECK(r_plus(three_point_cube(), w) == 6.0);
    }

    TEST_CASE("upper form on the zero-window face sums left quantiles") {
        SimplexWeights w{{0.0, 0.5, 0.5}, 1.0};
        CHECK(r_plus({uniform(0, 1), uniform(0, 1)}, w) == doctest::Approx(1.0).epsilon(1e-12));
    }

    TEST_CASE("upper form on one heavy-tail marginal") {
        SimplexWeights w{{0.5, 0.5}, 1.0};
        CHECK(r_plus({pareto(1, 0.5)}, w) == doctest::Approx(2.0).epsilon(1e-12));
    }

    TEST_CASE("lower form on the face sums right quantiles") {
        SimplexWeights w{{0.0, 0.2, 0.6, 0.2}, 1.0};
        CHECK(r_minus(crew_columns(), w) == 160.0);
    }

    TEST_CASE("point masses always add up to the constant sum") {
        SimplexWeights w{{0.5, 0.3, 0.2}, 1.0};
        CHECK(r_minus({point_mass(3), point_mass(4)}, w) == doctest::Approx(7.0));
        CHECK(r_plus({point_mass(3), point_mass(4)}, w) == doctest::Approx(7.0));
    }

    TEST_CASE("lower form with an interior window") {
        SimplexWeights w{{0.5, 0.25, 0.25}, 1.0};
        CHECK(r_minus({uniform(0, 1), uniform(0, 1)}, w) == doctest::Approx(1.0).epsilon(1e-12));
    }

    TEST_CASE("opposite infinities are rejected") {
        std::vector<QuantileModel> cc = {cauchy(0, 1), cauchy(0, 1)};
        SimplexWeights w{{0.0, 1.0, 0.0}, 1.0};
        CHECK(thrown_code([&] { r_minus(cc, w); }) == "UndefinedForm");
        CHECK(thrown_code([&] { r_plus(cc, w); }) == "UndefinedForm");
    }

    TEST_CASE("weight validation") {
        auto ms = three_point_cube();
        CHECK(thrown_code([&] { r_plus(ms, {{0.0, 0.0, 0.0, 0.0}, 0.0}); }) == "BadInput");
        CHECK(thrown_code([&] { r_plus(ms, {{0.5, 0.5}, 1.0}); }) == "BadInput");
        CHECK(thrown_code([&] { r_plus(ms, {{0.5, 0.7, -0.2, 0.0}, 1.0}); }) == "DegenerateBeta");
        CHECK(thrown_code([&] { r_plus(ms, {{0.2, 0.2, 0.2, 0.2}, 1.0}); }) == "DegenerateBeta");
    }
}

TEST_SUITE("quantile bounds") {
    TEST_CASE("three-point cube: worst-case floor is six at the mean corner") {
        auto r = upper_quantile_bound(three_point_cube(), 0.0);
        CHECK(r.value == 6.0);
        CHECK(r.optimizer.beta[0] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(r.optimizer.beta[1] <= 1e-12);
        CHECK(r.optimizer.beta[2] <= 1e-12);
        CHECK(r.optimizer.beta[3] <= 1e-12);
        CHECK(r.converged);
        CHECK(r.evaluations > 0);
    }

    TEST_CASE("sign cube: bound is zero though the true optimum is lower") {
        auto r = upper_quantile_bound(sign_cube(), 0.0);
        CHECK(r.value == 0.0);
        CHECK(r.optimizer.beta[0] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(r.sharpness == Sharpness::NotCertified);
        CHECK(brute_max_min_sum({{-1, 1}, {-1, 1}, {-1, 1}}) == -1.0);
    }

    TEST_CASE("heterogeneous triples at level zero") {
        const double expected[4] = {4.285680, 8.593642, 3.254540, 7.634045};
        for (int c = 1; c <= 4; ++c) {
            auto r = upper_quantile_bound(mixed_battery(c), 0.0);
            CAPTURE(c);
            CHECK(r.value == doctest::Approx(expected[c - 1]).epsilon(5e-4));
            CHECK(r.converged);
        }
    }

    TEST_CASE("twenty pareto marginals at level zero") {
        std::vector<QuantileModel> ms;
        for (int i = 1; i <= 20; ++i) ms.push_back(pareto(1, 2 + i));
        OptimizerOptions opts;
        opts.max_evals = 200000;
        auto r = upper_quantile_bound(ms, 0.0, opts);
        CHECK(r.value == doctest::Approx(22.597270).epsilon(5e-4));
    }

    TEST_CASE("crew columns: best-case ceiling peaks at the mean corner") {
        auto r = lower_quantile_bound(crew_columns(), 1.0);
        CHECK(r.value == doctest::Approx(154.0).epsilon(1e-9));
        CHECK(r.optimizer.beta[0] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(r.sharpness == Sharpness::NotCertified);
    }

    TEST_CASE("single marginal collapses to the plain quantile") {
        std::vector<QuantileModel> one = {lognormal(0, 1)};
        double q = left_quantile(one[0], 0.3);
        CHECK(lower_quantile_bound(one, 0.3).value == doctest::Approx(q).epsilon(1e-9));
        CHECK(upper_quantile_bound(one, 0.3).value ==
              doctest::Approx(right_quantile(one[0], 0.3)).epsilon(1e-9));
    }

    TEST_CASE("three cauchy marginals: best-case ceiling at level one") {
        std::vector<QuantileModel> ms = {cauchy(0, 1), cauchy(0, 1), cauchy(0, 1)};
        double target = -3.0 * std::log(2.0) / std::acos(-1.0);
        auto r = lower_quantile_bound(ms, 1.0);
        CHECK(r.value == doctest::Approx(target).epsilon(1e-4));
    }

    TEST_CASE("upper bound equals the thin-window average limit") {
        auto ms = mixed_battery(1);
        double t = 2.0 / 3.0;
        auto q = upper_quantile_bound(ms, t);
        auto rv = upper_rvar_bound(ms, 1.0 - t - 1e-4, 1e-4);
        CHECK(q.value == doctest::Approx(rv.value).epsilon(2e-4));
        CHECK(q.sharpness == Sharpness::DecreasingDensities);
    }

    TEST_CASE("auto truncation leaves the bound unchanged") {
        auto ms = mixed_battery(2);
        auto trunc = truncate_for_level(ms, 0.0);
        double cap = support(trunc[0]).second;
        CHECK(cap == doctest::Approx(30.7356).epsilon(1e-4));
        CHECK(upper_quantile_bound(ms, 0.0).value ==
              upper_quantile_bound(trunc, 0.0).value);
    }

    TEST_CASE("level domain errors") {
        auto ms = three_point_cube();
        CHECK(thrown_code([&] { upper_quantile_bound(ms, 1.0); }) == "OutOfDomain");
        CHECK(thrown_code([&] { lower_quantile_bound(ms, 0.0); }) == "OutOfDomain");
        CHECK(thrown_code([&] { upper_rvar_bound(ms, 0.5, 0.0); }) == "OutOfDomain");
        CHECK(thrown_code([&] { upper_quantile_bound({}, 0.5); }) == "BadInput");
    }
}

TEST_SUITE("window average bounds") {
    TEST_CASE("zero tail level gives the top-window sum exactly") {
        auto ms = mixed_battery(1);
        double s = 0.3;
        double direct = 0.0;
        for (const auto& m : ms) direct += rvar(m, 0.0, s);
        auto r = upper_rvar_bound(ms, 0.0, s);
        CHECK(r.value == doctest::Approx(direct).epsilon(1e-12));
        CHECK(r.optimizer.beta[0] == doctest::Approx(s).epsilon(1e-12));
        CHECK(r.converged);
    }

    TEST_CASE("two uniforms, top half window") {
        std::vector<QuantileModel> ms = {uniform(0, 1), uniform(0, 1)};
        CHECK(upper_rvar_bound(ms, 0.0, 0.5).value == doctest::Approx(1.5).epsilon(1e-12));
    }

    TEST_CASE("two uniforms, bottom half window, best case") {
        std::vector<QuantileModel> ms = {uniform(0, 1), uniform(0, 1)};
        auto r = lower_rvar_bound(ms, 0.5, 0.5);
        CHECK(r.value == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(r.converged);
    }

    TEST_CASE("point masses and the full-window corner") {
        std::vector<QuantileModel> ms = {point_mass(2), point_mass(2), point_mass(2)};
        CHECK(lower_rvar_bound(ms, 0.2, 0.3).value == doctest::Approx(6.0).epsilon(1e-12));
        std::vector<QuantileModel> ex = {exponential(1), exponential(1), exponential(1)};
        double direct = 3.0 * rvar(ex[0], 0.4, 0.6);
        CHECK(lower_rvar_bound(ex, 0.4, 0.6).value == doctest::Approx(direct).epsilon(1e-12));
    }

    TEST_CASE("worst case dominates the comonotone value") {
        std::vector<QuantileModel> ms = {pareto(1, 0.5), pareto(1, 0.5), pareto(1, 0.5)};
        double como = 3.0 * rvar(ms[0], 0.45, 0.45);
        auto r = upper_rvar_bound(ms, 0.45, 0.45);
        CHECK(std::isfinite(r.value));
        CHECK(r.value >= como - 1e-9);
    }

    TEST_CASE("window certificates use the window start level") {
        std::vector<QuantileModel> par3 = {pareto(1, 3), pareto(1, 3), pareto(1, 3)};
        CHECK(upper_rvar_bound(par3, 0.05, 0.05).sharpness == Sharpness::DecreasingDensities);
        std::vector<QuantileModel> ln3 = {lognormal(0, 1), lognormal(0, 1), lognormal(0, 1)};
        CHECK(lower_rvar_bound(ln3, 0.95, 0.03).sharpness == Sharpness::IncreasingDensities);
    }
}

TEST_SUITE("reduced bounds") {
    TEST_CASE("point mass collapses to n times the constant") {
        auto [v, a] = reduced_upper_bound(point_mass(5), 3, 0.3);
        CHECK(v == doctest::Approx(15.0).epsilon(1e-12));
        auto [vl, al] = reduced_lower_bound(point_mass(2), 3, 0.7);
        CHECK(vl == doctest::Approx(6.0).epsilon(1e-12));
    }

    TEST_CASE("heavy pareto closed form at three levels") {
        auto m = pareto(1, 0.5);
        CHECK(reduced_upper_bound(m, 3, 0.5).first == doctest::Approx(96.0).epsilon(1e-6));
        CHECK(reduced_upper_bound(m, 3, 0.9).first == doctest::Approx(2400.0).epsilon(1e-6));
        CHECK(reduced_upper_bound(m, 3, 0.99).first == doctest::Approx(240000.0).epsilon(1e-6));
    }

    TEST_CASE("full optimizer matches the reduced value for a decreasing density") {
        std::vector<QuantileModel> ms = {pareto(1, 0.5), pareto(1, 0.5), pareto(1, 0.5)};
        auto full = upper_quantile_bound(ms, 0.9);
        CHECK(full.value == doctest::Approx(2400.0).epsilon(1e-6));
    }

    TEST_CASE("uniform pair at the top level") {
        // the objective is flat in alpha here, so only the value is pinned
        auto [v, a] = reduced_lower_bound(uniform(0, 1), 2, 1.0);
        CHECK(v == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(a >= 0.0);
        CHECK(a <= 0.5 + 1e-12);
    }

    TEST_CASE("exponential triple at the top level") {
        auto [v, a] = reduced_lower_bound(exponential(1), 3, 1.0);
        CHECK(v == doctest::Approx(3.0).epsilon(1e-9));
        double full = lower_quantile_bound({exponential(1), exponential(1), exponential(1)}, 1.0).value;
        CHECK(v <= full + 1e-9);
    }

    TEST_CASE("three cauchys match the full search limit") {
        double target = -3.0 * std::log(2.0) / std::acos(-1.0);
        CHECK(reduced_lower_bound(cauchy(0, 1), 3, 1.0).first ==
              doctest::Approx(target).epsilon(1e-6));
    }

    TEST_CASE("reduced never beats the full bound") {
        std::vector<QuantileModel> models = {uniform(0, 1), exponential(1), pareto(1, 3),
                                             lognormal(0, 1)};
        for (const auto& m : models) {
            std::vector<QuantileModel> ms = {m, m, m};
            for (double t : {0.3, 0.7, 0.95}) {
                CAPTURE(m.family);
                CAPTURE(t);
                double red = reduced_upper_bound(m, 3, t).first;
                double full = upper_quantile_bound(ms, t).value;
                CHECK(full <= red + 1e-7 * (1.0 + std::abs(red)));
                double redl = reduced_lower_bound(m, 3, t).first;
                double fulll = lower_quantile_bound(ms, t).value;
                CHECK(fulll >= redl - 1e-7 * (1.0 + std::abs(redl)));
            }
        }
    }

    TEST_CASE("stepwise increasing table model agrees with the full search") {
        auto m = table_quantile({0, 0.5, 1}, {1, 80, 100});
        std::vector<QuantileModel> ms = {m, m, m};
        for (double t : {0.3, 0.7, 0.95}) {
            CAPTURE(t);
            double red = reduced_upper_bound(m, 3, t).first;
            CHECK(upper_quantile_bound(ms, t).value ==
                  doctest::Approx(red).epsilon(1e-7));
            double redl = reduced_lower_bound(m, 3, t).first;
            CHECK(lower_quantile_bound(ms, t).value ==
                  doctest::Approx(redl).epsilon(1e-7));
        }
    }

    TEST_CASE("count and level validation") {
        CHECK(thrown_code([&] { reduced_upper_bound(uniform(0, 1), 0, 0.5); }) == "BadInput");
        CHECK(thrown_code([&] { reduced_upper_bound(uniform(0, 1), 3, 1.0); }) == "OutOfDomain");
        CHECK(thrown_code([&] { reduced_lower_bound(uniform(0, 1), 3, 0.0); }) == "OutOfDomain");
    }
}

TEST_SUITE("sharpness certificates") {
    TEST_CASE("two marginals are always certified") {
        std::vector<QuantileModel> ms = {uniform(0, 1), exponential(1)};
        CHECK(sharpness_certificate(ms, 0.5, Direction::UpperQuantile) == Sharpness::NLe2);
    }

    TEST_CASE("decreasing densities beyond the level") {
        std::vector<QuantileModel> ms = {pareto(1, 3), pareto(1, 3), pareto(1, 3)};
        CHECK(sharpness_certificate(ms, 0.9, Direction::UpperQuantile) ==
              Sharpness::DecreasingDensities);
        CHECK(sharpness_certificate(mixed_battery(1), 2.0 / 3.0, Direction::UpperQuantile) ==
              Sharpness::DecreasingDensities);
    }

    TEST_CASE("unimodal marginals fail at level zero") {
        CHECK(sharpness_certificate(mixed_battery(1), 0.0, Direction::UpperQuantile) ==
              Sharpness::NotCertified);
    }

    TEST_CASE("atoms are not certified") {
        CHECK(sharpness_certificate(sign_cube(), 0.0, Direction::UpperQuantile) ==
              Sharpness::NotCertified);
    }

    TEST_CASE("decreasing densities below the level certify the best case") {
        std::vector<QuantileModel> ms = {exponential(1), exponential(1), exponential(1)};
        CHECK(sharpness_certificate(ms, 0.5, Direction::LowerQuantile) ==
              Sharpness::DecreasingDensities);
    }

    TEST_CASE("increasing densities below the mode certify the best case") {
        std::vector<QuantileModel> ms = {lognormal(0, 1), lognormal(0, 1), lognormal(0, 1)};
        CHECK(sharpness_certificate(ms, 0.1, Direction::LowerQuantile) ==
              Sharpness::IncreasingDensities);
    }

    TEST_CASE("sparse tails certify mutual exclusivity and the bound is tight") {
        auto m = discrete_uniform({0, 0, 0, 1});
        std::vector<QuantileModel> ms = {m, m, m};
        auto r = upper_quantile_bound(ms, 0.0);
        CHECK(r.sharpness == Sharpness::UpperMutualExclusive);
        CHECK(r.value == doctest::Approx(0.0));
        CHECK(brute_max_min_sum({{0, 0, 0, 1}, {0, 0, 0, 1}, {0, 0, 0, 1}}) ==
              doctest::Approx(r.value));
    }
}

TEST_SUITE("mean sandwich") {
    TEST_CASE("mixed battery straddles its mean sum") {
        auto s = mean_sandwich(mixed_battery(1));
        CHECK(s.mean_sum == doctest::Approx(5.1487212707).epsilon(1e-7));
        CHECK(s.lower >= s.mean_sum - 1e-6 * (1.0 + s.mean_sum));
        CHECK(s.upper <= s.mean_sum + 1e-6 * (1.0 + s.mean_sum));
    }

    TEST_CASE("point masses give a flat sandwich") {
        std::vector<QuantileModel> ms = {point_mass(1), point_mass(1), point_mass(1)};
        auto s = mean_sandwich(ms);
        CHECK(s.lower == doctest::Approx(3.0).epsilon(1e-12));
        CHECK(s.mean_sum == doctest::Approx(3.0).epsilon(1e-12));
        CHECK(s.upper == doctest::Approx(3.0).epsilon(1e-12));
    }

    TEST_CASE("uniform pair pins both sides to one") {
        std::vector<QuantileModel> ms = {uniform(0, 1), uniform(0, 1)};
        auto s = mean_sandwich(ms);
        CHECK(s.lower == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(s.upper == doctest::Approx(1.0).epsilon(1e-9));
    }

    TEST_CASE("divergent means are rejected") {
        std::vector<QuantileModel> ms = {cauchy(0, 1)};
        CHECK(thrown_code([&] { mean_sandwich(ms); }) == "MeanUndefined");
    }

    TEST_CASE("random finite-mean batteries keep the ordering") {
        std::mt19937 gen(11);
        std::uniform_real_distribution<double> ur(0.2, 3.0);
        for (int rep = 0; rep < 10; ++rep) {
            std::vector<QuantileModel> ms;
            int n = 1 + int(gen() % 3);
            for (int i = 0; i < n; ++i) {
                switch (gen() % 4) {
                    case 0: ms.push_back(uniform(-ur(gen), ur(gen))); break;
                    case 1: ms.push_back(exponential(ur(gen))); break;
                    case 2: ms.push_back(gamma_dist(1.0 + ur(gen), ur(gen))); break;
                    default: ms.push_back(pareto(1.0, 1.5 + ur(gen))); break;
                }
            }
            CAPTURE(rep);
            MeanSandwich s{};
            CHECK_NOTHROW(s = mean_sandwich(ms));
            CHECK(s.lower >= s.mean_sum - 1e-6 * (1.0 + std::abs(s.mean_sum)));
            CHECK(s.upper <= s.mean_sum + 1e-6 * (1.0 + std::abs(s.mean_sum)));
        }
    }
}

TEST_SUITE("atomic oracle comparison") {
    TEST_CASE("random small instances never beat the bound") {
        std::mt19937 gen(23);
        std::uniform_int_distribution<int> val(-3, 9);
        for (int rep = 0; rep < 10; ++rep) {
            int n = 2 + int(gen() % 2);
            int M = 3 + int(gen() % 2);
            std::vector<std::vector<double>> cols(n);
            for (auto& c : cols) {
                c.resize(M);
                for (auto& x : c) x = val(gen);
            }
            std::vector<QuantileModel> ms;
            for (const auto& c : cols) ms.push_back(discrete_uniform(c));
            auto r = upper_quantile_bound(ms, 0.0);
            double brute = brute_max_min_sum(cols);
            CAPTURE(rep);
            CAPTURE(n);
            CAPTURE(M);
            CHECK(brute <= r.value + 1e-8 * (1.0 + std::abs(r.value)));
            if (r.sharpness != Sharpness::NotCertified)
                CHECK(std::abs(brute - r.value) <= 1e-6 * (1.0 + std::abs(r.value)));
        }
    }

    TEST_CASE("three-point cube brute force agrees exactly") {
        CHECK(brute_max_min_sum({{1, 2, 3}, {1, 2, 3}, {1, 2, 3}}) == 6.0);
    }
}

TEST_SUITE("determinism") {
    TEST_CASE("repeated runs are bit identical") {
        auto a = upper_quantile_bound(mixed_battery(1), 0.0);
        auto b = upper_quantile_bound(mixed_battery(1), 0.0);
        CHECK(a.value == b.value);
        CHECK(a.evaluations == b.evaluations);
        CHECK(a.converged == b.converged);
        REQUIRE(a.optimizer.beta.size() == b.optimizer.beta.size());
        for (std::size_t i = 0; i < a.optimizer.beta.size(); ++i)
            CHECK(a.optimizer.beta[i] == b.optimizer.beta[i]);
    }

    TEST_CASE("sampled seeding is reproducible") {
        std::vector<QuantileModel> ms;
        for (int i = 1; i <= 6; ++i) ms.push_back(pareto(1, 2 + i));
        OptimizerOptions opts;
        opts.max_evals = 2000;
        auto a = upper_quantile_bound(ms, 0.0, opts);
        auto b = upper_quantile_bound(ms, 0.0, opts);
        CHECK(a.value == b.value);
        CHECK(a.evaluations == b.evaluations);
        for (std::size_t i = 0; i < a.optimizer.beta.size(); ++i)
            CHECK(a.optimizer.beta[i] == b.optimizer.beta[i]);
    }
}

TEST_SUITE("mixability") {
    TEST_CASE("uniform pair is mixable around one") {
        std::vector<QuantileModel> ms = {uniform(0, 1), uniform(0, 1)};
        auto rep = jm_check_finite_mean(ms);
        CHECK(rep.verdict == JmVerdict::JM);
        CHECK(rep.interval.nonempty);
        CHECK(rep.interval.low == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(rep.interval.high == doctest::Approx(1.0).epsilon(1e-9));
    }

    TEST_CASE("exponential triple has unbounded range") {
        std::vector<QuantileModel> ms = {exponential(1), exponential(1), exponential(1)};
        CHECK(jm_check_finite_mean(ms).verdict == JmVerdict::NotJM);
    }

    TEST_CASE("atoms are inconclusive but the interval collapses") {
        auto rep = jm_check_finite_mean(three_point_cube());
        CHECK(rep.verdict == JmVerdict::Inconclusive);
        CHECK(rep.interval.low == doctest::Approx(6.0).epsilon(1e-9));
        CHECK(rep.interval.high == doctest::Approx(6.0).epsilon(1e-9));
        CHECK(rep.interval.nonempty);
    }

    TEST_CASE("cauchy triple centers on a symmetric interval") {
        std::vector<QuantileModel> ms = {cauchy(0, 1), cauchy(0, 1), cauchy(0, 1)};
        double half = 3.0 * std::log(2.0) / std::acos(-1.0);
        auto ci = center_interval(ms);
        CHECK(ci.low == doctest::Approx(-half).epsilon(1e-4));
        CHECK(ci.high == doctest::Approx(half).epsilon(1e-4));
        CHECK(ci.nonempty);
        CHECK(thrown_code([&] { jm_check_finite_mean(ms); }) == "MeanUndefined");
    }

    TEST_CASE("scale triples split on the largest share") {
        CHECK_FALSE(jm_check_location_scale({3, 1, 1}));
        CHECK(jm_check_location_scale({2, 2, 2}));
        CHECK_FALSE(jm_check_location_scale({1}));
        CHECK(thrown_code([&] { jm_check_location_scale({1, -1}); }) == "BadInput");
        CHECK(thrown_code([&] { jm_check_location_scale({}); }) == "BadInput");
    }
}
