#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "depbound/bounds.hpp"
#include "depbound/distributions.hpp"
#include "depbound/rearrangement.hpp"

using namespace depbound;

namespace {

RaMatrix cube_matrix() {
    RaMatrix m;
    m.cells = {{1, 2, 3}, {1, 2, 3}, {1, 2, 3}};
    return m;
}

std::vector<double> sorted_copy(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v;
}

std::string thrown_code(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code;
    }
    return "";
}

}  // namespace

TEST_SUITE("grid discretization") {
    TEST_CASE("uniform lower grid walks the left cell edges") {
        auto g = discretize(uniform(0, 1), 4, 0.0, GridSide::LowerGrid);
        CHECK(g.values == std::vector<double>{0.0, 0.25, 0.5, 0.75});
        CHECK(!g.clipped);
    }

    TEST_CASE("atom grid reproduces the support") {
        auto g = discretize(discrete_uniform({1, 2, 3}), 3, 0.0, GridSide::LowerGrid);
        CHECK(g.values == std::vector<double>{1.0, 2.0, 3.0});
    }

    TEST_CASE("unbounded top cell clips to its neighbour") {
        auto g = discretize(pareto(1, 3), 2, 0.0, GridSide::UpperGrid);
        CHECK(g.clipped);
        CHECK(g.values[0] == doctest::Approx(left_quantile(pareto(1, 3), 0.5)).epsilon(1e-14));
        CHECK(g.values[1] == g.values[0]);
    }

    TEST_CASE("unbounded bottom cell clips to its neighbour") {
        auto g = discretize(cauchy(0, 1), 3, 0.0, GridSide::LowerGrid);
        CHECK(g.clipped);
        CHECK(g.values[0] == g.values[1]);
        CHECK(std::isfinite(g.values[0]));
    }

    TEST_CASE("tail level shifts the grid window") {
        auto g = discretize(uniform(0, 1), 2, 0.5, GridSide::LowerGrid);
        CHECK(g.values == std::vector<double>{0.5, 0.75});
    }

    TEST_CASE("argument validation") {
        CHECK(thrown_code([] { discretize(uniform(0, 1), 0, 0.0, GridSide::LowerGrid); }) ==
              "BadInput");
        CHECK(thrown_code([] { discretize(uniform(0, 1), 4, 1.0, GridSide::LowerGrid); }) ==
              "OutOfDomain");
    }
}

TEST_SUITE("counter sorting") {
    TEST_CASE("three-point cube from the sorted start stalls at five") {
        auto run = ra_run(cube_matrix(), RaObjective::MaxMinRowSum);
        CHECK(run.interval.lower == 5.0);
        CHECK(run.interval.upper == 5.0);
        CHECK(run.interval.converged);
        CHECK(run.interval.iterations <= 3);
    }

    TEST_CASE("a shuffled start escapes to the true optimum") {
        RaOptions sh;
        sh.shuffle_start = true;
        for (std::uint64_t seed : {1, 2, 3, 4}) {
            sh.seed = seed;
            auto run = ra_run(cube_matrix(), RaObjective::MaxMinRowSum, sh);
            CHECK(run.interval.lower == 6.0);
        }
    }

    TEST_CASE("single column reports its own extremes") {
        RaMatrix m;
        m.cells = {{4, 1, 7}};
        CHECK(ra_run(m, RaObjective::MaxMinRowSum).interval.lower == 1.0);
        CHECK(ra_run(m, RaObjective::MinMaxRowSum).interval.upper == 7.0);
    }

    TEST_CASE("crew matrix balances to the known optimum") {
        RaMatrix crew;
        crew.cells = {{44, 66, 67, 71, 87}, {10, 32, 48, 57, 60}, {24, 37, 41, 43, 83}};
        auto run = ra_run(crew, RaObjective::MinMaxRowSum);
        CHECK(run.interval.upper == 159.0);
    }

    TEST_CASE("columns keep their multisets") {
        RaMatrix m;
        m.cells = {{3, 1, 4, 1, 5}, {9, 2, 6, 5, 3}, {5, 8, 9, 7, 9}};
        for (auto obj : {RaObjective::MaxMinRowSum, RaObjective::MinMaxRowSum}) {
            auto run = ra_run(m, obj);
            for (std::size_t j = 0; j < m.cells.size(); ++j)
                CHECK(sorted_copy(run.matrix.cells[j]) == sorted_copy(m.cells[j]));
        }
    }

    TEST_CASE("objective improves monotonically over sweeps") {
        RaMatrix m;
        m.cells = {{3, 1, 4, 1, 5, 9, 2, 6}, {5, 3, 5, 8, 9, 7, 9, 3}, {2, 3, 8, 4, 6, 2, 6, 4}};
        RaOptions one;
        double prev_min = -1e300;
        double prev_max = 1e300;
        for (long k = 1; k <= 6; ++k) {
            one.max_iters = k;
            double vmin = ra_run(m, RaObjective::MaxMinRowSum, one).interval.lower;
            double vmax = ra_run(m, RaObjective::MinMaxRowSum, one).interval.upper;
            CHECK(vmin >= prev_min);
            CHECK(vmax <= prev_max);
            prev_min = vmin;
            prev_max = vmax;
        }
    }

    TEST_CASE("fixed seeds reproduce the final matrix exactly") {
        RaOptions sh;
        sh.shuffle_start = true;
        sh.seed = 42;
        auto a = ra_run(cube_matrix(), RaObjective::MaxMinRowSum, sh);
        auto b = ra_run(cube_matrix(), RaObjective::MaxMinRowSum, sh);
        CHECK(a.matrix.cells == b.matrix.cells);
    }

    TEST_CASE("ragged and empty matrices are rejected") {
        RaMatrix bad;
        bad.cells = {{1, 2}, {1}};
        CHECK(thrown_code([&] { ra_run(bad, RaObjective::MaxMinRowSum); }) == "BadInput");
        RaMatrix none;
        CHECK(thrown_code([&] { ra_run(none, RaObjective::MaxMinRowSum); }) == "BadInput");
    }
}

TEST_SUITE("grid intervals") {
    TEST_CASE("both sides bracket and stay under the direct bound") {
        std::vector<QuantileModel> ms = {exponential(1), exponential(1), exponential(1)};
        auto iv = ra_interval(ms, 2000, 0.3, RaObjective::MaxMinRowSum);
        CHECK(iv.lower <= iv.upper);
        auto cb = upper_quantile_bound(ms, 0.3);
        CHECK(iv.lower <= cb.value + 1e-9);
        CHECK(cb.value - iv.lower < 0.05);
    }

    TEST_CASE("heavy pareto interval hugs the closed form") {
        QuantileModel ph = pareto(1, 0.5);
        std::vector<QuantileModel> ms = {ph, ph, ph};
        auto iv = ra_interval(ms, 4000, 0.5, RaObjective::MaxMinRowSum);
        CHECK(iv.lower <= 96.0 + 1e-9);
        CHECK(iv.upper == doctest::Approx(96.0).epsilon(2e-3));
    }
}
