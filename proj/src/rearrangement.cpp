#include "depbound/rearrangement.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "depbound/numeric.hpp"

namespace depbound {

namespace {

[[noreturn]] void fail(const char* code, const std::string& msg) { throw Error(code, msg); }

void require(bool ok, const char* code, const std::string& msg) {
    if (!ok) fail(code, msg);
}

double objective_value(const std::vector<double>& row_sums, RaObjective objective) {
    if (objective == RaObjective::MaxMinRowSum)
        return *std::min_element(row_sums.begin(), row_sums.end());
    return *std::max_element(row_sums.begin(), row_sums.end());
}

}  // namespace

GridColumn discretize(const QuantileModel& m, long N, double t, GridSide side) {
    require(N >= 1, "BadInput", "discretization needs at least one cell");
    require(t >= 0.0 && t < 1.0, "OutOfDomain", "level must lie in [0,1)");

    GridColumn col;
    col.values.resize(static_cast<std::size_t>(N));
    for (long k = 0; k < N; ++k) {
        double frac = side == GridSide::LowerGrid
                          ? static_cast<double>(k) / static_cast<double>(N)
                          : static_cast<double>(k + 1) / static_cast<double>(N);
        double u = t + (1.0 - t) * frac;
        col.values[static_cast<std::size_t>(k)] =
            side == GridSide::LowerGrid ? right_quantile(m, u) : left_quantile(m, std::min(u, 1.0));
    }

    // only the outermost cell of either grid can be infinite
    std::size_t last = col.values.size() - 1;
    if (col.values[last] == kInf) {
        col.values[last] = last > 0 ? col.values[last - 1] : right_quantile(m, t);
        col.clipped = true;
    }
    if (col.values[0] == -kInf) {
        col.values[0] = last > 0 ? col.values[1] : left_quantile(m, std::max(t, 0.5));
        col.clipped = true;
    }
    require(std::isfinite(col.values[0]) && std::isfinite(col.values[last]), "BadInput",
            "discretization produced non-finite cells");
    return col;
}

RaMatrix discretize_matrix(const std::vector<QuantileModel>& marginals, long N, double t,
                           GridSide side) {
    require(!marginals.empty(), "BadInput", "need at least one marginal");
    RaMatrix mat;
    mat.origin = RaOrigin::Discretized;
    mat.side = side;
    mat.grid_points = N;
    mat.level = t;
    mat.cells.reserve(marginals.size());
    for (const auto& m : marginals) {
        GridColumn col = discretize(m, N, t, side);
        mat.clipped = mat.clipped || col.clipped;
        mat.cells.push_back(std::move(col.values));
    }
    return mat;
}

RaRun ra_run(const RaMatrix& matrix, RaObjective objective, const RaOptions& opts) {
    const std::size_t n = matrix.cells.size();
    require(n >= 1, "BadInput", "matrix needs at least one column");
    const std::size_t rows = matrix.cells[0].size();
    require(rows >= 1, "BadInput", "matrix needs at least one row");
    for (const auto& col : matrix.cells)
        require(col.size() == rows, "BadInput", "columns must share one length");
    require(opts.max_iters >= 1, "BadInput", "need at least one sweep");

    RaRun out;
    out.matrix = matrix;
    auto& cells = out.matrix.cells;

    if (opts.shuffle_start) {
        for (std::size_t j = 0; j < n; ++j) {
            num::CounterRng rng(opts.seed, static_cast<std::uint64_t>(j));
            for (std::size_t k = rows - 1; k > 0; --k) {
                std::size_t pick = static_cast<std::size_t>(rng.bits(k) % (k + 1));
                std::swap(cells[j][k], cells[j][pick]);
            }
        }
    }

    std::vector<double> row_sums(rows, 0.0);
    for (const auto& col : cells)
        for (std::size_t k = 0; k < rows; ++k) row_sums[k] += col[k];

    // scratch: row order by the sum of the other columns, ties by row index
    std::vector<std::pair<double, std::size_t>> order(rows);
    std::vector<double> sorted_col(rows);

    long sweeps = 0;
    bool changed = true;
    while (changed && sweeps < opts.max_iters) {
        changed = false;
        ++sweeps;
        for (std::size_t j = 0; j < n; ++j) {
            auto& col = cells[j];
            for (std::size_t k = 0; k < rows; ++k) {
                order[k] = {row_sums[k] - col[k], k};
                sorted_col[k] = col[k];
            }
            std::sort(order.begin(), order.end());
            std::sort(sorted_col.begin(), sorted_col.end(), std::greater<>());
            for (std::size_t k = 0; k < rows; ++k) {
                std::size_t row = order[k].second;
                double v = sorted_col[k];
                if (col[row] != v) {
                    row_sums[row] += v - col[row];
                    col[row] = v;
                    changed = true;
                }
            }
        }
    }

    // the incremental updates can drift by last-bit amounts over many sweeps
    std::fill(row_sums.begin(), row_sums.end(), 0.0);
    for (const auto& col : cells)
        for (std::size_t k = 0; k < rows; ++k) row_sums[k] += col[k];

    double v = objective_value(row_sums, objective);
    out.interval.lower = v;
    out.interval.upper = v;
    out.interval.iterations = sweeps;
    out.interval.converged = !changed;
    return out;
}

RaInterval ra_interval(const std::vector<QuantileModel>& marginals, long N, double t,
                       RaObjective objective, const RaOptions& opts) {
    RaRun lo = ra_run(discretize_matrix(marginals, N, t, GridSide::LowerGrid), objective, opts);
    RaRun hi = ra_run(discretize_matrix(marginals, N, t, GridSide::UpperGrid), objective, opts);
    RaInterval out;
    out.lower = lo.interval.lower;
    out.upper = hi.interval.upper;
    out.iterations = std::max(lo.interval.iterations, hi.interval.iterations);
    out.converged = lo.interval.converged && hi.interval.converged;
    return out;
}

}  // namespace depbound
