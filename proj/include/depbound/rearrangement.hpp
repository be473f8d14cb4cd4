#pragma once

#include <cstdint>
#include <vector>

#include "depbound/distributions.hpp"

namespace depbound {

enum class GridSide {
    LowerGrid,  // right quantile at the left endpoint of each cell
    UpperGrid,  // left quantile at the right endpoint of each cell
};

enum class RaObjective {
    MaxMinRowSum,  // push the smallest row sum as high as it will go
    MinMaxRowSum,  // push the largest row sum as low as it will go
};

// One discretized marginal: N quantiles over the tail window that starts at
// the requested level. Infinite end cells are replaced by their nearest
// finite neighbour and flagged.
struct GridColumn {
    std::vector<double> values;
    bool clipped = false;
};

enum class RaOrigin { Literal, Discretized };

struct RaMatrix {
    std::vector<std::vector<double>> cells;  // cells[j] is column j
    RaOrigin origin = RaOrigin::Literal;
    GridSide side = GridSide::LowerGrid;
    long grid_points = 0;
    double level = 0.0;
    bool clipped = false;
};

struct RaInterval {
    double lower = 0.0;
    double upper = 0.0;
    long iterations = 0;
    bool converged = false;
};

struct RaOptions {
    long max_iters = 1000;  // full sweeps over the columns
    std::uint64_t seed = 0;
    bool shuffle_start = false;
};

struct RaRun {
    RaInterval interval;
    RaMatrix matrix;
};

GridColumn discretize(const QuantileModel& m, long N, double t, GridSide side);

RaMatrix discretize_matrix(const std::vector<QuantileModel>& marginals, long N, double t,
                           GridSide side);

// Round-robin counter-sorting: each column in turn is reordered opposite to
// the sum of the others, which can only improve either objective. Stops after
// a sweep that changes nothing. On a single matrix both interval ends carry
// the same achieved value.
RaRun ra_run(const RaMatrix& matrix, RaObjective objective, const RaOptions& opts = {});

// Runs the algorithm on both grid sides of the same marginals and brackets
// the achievable objective between them.
RaInterval ra_interval(const std::vector<QuantileModel>& marginals, long N, double t,
                       RaObjective objective, const RaOptions& opts = {});

}  // namespace depbound
