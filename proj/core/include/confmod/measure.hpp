#pragma once

#include <memory>
#include <vector>

#include "confmod/graph.hpp"

namespace confmod {

/// Nonnegative cell weights on one graph. Zero mass per cell is allowed.
struct MeasureVector {
    std::shared_ptr<const ApproximationGraph> graph;
    std::vector<double> weights;

    double total() const;
    /// Rescaled to total mass 1. Throws ZeroMass when total() == 0.
    MeasureVector normalized() const;

    static MeasureVector uniform(std::shared_ptr<const ApproximationGraph> g);
    static MeasureVector zero(std::shared_ptr<const ApproximationGraph> g);
};

/// Total-variation distance between normalized measures on one graph,
/// (1/2) sum |a - b|; in [0, 1].
double tv_distance(const MeasureVector& a, const MeasureVector& b);

/// Gini coefficient of the weight distribution; 0 for uniform, < 1 always.
double gini(const MeasureVector& m);

/// The exact similitude sending the full level-(n-k) graph onto the cells
/// below one level-k cell of a level-n graph.
struct CellMap {
    CellAddress target_cell;                              // level k
    std::shared_ptr<const ApproximationGraph> target_graph; // level n
    std::shared_ptr<const ApproximationGraph> source_graph; // level n - k
};

CellMap make_cell_map(std::shared_ptr<const ApproximationGraph> target_graph,
                      const CellAddress& target_cell);

/// Normalized push-forward: restrict `measure` to the cells under
/// `map.target_cell`, pull back along the similitude and renormalize to
/// mass 1. Throws ZeroMass when the restriction carries no mass.
MeasureVector cell_pushforward(const MeasureVector& measure, const CellMap& map);

} // namespace confmod
