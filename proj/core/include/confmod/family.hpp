#pragma once

#include <memory>
#include <string>
#include <vector>

#include "confmod/graph.hpp"

namespace confmod {

enum class FamilyKind { AnnulusCrossing, BallToBall, PointToPoint };

/// A path family on the cell-adjacency graph: all paths from the source cell
/// set to the target cell set. A curve in the underlying space meets a
/// sequence of pairwise-intersecting cells, which is exactly such a path, so
/// admissibility constraints agree with the continuous definition.
///
/// Diameter-capped families (BallToBall) replace the exact cap by a bucketed
/// relaxation: source cells are grouped into buckets of side cap/4, and a
/// path anchored at a bucket may only use cells within distance `cap` of the
/// bucket center. Every admitted path has diameter at most 2*cap.
struct CurveFamily {
    FamilyKind kind = FamilyKind::PointToPoint;
    std::shared_ptr<const ApproximationGraph> graph;
    std::vector<CellId> source; // sorted
    std::vector<CellId> target; // sorted

    bool capped = false;
    std::vector<std::vector<CellId>> anchor_sources;
    std::vector<std::vector<char>> anchor_allowed; // per anchor, cell mask

    // Construction parameters, kept for reports.
    CellId center = 0;
    double inner_radius = 0.0;
    double outer_radius = 0.0;
    double cap = 0.0;

    std::string describe() const;
};

CurveFamily point_to_point_family(std::shared_ptr<const ApproximationGraph> graph,
                                  std::vector<CellId> source, std::vector<CellId> target);

/// Paths from cells meeting B(center, r) to cells outside B(center, R).
/// Requires 0 < r < R; throws RadiusOutOfRange when either side is empty.
CurveFamily annulus_family(std::shared_ptr<const ApproximationGraph> graph, CellId center,
                           double r, double R);

/// Paths between two disjoint balls with diameter cap L*r; throws
/// BallsOverlap when the balls share cells and RadiusOutOfRange when the
/// separation exceeds A*r.
CurveFamily ball_to_ball_family(std::shared_ptr<const ApproximationGraph> graph, CellId x,
                                CellId y, double r, double A, double L);

} // namespace confmod
