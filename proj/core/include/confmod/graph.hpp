#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "confmod/rational.hpp"
#include "confmod/spec.hpp"

namespace confmod {

/// Address of a level-n cell: the word of IFS letters, outermost map first.
/// Cells are enumerated lexicographically by word, so the index of a word
/// w_1..w_n is sum w_i * A^(n-i); all cells sharing a prefix form one
/// contiguous index block.
struct CellAddress {
    std::vector<int> word;
    int level() const { return static_cast<int>(word.size()); }
};

using CellId = std::uint32_t;

struct BuildOptions {
    std::int64_t cell_cap = 10'000'000;
};

/// Level data for a single IFS factor: adjacency of the factor's own cells,
/// cell centers, and the exact integer geometry the adjacency was derived
/// from (cube grid coordinates scaled by b^n, or triangle vertices scaled by
/// 2^n).
struct FactorLevel {
    BaseSpec base;
    int level = 0;
    CellId cell_count = 0;
    std::vector<std::uint64_t> adj_offsets;
    std::vector<CellId> adj;
    std::vector<double> centers;                        // cell_count * dim
    std::vector<std::int64_t> cube_grid;                // cube: cell_count * dim
    std::vector<std::array<std::int64_t, 6>> tri_verts; // simplex: (x0,y0,x1,y1,x2,y2)

    std::span<const CellId> neighbors(CellId c) const {
        return {adj.data() + adj_offsets[c], adj.data() + adj_offsets[c + 1]};
    }
    double center(CellId c, int d) const { return centers[static_cast<std::size_t>(c) * base.dim + d]; }
    /// Distance between cell centers in the factor's own metric.
    double distance(CellId a, CellId b) const;
};

/// The level-n cell graph of a FractalSpec: cells with the uniform
/// self-similar measure, adjacency by exact closed-cell intersection
/// (factor-wise adjacent-or-equal on products, matching the l-infinity
/// product metric). Immutable once built; safe to share across threads.
class ApproximationGraph {
public:
    const FractalSpec& spec() const { return spec_; }
    int level() const { return level_; }
    CellId cell_count() const { return cell_count_; }
    std::uint64_t edge_count() const { return adj_.size() / 2; }

    std::span<const CellId> neighbors(CellId c) const {
        return {adj_.data() + adj_offsets_[c], adj_.data() + adj_offsets_[c + 1]};
    }

    int factor_count() const { return static_cast<int>(factors_.size()); }
    const FactorLevel& factor(int f) const { return factors_[f]; }
    /// Index of the cell's projection onto factor f.
    CellId factor_index(CellId c, int f) const {
        return factors_.size() == 1 ? c : factor_index_[f][c];
    }
    /// Cell whose factor projections are the given indices.
    CellId from_factor_indices(std::span<const CellId> idx) const;
    /// Projection onto the factor range [fbegin, fend), indexed in the
    /// sub-product's own lexicographic enumeration.
    CellId sub_index(CellId c, int fbegin, int fend) const;

    CellAddress address_of(CellId c) const;
    CellId index_of(const CellAddress& addr) const;

    /// Distance between cell centers: max over factors of the factor metric.
    double distance(CellId a, CellId b) const;
    /// Concatenated center coordinates of a cell (total_dim entries).
    std::vector<double> center_coords(CellId c) const;
    /// Distance between coordinate points in the spec's metric (factor-wise,
    /// combined by max).
    double point_distance(std::span<const double> a, std::span<const double> b) const;
    /// Scale of one cell: contraction_ratio^level * reference diameter.
    double cell_diameter() const { return cell_diameter_; }
    /// Diameter of the reference geometry (level-independent).
    double diameter() const { return spec_.reference_diameter(); }

    double cell_measure(CellId = 0) const { return cell_measure_; }
    Rational cell_measure_rational() const { return cell_measure_rat_; }

    /// Cells whose centers lie within `radius` of the center of
    /// `center_cell` (closed inequality); sorted ascending.
    std::vector<CellId> metric_ball(CellId center_cell, double radius) const;

    /// Cells at the 2^dim (cube) / 3 (simplex) extreme corners of the
    /// reference geometry, products combined factor-wise; sorted, unique.
    std::vector<CellId> corner_cells() const;

    bool connected() const;
    int max_degree() const;

    friend struct GraphBuilder;

private:
    FractalSpec spec_;
    int level_ = 0;
    CellId cell_count_ = 0;
    double cell_diameter_ = 0.0;
    double cell_measure_ = 0.0;
    Rational cell_measure_rat_;
    std::vector<FactorLevel> factors_;
    std::vector<std::vector<CellId>> factor_index_; // per factor, size cell_count (products only)
    std::vector<std::uint64_t> adj_offsets_;
    std::vector<CellId> adj_;
};

/// Builds the level-n graph. Throws CapExceeded when alphabet^level exceeds
/// options.cell_cap, InvalidSpec on degenerate geometry.
std::shared_ptr<const ApproximationGraph> build_graph(const FractalSpec& spec, int level,
                                                      const BuildOptions& options = {});

/// Rebuilds geometry/measures from the spec and installs a previously
/// serialized sorted edge list as adjacency. Used by GraphCache.
std::shared_ptr<const ApproximationGraph> assemble_graph_with_adjacency(
    const FractalSpec& spec, int level,
    const std::vector<std::pair<std::uint64_t, std::uint64_t>>& edges,
    const BuildOptions& options = {});

} // namespace confmod
