#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "confmod/graph.hpp"
#include "confmod/measure.hpp"

namespace confmod {

/// Vertex network of a level-n graph of a base (non-product) spec: nodes are
/// the cell corner vertices, edges are the corner-to-corner sides of each
/// cell (cube edges, triangle sides). Each edge records which cells it
/// belongs to, so edge energies can be localized back onto cells; an edge
/// shared by several cells splits its energy evenly among them.
///
/// This is the classical approximation sequence for p-harmonic functions:
/// the interval gives the chain graph, the gasket gives the triangle
/// networks whose 2-harmonic extensions follow the exact 1/5-2/5 rule.
struct VertexNetwork {
    std::shared_ptr<const ApproximationGraph> graph;

    std::uint32_t node_count = 0;
    std::vector<std::uint32_t> edge_a;
    std::vector<std::uint32_t> edge_b;
    std::vector<std::uint32_t> owner_offsets; // per edge, into owners
    std::vector<CellId> owners;

    // Node adjacency: (neighbor node, edge id).
    std::vector<std::uint64_t> node_offsets;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> node_adj;

    /// Extreme corner vertices of the reference geometry in canonical order
    /// (interval: left, right; gasket: the three triangle vertices; cube
    /// specs: lexicographic corner masks).
    std::vector<std::uint32_t> corner_nodes;

    std::size_t edge_count() const { return edge_a.size(); }
    std::span<const CellId> edge_owners(std::uint32_t e) const {
        return {owners.data() + owner_offsets[e], owners.data() + owner_offsets[e + 1]};
    }
    std::span<const std::pair<std::uint32_t, std::uint32_t>> node_neighbors(std::uint32_t v) const {
        return {node_adj.data() + node_offsets[v], node_adj.data() + node_offsets[v + 1]};
    }

    /// p-energy of node values under a uniform edge conductance.
    double energy(std::span<const double> values, double p, double conductance) const;

    /// Cell-localized energy measure: each edge term is assigned to its
    /// owning cells (split evenly when shared). Total equals energy().
    MeasureVector energy_measure_on_cells(std::span<const double> values, double p,
                                          double conductance) const;
};

/// Throws InvalidSpec for product graphs (the product energy is not a plain
/// edge sum; see ProductEnergyForm).
VertexNetwork build_vertex_network(std::shared_ptr<const ApproximationGraph> graph);

} // namespace confmod
