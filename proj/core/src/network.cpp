#include "confmod/network.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "confmod/errors.hpp"

namespace confmod {

double VertexNetwork::energy(std::span<const double> values, double p, double conductance) const {
    double e = 0.0;
    for (std::size_t i = 0; i < edge_a.size(); ++i)
        e += std::pow(std::abs(values[edge_a[i]] - values[edge_b[i]]), p);
    return conductance * e;
}

MeasureVector VertexNetwork::energy_measure_on_cells(std::span<const double> values, double p,
                                                     double conductance) const {
    MeasureVector m = MeasureVector::zero(graph);
    for (std::size_t i = 0; i < edge_a.size(); ++i) {
        double term = conductance * std::pow(std::abs(values[edge_a[i]] - values[edge_b[i]]), p);
        auto own = edge_owners(static_cast<std::uint32_t>(i));
        double share = term / static_cast<double>(own.size());
        for (CellId c : own) m.weights[c] += share;
    }
    return m;
}

namespace {

using Coord = std::array<std::int64_t, 3>;

struct NetworkBuilder {
    std::map<Coord, std::uint32_t> node_of;
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> edge_of;
    VertexNetwork net;

    std::uint32_t node(const Coord& c) {
        auto [it, inserted] = node_of.try_emplace(c, static_cast<std::uint32_t>(node_of.size()));
        return it->second;
    }

    void add_edge(std::uint32_t a, std::uint32_t b, CellId owner) {
        if (a > b) std::swap(a, b);
        auto key = std::make_pair(a, b);
        auto it = edge_of.find(key);
        std::uint32_t e;
        if (it == edge_of.end()) {
            e = static_cast<std::uint32_t>(net.edge_a.size());
            edge_of.emplace(key, e);
            net.edge_a.push_back(a);
            net.edge_b.push_back(b);
            owners_tmp.emplace_back();
        } else {
            e = it->second;
        }
        owners_tmp[e].push_back(owner);
    }

    std::vector<std::vector<CellId>> owners_tmp;

    void finish() {
        net.node_count = static_cast<std::uint32_t>(node_of.size());
        net.owner_offsets.assign(net.edge_a.size() + 1, 0);
        for (std::size_t e = 0; e < owners_tmp.size(); ++e) {
            std::sort(owners_tmp[e].begin(), owners_tmp[e].end());
            net.owner_offsets[e + 1] = net.owner_offsets[e] +
                                       static_cast<std::uint32_t>(owners_tmp[e].size());
        }
        for (auto& v : owners_tmp) net.owners.insert(net.owners.end(), v.begin(), v.end());

        std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> adj(net.node_count);
        for (std::size_t e = 0; e < net.edge_a.size(); ++e) {
            adj[net.edge_a[e]].emplace_back(net.edge_b[e], static_cast<std::uint32_t>(e));
            adj[net.edge_b[e]].emplace_back(net.edge_a[e], static_cast<std::uint32_t>(e));
        }
        net.node_offsets.assign(net.node_count + 1, 0);
        for (std::uint32_t v = 0; v < net.node_count; ++v) {
            std::sort(adj[v].begin(), adj[v].end());
            net.node_offsets[v + 1] = net.node_offsets[v] + adj[v].size();
        }
        for (auto& v : adj) net.node_adj.insert(net.node_adj.end(), v.begin(), v.end());
    }
};

} // namespace

VertexNetwork build_vertex_network(std::shared_ptr<const ApproximationGraph> graph) {
    if (graph->spec().is_product())
        throw InvalidSpec("vertex networks are defined for base specs; products use the "
                          "tensor energy form");
    const FactorLevel& fl = graph->factor(0);
    const int dim = fl.base.dim;

    NetworkBuilder b;
    b.net.graph = graph;

    if (fl.base.geometry == GeometryKind::Cube) {
        const int corners = 1 << dim;
        for (CellId c = 0; c < fl.cell_count; ++c) {
            std::array<std::uint32_t, 8> ids{};
            for (int mask = 0; mask < corners; ++mask) {
                Coord coord{0, 0, 0};
                for (int d = 0; d < dim; ++d)
                    coord[d] = fl.cube_grid[static_cast<std::size_t>(c) * dim + d] +
                               ((mask >> d) & 1);
                ids[mask] = b.node(coord);
            }
            // Cube edges: corner pairs differing in exactly one bit.
            for (int mask = 0; mask < corners; ++mask)
                for (int d = 0; d < dim; ++d) {
                    int other = mask ^ (1 << d);
                    if (other > mask) b.add_edge(ids[mask], ids[other], c);
                }
        }
    } else {
        for (CellId c = 0; c < fl.cell_count; ++c) {
            const auto& t = fl.tri_verts[c];
            std::array<std::uint32_t, 3> ids{};
            for (int m = 0; m < 3; ++m) ids[m] = b.node({t[2 * m], t[2 * m + 1], 0});
            b.add_edge(ids[0], ids[1], c);
            b.add_edge(ids[1], ids[2], c);
            b.add_edge(ids[0], ids[2], c);
        }
    }
    b.finish();

    // Extreme corners of the reference geometry.
    std::int64_t scale = 1;
    const std::int64_t den = fl.base.contraction_ratio.den();
    for (int i = 0; i < fl.level; ++i) scale *= den;
    if (fl.base.geometry == GeometryKind::Cube) {
        for (int mask = 0; mask < (1 << dim); ++mask) {
            Coord coord{0, 0, 0};
            for (int d = 0; d < dim; ++d) coord[d] = ((mask >> d) & 1) ? scale : 0;
            auto it = b.node_of.find(coord);
            if (it == b.node_of.end()) throw InvalidSpec("reference corner missing from network");
            b.net.corner_nodes.push_back(it->second);
        }
    } else {
        for (const Coord& coord : {Coord{0, 0, 0}, Coord{scale, 0, 0}, Coord{0, scale, 0}}) {
            auto it = b.node_of.find(coord);
            if (it == b.node_of.end()) throw InvalidSpec("reference corner missing from network");
            b.net.corner_nodes.push_back(it->second);
        }
    }
    return std::move(b.net);
}

} // namespace confmod
