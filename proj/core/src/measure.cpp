#include "confmod/measure.hpp"

#include <algorithm>
#include <cmath>

#include "confmod/errors.hpp"

namespace confmod {

double MeasureVector::total() const {
    double t = 0.0;
    for (double w : weights) t += w;
    return t;
}

MeasureVector MeasureVector::normalized() const {
    double t = total();
    if (t <= 0.0) throw ZeroMass("cannot normalize a measure with zero total mass");
    MeasureVector out{graph, weights};
    for (double& w : out.weights) w /= t;
    return out;
}

MeasureVector MeasureVector::uniform(std::shared_ptr<const ApproximationGraph> g) {
    MeasureVector m;
    m.weights.assign(g->cell_count(), g->cell_measure());
    m.graph = std::move(g);
    return m;
}

MeasureVector MeasureVector::zero(std::shared_ptr<const ApproximationGraph> g) {
    MeasureVector m;
    m.weights.assign(g->cell_count(), 0.0);
    m.graph = std::move(g);
    return m;
}

double tv_distance(const MeasureVector& a, const MeasureVector& b) {
    if (a.graph.get() != b.graph.get() || a.weights.size() != b.weights.size())
        throw GraphMismatch("tv_distance requires measures on the same graph");
    MeasureVector an = a.normalized();
    MeasureVector bn = b.normalized();
    double s = 0.0;
    for (std::size_t i = 0; i < an.weights.size(); ++i) s += std::abs(an.weights[i] - bn.weights[i]);
    return 0.5 * s;
}

double gini(const MeasureVector& m) {
    std::vector<double> x = m.weights;
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double total = 0.0, weighted = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        total += x[i];
        weighted += static_cast<double>(i + 1) * x[i];
    }
    if (total <= 0.0) return 0.0;
    return std::max(0.0, 2.0 * weighted / (n * total) - (n + 1.0) / n);
}

CellMap make_cell_map(std::shared_ptr<const ApproximationGraph> target_graph,
                      const CellAddress& target_cell) {
    const int n = target_graph->level();
    const int k = target_cell.level();
    if (k > n) throw InvalidSpec("cell map target level exceeds graph level");
    CellMap map;
    map.target_cell = target_cell;
    map.source_graph = build_graph(target_graph->spec(), n - k);
    map.target_graph = std::move(target_graph);
    return map;
}

MeasureVector cell_pushforward(const MeasureVector& measure, const CellMap& map) {
    if (measure.graph.get() != map.target_graph.get())
        throw GraphMismatch("measure does not live on the cell map's target graph");
    const auto& tg = *map.target_graph;
    const int k = map.target_cell.level();
    const std::uint64_t block = map.source_graph->cell_count();

    // Cells under the target address form one contiguous index block.
    std::uint64_t prefix = 0;
    for (int letter : map.target_cell.word) {
        if (letter < 0 || letter >= tg.spec().alphabet_size)
            throw InvalidSpec("cell map target letter out of range");
        prefix = prefix * tg.spec().alphabet_size + static_cast<std::uint64_t>(letter);
    }
    (void)k;
    const std::uint64_t begin = prefix * block;

    double mass = 0.0;
    for (std::uint64_t i = 0; i < block; ++i) mass += measure.weights[begin + i];
    if (mass <= 0.0) throw ZeroMass("target cell carries no mass");

    MeasureVector out = MeasureVector::zero(map.source_graph);
    for (std::uint64_t i = 0; i < block; ++i) out.weights[i] = measure.weights[begin + i] / mass;
    return out;
}

} // namespace confmod
