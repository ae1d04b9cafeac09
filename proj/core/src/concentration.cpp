#include "confmod/concentration.hpp"

#include <algorithm>
#include <cmath>

#include "confmod/errors.hpp"
#include "confmod/parallel.hpp"

namespace confmod {

namespace {

struct LevelSolve {
    VertexNetwork net;
    HarmonicSolution sol;
    double unit_energy = 0.0;
    MeasureVector unit_measure; // cell-localized, unit conductance
};

LevelSolve solve_corner_problem(const FractalSpec& spec, double p,
                                const std::vector<double>& corner_values, int level,
                                double tol) {
    LevelSolve ls;
    ls.net = build_vertex_network(build_graph(spec, level));
    if (corner_values.size() != ls.net.corner_nodes.size())
        throw Error("InvalidArgument",
                    "boundary needs one value per reference corner (" +
                        std::to_string(ls.net.corner_nodes.size()) + ")");
    HarmonicOptions opt;
    opt.tol = tol;
    ls.sol = solve_p_harmonic(ls.net, p, ls.net.corner_nodes, corner_values, opt);
    ls.unit_energy = ls.net.energy(ls.sol.values, p, 1.0);
    ls.unit_measure = ls.net.energy_measure_on_cells(ls.sol.values, p, 1.0);
    return ls;
}

} // namespace

ConcentrationReport concentration_scan(const FractalSpec& spec, double p,
                                       const std::vector<double>& corner_values, int level_lo,
                                       int level_hi, const ConcentrationOptions& options) {
    if (level_lo < 1 || level_hi < level_lo)
        throw Error("InvalidArgument", "bad level range for concentration scan");

    const int count = level_hi - level_lo + 1;
    std::vector<LevelSolve> solves(count);
    parallel_for_index(count, options.workers, [&](std::size_t i) {
        solves[i] = solve_corner_problem(spec, p, corner_values, level_lo + static_cast<int>(i),
                                         options.solver_tol);
    });

    ConcentrationReport rep;
    rep.spec = spec.name;
    rep.p = p;
    rep.corner_values = corner_values;
    rep.level_lo = level_lo;
    rep.level_hi = level_hi;

    double conductance = 1.0;
    for (int i = 0; i < count; ++i) {
        ConcentrationRow row;
        row.level = level_lo + i;
        double factor = 1.0;
        if (i > 0) {
            factor = options.renorm_factor > 0.0
                         ? options.renorm_factor
                         : (solves[i].unit_energy > 0.0
                                ? solves[i - 1].unit_energy / solves[i].unit_energy
                                : 1.0);
            conductance *= factor;
        }
        row.renorm_factor = factor;
        row.energy = conductance * solves[i].unit_energy;

        MeasureVector uniform = MeasureVector::uniform(solves[i].unit_measure.graph);
        const MeasureVector& gamma = solves[i].unit_measure;
        row.tv_distance = tv_distance(gamma, uniform);
        row.gini = gini(gamma);
        MeasureVector gn = gamma.normalized();
        double worst = 0.0;
        for (std::size_t c = 0; c < gn.weights.size(); ++c)
            worst = std::max(worst, gn.weights[c] / uniform.weights[c]);
        row.max_cell_ratio = worst;
        rep.rows.push_back(row);
    }
    return rep;
}

MeasureVector harmonic_energy_measure(const FractalSpec& spec, double p,
                                      const std::vector<double>& corner_values, int level,
                                      const ConcentrationOptions& options) {
    LevelSolve ls = solve_corner_problem(spec, p, corner_values, level, options.solver_tol);
    return ls.unit_measure.normalized();
}

ProductDemoReport product_singularity_demo(const FractalSpec& spec_x, const FractalSpec& spec_y,
                                           double p, int level_lo, int level_hi,
                                           const ConcentrationOptions& options) {
    if (spec_x.contraction_ratio != spec_y.contraction_ratio)
        throw RatioMismatch("product demo factors need equal contraction ratios");
    if (level_lo < 1 || level_hi < level_lo)
        throw Error("InvalidArgument", "bad level range for product demo");

    ProductDemoReport rep;
    rep.spec_x = spec_x.name;
    rep.spec_y = spec_y.name;
    rep.p = p;

    const int count = level_hi - level_lo + 1;
    std::vector<ProductDemoRow> rows(count);
    parallel_for_index(count, options.workers, [&](std::size_t i) {
        const int level = level_lo + static_cast<int>(i);
        // Default harmonic family: the corner-0 problem on each factor.
        auto corner_data = [&](const FractalSpec& s) {
            auto g = build_graph(s, level);
            VertexNetwork net = build_vertex_network(g);
            std::vector<double> values(net.corner_nodes.size(), 0.0);
            values[0] = 1.0;
            return values;
        };
        MeasureVector lambda_x =
            harmonic_energy_measure(spec_x, p, corner_data(spec_x), level, options);
        MeasureVector lambda_y =
            harmonic_energy_measure(spec_y, p, corner_data(spec_y), level, options);
        const std::size_t mx = lambda_x.weights.size();
        const std::size_t my = lambda_y.weights.size();
        const double ux = 1.0 / static_cast<double>(mx);
        const double uy = 1.0 / static_cast<double>(my);

        // Product measures never materialize a product graph; the tv sums
        // run directly over index pairs.
        double mutual = 0.0, lmu = 0.0, mlu = 0.0;
        for (std::size_t ix = 0; ix < mx; ++ix)
            for (std::size_t iy = 0; iy < my; ++iy) {
                double lm = lambda_x.weights[ix] * uy;
                double ml = ux * lambda_y.weights[iy];
                double uu = ux * uy;
                mutual += std::abs(lm - ml);
                lmu += std::abs(lm - uu);
                mlu += std::abs(ml - uu);
            }
        rows[i] = {level, 0.5 * mutual, 0.5 * lmu, 0.5 * mlu};
    });
    rep.rows = rows;
    return rep;
}

} // namespace confmod
