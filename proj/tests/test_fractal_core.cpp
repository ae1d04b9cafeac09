#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>

#include "confmod/cache.hpp"
#include "confmod/errors.hpp"
#include "confmod/graph.hpp"
#include "confmod/measure.hpp"
#include "confmod/network.hpp"
#include "confmod/spec.hpp"

using namespace confmod;

namespace {

std::uint64_t count_edges(const ApproximationGraph& g) { return g.edge_count(); }

// Exact closed-triangle intersection via separating axes on integer
// coordinates; the independent oracle for the gasket adjacency.
bool triangles_intersect(const std::array<std::int64_t, 6>& A, const std::array<std::int64_t, 6>& B) {
    auto axis_separates = [&](std::int64_t nx, std::int64_t ny) {
        std::int64_t minA = INT64_MAX, maxA = INT64_MIN, minB = INT64_MAX, maxB = INT64_MIN;
        for (int m = 0; m < 3; ++m) {
            std::int64_t pa = nx * A[2 * m] + ny * A[2 * m + 1];
            std::int64_t pb = nx * B[2 * m] + ny * B[2 * m + 1];
            minA = std::min(minA, pa);
            maxA = std::max(maxA, pa);
            minB = std::min(minB, pb);
            maxB = std::max(maxB, pb);
        }
        return maxA < minB || maxB < minA;
    };
    for (const auto& T : {A, B})
        for (int m = 0; m < 3; ++m) {
            std::int64_t ex = T[2 * ((m + 1) % 3)] - T[2 * m];
            std::int64_t ey = T[2 * ((m + 1) % 3) + 1] - T[2 * m + 1];
            if (axis_separates(-ey, ex)) return false;
        }
    return true;
}

} // namespace

TEST_CASE("spec invariants and hausdorff dimensions") {
    FractalSpec carpet = carpet_spec();
    CHECK(carpet.alphabet_size == 8);
    CHECK(carpet.contraction_ratio == Rational(1, 3));
    CHECK(carpet.hausdorff_dim() == doctest::Approx(std::log(8.0) / std::log(3.0)).epsilon(1e-14));

    CHECK(interval_spec().hausdorff_dim() == doctest::Approx(1.0));
    CHECK(gasket_spec().hausdorff_dim() ==
          doctest::Approx(std::log(3.0) / std::log(2.0)).epsilon(1e-14));
    CHECK(sponge_spec().alphabet_size == 20);
    CHECK(sponge_spec().hausdorff_dim() ==
          doctest::Approx(std::log(20.0) / std::log(3.0)).epsilon(1e-14));

    FractalSpec square = square_spec();
    CHECK(square.alphabet_size == 4);
    CHECK(square.hausdorff_dim() == doctest::Approx(2.0).epsilon(1e-14));

    FractalSpec c2 = product_spec(carpet, carpet);
    CHECK(c2.alphabet_size == 64);
    CHECK(c2.hausdorff_dim() == doctest::Approx(std::log(64.0) / std::log(3.0)).epsilon(1e-14));

    CHECK_THROWS_AS(product_spec(interval_spec(), carpet_spec()), RatioMismatch);
}

TEST_CASE("registry expressions") {
    CHECK(resolve_spec("carpet^2").alphabet_size == 64);
    CHECK(resolve_spec("carpet*carpet").canonical_id() == "carpet*carpet");
    CHECK(resolve_spec("square").canonical_id() == "interval*interval");
    CHECK(resolve_spec("intervalxgasket").alphabet_size == 6);
    CHECK(resolve_spec("interval*gasket").alphabet_size == 6);
    CHECK_THROWS_AS(resolve_spec("interval*carpet"), RatioMismatch);
    CHECK_THROWS_AS(resolve_spec("blancmange"), InvalidSpec);
    CHECK_THROWS_AS(resolve_spec("carpet^0"), InvalidSpec);
    CHECK(spec_hash(resolve_spec("square")) == spec_hash(resolve_spec("interval*interval")));
}

TEST_CASE("interval level 3 is a path of 8 cells") {
    auto g = build_graph(interval_spec(), 3);
    CHECK(g->cell_count() == 8);
    CHECK(count_edges(*g) == 7);
    CHECK(g->connected());
    CHECK(g->max_degree() == 2);
    for (CellId c = 0; c + 1 < 8; ++c) {
        auto nb = g->neighbors(c);
        CHECK(std::find(nb.begin(), nb.end(), c + 1) != nb.end());
    }
}

TEST_CASE("carpet level 1 is the 3x3 grid minus center") {
    auto g = build_graph(carpet_spec(), 1);
    CHECK(g->cell_count() == 8);
    // Full 8-neighbor 3x3 grid has 20 edges; removing the center cell takes
    // away its 8 incidences.
    CHECK(count_edges(*g) == 12);
    CHECK(g->connected());
    int deg2 = 0, deg4 = 0;
    for (CellId c = 0; c < 8; ++c) {
        auto d = g->neighbors(c).size();
        if (d == 2) ++deg2;
        if (d == 4) ++deg4;
    }
    CHECK(deg2 == 4); // corner cells
    CHECK(deg4 == 4); // edge-midpoint cells
}

TEST_CASE("gasket level 2: 9 cells, 3 inter-parent contacts") {
    auto g = build_graph(gasket_spec(), 2);
    CHECK(g->cell_count() == 9);
    int inter = 0, intra = 0;
    for (CellId c = 0; c < 9; ++c)
        for (CellId nb : g->neighbors(c)) {
            if (c >= nb) continue;
            if (c / 3 == nb / 3)
                ++intra;
            else
                ++inter;
        }
    CHECK(inter == 3);
    CHECK(intra == 9);
    CHECK(g->connected());
}

TEST_CASE("gasket adjacency matches the exact triangle-intersection oracle") {
    for (int level : {1, 2, 3}) {
        auto g = build_graph(gasket_spec(), level);
        const auto& fl = g->factor(0);
        for (CellId a = 0; a < g->cell_count(); ++a) {
            std::set<CellId> nb(g->neighbors(a).begin(), g->neighbors(a).end());
            for (CellId b = 0; b < g->cell_count(); ++b) {
                if (a == b) continue;
                bool oracle = triangles_intersect(fl.tri_verts[a], fl.tri_verts[b]);
                CHECK(oracle == (nb.count(b) > 0));
            }
        }
    }
}

TEST_CASE("adjacency is symmetric and irreflexive on shipped specs") {
    for (const char* name : {"interval", "square", "carpet", "gasket"}) {
        auto g = build_graph(resolve_spec(name), 2);
        for (CellId c = 0; c < g->cell_count(); ++c) {
            for (CellId nb : g->neighbors(c)) {
                CHECK(nb != c);
                auto back = g->neighbors(nb);
                CHECK(std::find(back.begin(), back.end(), c) != back.end());
            }
        }
    }
}

TEST_CASE("degree stays bounded across levels") {
    for (const char* name : {"interval", "square", "carpet", "gasket"}) {
        FractalSpec spec = resolve_spec(name);
        int reference = build_graph(spec, 2)->max_degree();
        for (int level = 1; level <= 5; ++level) {
            auto g = build_graph(spec, level);
            CHECK(g->max_degree() <= reference);
        }
    }
}

TEST_CASE("cell measures are exactly uniform and sum to one") {
    for (const char* name : {"interval", "square", "carpet", "gasket"}) {
        FractalSpec spec = resolve_spec(name);
        for (int level = 1; level <= 5; ++level) {
            std::int64_t count = 1;
            for (int i = 0; i < level; ++i) count *= spec.alphabet_size;
            if (count > 100000) break;
            auto g = build_graph(spec, level);
            Rational m = g->cell_measure_rational();
            CHECK(m == Rational(1, count));
            Rational sum(0);
            for (std::int64_t i = 0; i < count; ++i) sum += m;
            CHECK(sum == Rational(1));
        }
    }
}

TEST_CASE("metric balls: radius zero, hand-computed interval ball, full radius") {
    auto g = build_graph(interval_spec(), 3);
    CHECK(g->metric_ball(0, 0.0) == std::vector<CellId>{0});
    // Centers 1/16, 3/16, 5/16 are within 0.3 of the leftmost center; 7/16
    // is not.
    CHECK(g->metric_ball(0, 0.3) == std::vector<CellId>{0, 1, 2});
    CHECK(g->metric_ball(3, g->diameter()).size() == 8);

    // Monotone in the radius.
    std::size_t prev = 0;
    for (double r : {0.0, 0.1, 0.2, 0.3, 0.5, 1.0}) {
        std::size_t size = g->metric_ball(2, r).size();
        CHECK(size >= prev);
        prev = size;
    }
}

TEST_CASE("discrete Ahlfors regularity with one constant per spec") {
    // mass(B(x,r)) / r^d_H bounded above and below by one constant across
    // levels 1..4 and radii in [cell_diameter, diameter]. Constants frozen
    // after inspection; they absorb the l-infinity/l-2 and lattice effects.
    const double kRegularity = 16.0;
    for (const char* name : {"interval", "square", "carpet", "gasket"}) {
        FractalSpec spec = resolve_spec(name);
        const double dh = spec.hausdorff_dim();
        for (int level = 1; level <= 4; ++level) {
            auto g = build_graph(spec, level);
            for (double r = g->cell_diameter(); r <= g->diameter(); r *= 2.0) {
                for (CellId c = 0; c < g->cell_count(); ++c) {
                    double mass = static_cast<double>(g->metric_ball(c, r).size()) *
                                  g->cell_measure();
                    double ratio = mass / std::pow(r / g->diameter(), dh);
                    CHECK(ratio <= kRegularity);
                    CHECK(ratio >= 1.0 / kRegularity);
                }
            }
        }
    }
}

TEST_CASE("pushforward of the uniform measure is uniform") {
    for (const char* name : {"interval", "carpet", "gasket"}) {
        FractalSpec spec = resolve_spec(name);
        auto g = build_graph(spec, 3);
        MeasureVector uniform = MeasureVector::uniform(g);
        for (int k : {1, 2}) {
            CellAddress target;
            target.word.assign(k, spec.alphabet_size > 2 ? 1 : 0);
            CellMap map = make_cell_map(g, target);
            MeasureVector pushed = cell_pushforward(uniform, map);
            for (double w : pushed.weights)
                CHECK(w == doctest::Approx(pushed.graph->cell_measure()).epsilon(1e-12));
        }
    }
}

TEST_CASE("pushforward: carpet level 2 block and point masses") {
    auto g = build_graph(carpet_spec(), 2);
    MeasureVector uniform = MeasureVector::uniform(g);
    CellAddress parent;
    parent.word = {3};
    CellMap map = make_cell_map(g, parent);
    MeasureVector pushed = cell_pushforward(uniform, map);
    CHECK(pushed.weights.size() == 8);
    for (double w : pushed.weights) CHECK(w == doctest::Approx(1.0 / 8.0));

    // Point mass on one level-2 cell maps to a point mass on its source cell.
    MeasureVector point = MeasureVector::zero(g);
    point.weights[3 * 8 + 5] = 1.0;
    MeasureVector pp = cell_pushforward(point, map);
    for (CellId c = 0; c < 8; ++c) CHECK(pp.weights[c] == (c == 5 ? 1.0 : 0.0));

    // Zero mass under the target cell.
    CellAddress other;
    other.word = {4};
    CellMap map2 = make_cell_map(g, other);
    CHECK_THROWS_AS(cell_pushforward(point, map2), ZeroMass);
}

TEST_CASE("cell count cap and invalid geometry") {
    BuildOptions opt;
    opt.cell_cap = 100;
    CHECK_THROWS_AS(build_graph(carpet_spec(), 3, opt), CapExceeded);

    FractalSpec bad = interval_spec();
    bad.factors[0].cube_digits = {{0}, {0}};
    CHECK_THROWS_AS(build_graph(bad, 1), InvalidSpec);
}

TEST_CASE("graph cache roundtrip") {
    std::filesystem::path dir =
        std::filesystem::temp_directory_path() / "confmod-test-cache";
    std::filesystem::remove_all(dir);
    GraphCache cache(dir);

    FractalSpec spec = resolve_spec("gasket");
    CHECK_FALSE(cache.load(spec, 3).has_value());
    auto built = cache.get(spec, 3);
    auto loaded = cache.load(spec, 3);
    REQUIRE(loaded.has_value());
    CHECK((*loaded)->cell_count() == built->cell_count());
    CHECK((*loaded)->edge_count() == built->edge_count());
    for (CellId c = 0; c < built->cell_count(); ++c) {
        auto a = built->neighbors(c);
        auto b = (*loaded)->neighbors(c);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
    }
    // Wrong level and wrong spec both miss.
    CHECK_FALSE(cache.load(spec, 4).has_value());
    CHECK_FALSE(cache.load(resolve_spec("carpet"), 3).has_value());
    std::filesystem::remove_all(dir);
}

TEST_CASE("vertex networks: interval chain and gasket triangles") {
    auto gi = build_graph(interval_spec(), 3);
    VertexNetwork ni = build_vertex_network(gi);
    CHECK(ni.node_count == 9);
    CHECK(ni.edge_count() == 8);
    CHECK(ni.corner_nodes.size() == 2);
    for (std::uint32_t e = 0; e < ni.edge_count(); ++e) CHECK(ni.edge_owners(e).size() == 1);

    auto gg = build_graph(gasket_spec(), 2);
    VertexNetwork ng = build_vertex_network(gg);
    CHECK(ng.node_count == 15); // 3 * (3^2 + 1) / 2
    CHECK(ng.edge_count() == 27);
    CHECK(ng.corner_nodes.size() == 3);

    CHECK_THROWS_AS(build_vertex_network(build_graph(square_spec(), 2)), InvalidSpec);
}

TEST_CASE("product graph adjacency equals factor-wise adjacency") {
    auto g = build_graph(square_spec(), 2);
    CHECK(g->cell_count() == 16);
    auto gi = build_graph(interval_spec(), 2);
    for (CellId c = 0; c < g->cell_count(); ++c) {
        CellId ix = g->factor_index(c, 0);
        CellId iy = g->factor_index(c, 1);
        std::set<CellId> expect;
        auto with_self = [&](const ApproximationGraph& fg, CellId i) {
            std::vector<CellId> out{i};
            for (CellId nb : fg.neighbors(i)) out.push_back(nb);
            return out;
        };
        for (CellId a : with_self(*gi, ix))
            for (CellId b : with_self(*gi, iy)) {
                if (a == ix && b == iy) continue;
                std::array<CellId, 2> pick{a, b};
                expect.insert(g->from_factor_indices(pick));
            }
        std::set<CellId> got(g->neighbors(c).begin(), g->neighbors(c).end());
        CHECK(expect == got);
    }
}
