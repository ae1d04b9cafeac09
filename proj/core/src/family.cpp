#include "confmod/family.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "confmod/errors.hpp"

namespace confmod {

std::string CurveFamily::describe() const {
    char buf[160];
    switch (kind) {
        case FamilyKind::AnnulusCrossing:
            std::snprintf(buf, sizeof(buf), "annulus(center=%u,r=%g,R=%g)", center, inner_radius,
                          outer_radius);
            break;
        case FamilyKind::BallToBall:
            std::snprintf(buf, sizeof(buf), "ball2ball(x=%u,r=%g,cap=%g)", center, inner_radius,
                          cap);
            break;
        case FamilyKind::PointToPoint:
            std::snprintf(buf, sizeof(buf), "point2point(|A|=%zu,|B|=%zu)", source.size(),
                          target.size());
            break;
    }
    return buf;
}

CurveFamily point_to_point_family(std::shared_ptr<const ApproximationGraph> graph,
                                  std::vector<CellId> source, std::vector<CellId> target) {
    if (source.empty() || target.empty())
        throw EmptyFamily("point-to-point family needs non-empty cell sets");
    std::sort(source.begin(), source.end());
    std::sort(target.begin(), target.end());
    CurveFamily fam;
    fam.kind = FamilyKind::PointToPoint;
    fam.graph = std::move(graph);
    fam.source = std::move(source);
    fam.target = std::move(target);
    return fam;
}

CurveFamily annulus_family(std::shared_ptr<const ApproximationGraph> graph, CellId center,
                           double r, double R) {
    if (!(r > 0.0) || !(R > r)) throw RadiusOutOfRange("annulus needs 0 < r < R");
    CurveFamily fam;
    fam.kind = FamilyKind::AnnulusCrossing;
    fam.source = graph->metric_ball(center, r);
    std::vector<CellId> inside = graph->metric_ball(center, R);
    std::vector<char> in_mask(graph->cell_count(), 0);
    for (CellId c : inside) in_mask[c] = 1;
    for (CellId c = 0; c < graph->cell_count(); ++c)
        if (!in_mask[c]) fam.target.push_back(c);
    if (fam.source.empty()) throw RadiusOutOfRange("annulus inner ball is empty");
    if (fam.target.empty())
        throw RadiusOutOfRange("annulus outer complement is empty (R too large)");
    fam.center = center;
    fam.inner_radius = r;
    fam.outer_radius = R;
    fam.graph = std::move(graph);
    return fam;
}

CurveFamily ball_to_ball_family(std::shared_ptr<const ApproximationGraph> graph, CellId x,
                                CellId y, double r, double A, double L) {
    if (!(r > 0.0) || !(A > 0.0) || !(L > 0.0))
        throw RadiusOutOfRange("ball-to-ball needs positive r, A, L");
    CurveFamily fam;
    fam.kind = FamilyKind::BallToBall;
    fam.source = graph->metric_ball(x, r);
    fam.target = graph->metric_ball(y, r);

    std::vector<char> in_source(graph->cell_count(), 0);
    for (CellId c : fam.source) in_source[c] = 1;
    for (CellId c : fam.target)
        if (in_source[c]) throw BallsOverlap("B(x,r) and B(y,r) share cells");
    if (graph->distance(x, y) - 2.0 * r > A * r)
        throw RadiusOutOfRange("ball separation exceeds A*r");

    // Bucket anchors: group source cells by buckets of side cap/4 and allow
    // only cells within `cap` of the bucket center. Admitted paths then have
    // diameter <= 2*cap.
    fam.cap = L * r;
    fam.capped = true;
    const double side = fam.cap / 4.0;
    const int dim = graph->spec().total_dim();
    std::map<std::vector<std::int64_t>, std::vector<CellId>> buckets;
    for (CellId c : fam.source) {
        std::vector<double> coords = graph->center_coords(c);
        std::vector<std::int64_t> key(dim);
        for (int d = 0; d < dim; ++d) key[d] = static_cast<std::int64_t>(std::floor(coords[d] / side));
        buckets[key].push_back(c);
    }
    for (const auto& [key, cells] : buckets) {
        std::vector<double> anchor(dim);
        for (int d = 0; d < dim; ++d) anchor[d] = (static_cast<double>(key[d]) + 0.5) * side;
        std::vector<char> allowed(graph->cell_count(), 0);
        for (CellId c = 0; c < graph->cell_count(); ++c) {
            std::vector<double> coords = graph->center_coords(c);
            if (graph->point_distance(anchor, coords) <= fam.cap) allowed[c] = 1;
        }
        for (CellId c : cells) allowed[c] = 1;
        fam.anchor_sources.push_back(cells);
        fam.anchor_allowed.push_back(std::move(allowed));
    }

    fam.center = x;
    fam.inner_radius = r;
    fam.graph = std::move(graph);
    return fam;
}

} // namespace confmod
