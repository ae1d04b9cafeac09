#include "confmod/modulus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>

#include "confmod/errors.hpp"

namespace confmod {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct OracleResult {
    bool found = false;
    double length = kInf;
    std::vector<CellId> cells;
};

// Node-weighted multi-source Dijkstra: cost of a path is the sum of rho over
// its cells, both endpoints included. The priority queue orders ties by cell
// index, which keeps returned paths deterministic. Returns the shortest path
// to every target cell reached below the cutoff (multi-cut generation);
// targets do not relax further, so each returned path is genuinely shortest.
std::vector<OracleResult> shortest_paths(const ApproximationGraph& g,
                                         const std::vector<double>& rho,
                                         const std::vector<CellId>& sources,
                                         const std::vector<char>& is_target,
                                         const std::vector<char>* allowed, double cutoff,
                                         std::size_t max_paths) {
    const CellId n = g.cell_count();
    std::vector<double> dist(n, kInf);
    std::vector<CellId> parent(n, n);
    std::vector<char> settled(n, 0);
    using Item = std::pair<double, CellId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
    for (CellId s : sources) {
        if (allowed && !(*allowed)[s]) continue;
        if (rho[s] < dist[s]) {
            dist[s] = rho[s];
            pq.push({dist[s], s});
        }
    }
    std::vector<OracleResult> found;
    while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (settled[u]) continue;
        settled[u] = 1;
        if (is_target[u]) {
            OracleResult res;
            res.found = true;
            res.length = d;
            for (CellId c = u; c != n; c = parent[c]) res.cells.push_back(c);
            std::reverse(res.cells.begin(), res.cells.end());
            found.push_back(std::move(res));
            if (found.size() >= max_paths) break;
            if (d > cutoff && found.size() >= 1) break;
            continue; // paths end at targets
        }
        for (CellId v : g.neighbors(u)) {
            if (settled[v] || (allowed && !(*allowed)[v])) continue;
            double nd = d + rho[v];
            if (nd < dist[v]) {
                dist[v] = nd;
                parent[v] = u;
                pq.push({nd, v});
            }
        }
    }
    return found;
}

std::vector<OracleResult> separation_cuts(const CurveFamily& fam, const std::vector<double>& rho,
                                          double cutoff, std::size_t max_paths) {
    std::vector<char> is_target(fam.graph->cell_count(), 0);
    for (CellId c : fam.target) is_target[c] = 1;
    std::vector<OracleResult> cuts;
    if (!fam.capped) {
        cuts = shortest_paths(*fam.graph, rho, fam.source, is_target, nullptr, cutoff, max_paths);
    } else {
        for (std::size_t a = 0; a < fam.anchor_sources.size(); ++a) {
            auto part = shortest_paths(*fam.graph, rho, fam.anchor_sources[a], is_target,
                                       &fam.anchor_allowed[a], cutoff, max_paths);
            cuts.insert(cuts.end(), std::make_move_iterator(part.begin()),
                        std::make_move_iterator(part.end()));
        }
        std::stable_sort(cuts.begin(), cuts.end(),
                         [](const OracleResult& a, const OracleResult& b) {
                             return a.length < b.length;
                         });
        if (cuts.size() > max_paths) cuts.resize(max_paths);
    }
    return cuts;
}

OracleResult separation_oracle(const CurveFamily& fam, const std::vector<double>& rho) {
    auto cuts = separation_cuts(fam, rho, -kInf, 1);
    if (cuts.empty()) return {};
    return cuts.front();
}

// Restricted dual state: lambda >= 0 per active path, s(c) = sum of lambda
// over paths through c, rho(c) = (s(c)/p)^(1/(p-1)).
struct DualState {
    double p;
    double q;               // 1/(p-1)
    std::vector<double> s;  // per cell
    std::vector<double> rho;

    explicit DualState(std::size_t n, double p_)
        : p(p_), q(1.0 / (p_ - 1.0)), s(n, 0.0), rho(n, 0.0) {}

    double rho_of(double sc) const { return sc <= 0.0 ? 0.0 : std::pow(sc / p, q); }

    double path_length(const std::vector<CellId>& cells) const {
        double len = 0.0;
        for (CellId c : cells) len += rho[c];
        return len;
    }

    // 1-D exact maximization in one path multiplier: pick t >= 0 so the
    // path's rho-length equals 1 (or t = 0 when already >= 1). Monotone in
    // t; safeguarded Newton on the bracket.
    double solve_multiplier(const std::vector<CellId>& cells, double lambda_old) const {
        auto len_at = [&](double t) {
            double len = 0.0;
            for (CellId c : cells) len += rho_of(s[c] - lambda_old + t);
            return len;
        };
        if (len_at(0.0) >= 1.0) return 0.0;
        double hi = std::max(lambda_old, p * std::pow(1.0 / cells.size(), p - 1.0));
        if (hi <= 0.0) hi = 1.0;
        while (len_at(hi) < 1.0) hi *= 2.0;
        double lo = 0.0;
        double t = (lambda_old > 0.0 && lambda_old < hi) ? lambda_old : 0.5 * hi;
        for (int it = 0; it < 200; ++it) {
            double len = len_at(t);
            if (std::abs(len - 1.0) <= 1e-15) return t;
            if (len < 1.0)
                lo = t;
            else
                hi = t;
            if (hi - lo <= 1e-16 * std::max(1.0, hi)) break;
            // Newton step on len(t) - 1, clamped into the bracket.
            double deriv = 0.0;
            for (CellId c : cells) {
                double sc = s[c] - lambda_old + t;
                if (sc > 0.0) deriv += q / p * std::pow(sc / p, q - 1.0);
            }
            double tn = deriv > 0.0 ? t - (len - 1.0) / deriv : 0.5 * (lo + hi);
            t = (tn > lo && tn < hi) ? tn : 0.5 * (lo + hi);
        }
        return 0.5 * (lo + hi);
    }

    void apply_delta(const std::vector<CellId>& cells, double delta) {
        for (CellId c : cells) {
            s[c] += delta;
            if (s[c] < 0.0) s[c] = 0.0;
            rho[c] = rho_of(s[c]);
        }
    }

    double objective() const {
        double obj = 0.0;
        for (double r : rho)
            if (r > 0.0) obj += std::pow(r, p);
        return obj;
    }

    // Weak-duality lower bound on the full program:
    //   g(lambda) = sum lambda - (p-1) * sum_c (s_c/p)^(p/(p-1)).
    double dual_value(double lambda_total) const {
        double sum = 0.0;
        for (double sc : s)
            if (sc > 0.0) sum += std::pow(sc / p, p * q);
        return lambda_total - (p - 1.0) * sum;
    }
};

} // namespace

ModulusResult solve_modulus(const CurveFamily& family, double p, const SolverOptions& options) {
    if (!(p > 1.0)) throw BadExponent("p must be > 1");
    if (!(options.tol > 0.0)) throw Error("InvalidArgument", "tol must be > 0");
    const auto& g = *family.graph;
    const CellId n = g.cell_count();

    ModulusResult res;
    res.p = p;

    // Emptiness: with rho = 0 the oracle degenerates to reachability.
    {
        std::vector<double> zero(n, 0.0);
        OracleResult reach = separation_oracle(family, zero);
        if (!reach.found) {
            res.rho.assign(n, 0.0);
            res.value = 0.0;
            res.slack = kInf;
            res.empty_family = true;
            return res;
        }
    }

    DualState state(n, p);
    std::vector<std::vector<CellId>> paths;
    std::vector<double> lambda;
    std::vector<std::vector<std::uint32_t>> cell_paths(n); // incidence for the worklist
    std::set<std::vector<CellId>> seen;
    std::vector<std::uint32_t> fresh_paths;

    auto add_path = [&](std::vector<CellId> cells) {
        std::vector<CellId> key = cells;
        std::sort(key.begin(), key.end());
        key.erase(std::unique(key.begin(), key.end()), key.end());
        if (!seen.insert(key).second) return false;
        std::uint32_t id = static_cast<std::uint32_t>(paths.size());
        for (CellId c : key) cell_paths[c].push_back(id);
        paths.push_back(std::move(key)); // constraints depend on the cell set only
        lambda.push_back(0.0);
        fresh_paths.push_back(id);
        return true;
    };

    // Warm-start paths must be genuine family constraints; a stray
    // constraint would change the program, not just the starting point.
    for (const auto& path : options.initial_paths) {
        if (path.empty()) throw Error("InvalidArgument", "empty warm-start path");
        if (!std::binary_search(family.source.begin(), family.source.end(), path.front()) ||
            !std::binary_search(family.target.begin(), family.target.end(), path.back()))
            throw Error("InvalidArgument", "warm-start path endpoints are not source/target");
        for (std::size_t i = 0; i + 1 < path.size(); ++i) {
            auto nb = g.neighbors(path[i]);
            if (!std::binary_search(nb.begin(), nb.end(), path[i + 1]))
                throw Error("InvalidArgument", "warm-start path is not a graph path");
        }
        add_path(path);
    }

    // Worklist coordinate ascent: updating one multiplier only disturbs the
    // paths sharing a cell with it, so changes propagate through the
    // incidence lists instead of full passes over the active set.
    std::deque<std::uint32_t> queue;
    std::vector<char> queued;
    auto relax = [&](std::span<const std::uint32_t> seeds, double update_tol,
                     std::size_t max_updates) {
        queued.assign(paths.size(), 0);
        queue.clear();
        for (std::uint32_t i : seeds)
            if (!queued[i]) {
                queued[i] = 1;
                queue.push_back(i);
            }
        std::size_t updates = 0;
        while (!queue.empty() && updates < max_updates) {
            std::uint32_t i = queue.front();
            queue.pop_front();
            queued[i] = 0;
            ++updates;
            double fresh = state.solve_multiplier(paths[i], lambda[i]);
            double delta = fresh - lambda[i];
            if (std::abs(delta) <= update_tol * std::max(1.0, fresh + lambda[i])) continue;
            state.apply_delta(paths[i], delta);
            lambda[i] = fresh;
            for (CellId c : paths[i])
                for (std::uint32_t j : cell_paths[c])
                    if (j != i && !queued[j]) {
                        queued[j] = 1;
                        queue.push_back(j);
                    }
        }
    };
    std::vector<std::uint32_t> all_paths;
    auto relax_all = [&](double update_tol, std::size_t max_updates) {
        all_paths.resize(paths.size());
        for (std::uint32_t i = 0; i < all_paths.size(); ++i) all_paths[i] = i;
        relax(all_paths, update_tol, max_updates);
    };

    const double tol = options.tol;
    double prev_obj = -1.0;
    int iter = 0;
    bool converged = false;
    const std::size_t batch = 32; // violated paths taken per oracle call
    const double grow_tol = 1e-6;
    const double polish_tol = std::min(1e-13, 0.1 * tol);
    auto budget = [&] { return 100000 + 100 * paths.size(); };

    if (!paths.empty()) {
        relax_all(grow_tol, budget());
        fresh_paths.clear();
    }

    while (iter < options.max_iterations) {
        ++iter;
        auto cuts = separation_cuts(family, state.rho, 1.0 - tol, batch);
        double shortest = cuts.empty() ? kInf : cuts.front().length;
        double obj = state.objective();
        if (shortest >= 1.0 - tol) {
            if (prev_obj >= 0.0 && std::abs(obj - prev_obj) <= tol * std::max(obj, 1e-300)) {
                converged = true;
                break;
            }
            prev_obj = obj;
            relax_all(polish_tol, budget());
            continue;
        }
        prev_obj = obj;
        // Keep only cell-disjoint cuts from one batch; overlapping paths
        // through the same bottleneck are near-duplicates that bloat the
        // active set without advancing the dual.
        fresh_paths.clear();
        std::vector<char> used(n, 0);
        for (const auto& cut : cuts) {
            if (cut.length >= 1.0 - tol) break;
            bool overlaps = false;
            for (CellId c : cut.cells)
                if (used[c]) {
                    overlaps = true;
                    break;
                }
            if (overlaps) continue;
            if (add_path(cut.cells))
                for (CellId c : cut.cells) used[c] = 1;
        }
        if (fresh_paths.empty()) {
            // Every violated path is already active: the quick solve was not
            // tight enough, polish the multipliers instead.
            relax_all(polish_tol, budget());
            continue;
        }
        relax(fresh_paths, grow_tol, budget());
    }

    double lambda_total = 0.0;
    for (double l : lambda) lambda_total += l;
    res.lower_bound = std::max(0.0, state.dual_value(lambda_total));
    res.iterations = iter;
    res.active_paths = paths.size();

    OracleResult fin = separation_oracle(family, state.rho);
    if (!converged && fin.length < 1.0 - 10.0 * tol)
        throw NonConvergence("modulus solver hit the iteration budget",
                             state.objective() / std::pow(std::max(fin.length, 1e-300), p),
                             res.lower_bound, iter);

    // Rescale to exact admissibility: reported value is a true upper bound.
    double len = fin.length;
    res.rho = state.rho;
    if (len > 0.0 && std::isfinite(len))
        for (double& r : res.rho) r /= len;
    double value = 0.0;
    for (double r : res.rho)
        if (r > 0.0) value += std::pow(r, p);
    res.value = value;
    OracleResult check = separation_oracle(family, res.rho);
    res.slack = check.length - 1.0;
    res.duality_gap = res.value - res.lower_bound;
    return res;
}

ModulusResult annulus_modulus(const std::shared_ptr<const ApproximationGraph>& graph,
                              CellId center, double r, double p, const SolverOptions& options) {
    if (r > graph->diameter() / 32.0)
        throw RadiusOutOfRange("annulus radius exceeds diameter/32");
    if (r < graph->cell_diameter())
        throw RadiusOutOfRange("annulus radius is below the cell scale");
    CurveFamily fam = annulus_family(graph, center, r, 2.0 * r);
    return solve_modulus(fam, p, options);
}

ModulusResult ball_to_ball_modulus(const std::shared_ptr<const ApproximationGraph>& graph,
                                   CellId x, CellId y, double r, double A, double p, double L,
                                   const SolverOptions& options) {
    if (L <= 0.0) L = 2.0 * (A + 10.0); // lemma-style default cap multiple
    CurveFamily fam = ball_to_ball_family(graph, x, y, r, A, L);
    return solve_modulus(fam, p, options);
}

std::vector<double> potential_from_weights(const CurveFamily& family,
                                           const std::vector<double>& rho) {
    const auto& g = *family.graph;
    const CellId n = g.cell_count();
    for (double r : rho)
        if (!(r >= 0.0) || !std::isfinite(r))
            throw Error("InvalidArgument", "rho must be nonnegative and finite");

    // Multi-source Dijkstra from the target side; path cost includes both
    // endpoint cells.
    std::vector<double> dist(n, kInf);
    std::vector<char> settled(n, 0);
    using Item = std::pair<double, CellId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
    for (CellId t : family.target) {
        if (rho[t] < dist[t]) {
            dist[t] = rho[t];
            pq.push({dist[t], t});
        }
    }
    while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (settled[u]) continue;
        settled[u] = 1;
        for (CellId v : g.neighbors(u)) {
            if (settled[v]) continue;
            double nd = d + rho[v];
            if (nd < dist[v]) {
                dist[v] = nd;
                pq.push({nd, v});
            }
        }
    }
    std::vector<double> f(dist);
    for (CellId t : family.target) f[t] = 0.0;
    return f;
}

} // namespace confmod
