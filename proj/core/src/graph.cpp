#include "confmod/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <queue>
#include <unordered_map>

#include "confmod/errors.hpp"

namespace confmod {

double FactorLevel::distance(CellId a, CellId b) const {
    if (base.geometry == GeometryKind::Cube) {
        // Centers sit on a uniform grid; the l-infinity distance is an exact
        // integer difference times the cell side.
        const int dim = base.dim;
        std::int64_t dmax = 0;
        for (int d = 0; d < dim; ++d) {
            std::int64_t diff = cube_grid[static_cast<std::size_t>(a) * dim + d] -
                                cube_grid[static_cast<std::size_t>(b) * dim + d];
            dmax = std::max<std::int64_t>(dmax, std::llabs(diff));
        }
        double side = std::pow(base.contraction_ratio.to_double(), level);
        return static_cast<double>(dmax) * side;
    }
    double dx = center(a, 0) - center(b, 0);
    double dy = center(a, 1) - center(b, 1);
    return std::hypot(dx, dy);
}

namespace {

struct GridKey {
    std::array<std::int64_t, 3> v{0, 0, 0};
    bool operator==(const GridKey&) const = default;
};

struct GridKeyHash {
    std::size_t operator()(const GridKey& k) const {
        std::uint64_t h = 1469598103934665603ull;
        for (std::int64_t x : k.v) {
            h ^= static_cast<std::uint64_t>(x);
            h *= 1099511628211ull;
        }
        return static_cast<std::size_t>(h);
    }
};

void pack_csr(const std::vector<std::vector<CellId>>& nbrs, std::vector<std::uint64_t>& offsets,
              std::vector<CellId>& adj) {
    offsets.assign(nbrs.size() + 1, 0);
    for (std::size_t c = 0; c < nbrs.size(); ++c) offsets[c + 1] = offsets[c] + nbrs[c].size();
    adj.clear();
    adj.reserve(offsets.back());
    for (const auto& v : nbrs) adj.insert(adj.end(), v.begin(), v.end());
}

// Enumerates level-n cube cells of one factor. Cells nest lexicographically:
// the children of parent index q are q*a .. q*a + (a-1), and their grid
// coordinates are parent_grid*b + letter_digit.
FactorLevel build_cube_factor(const BaseSpec& base, int level) {
    FactorLevel fl;
    fl.base = base;
    fl.level = level;
    const int dim = base.dim;
    const int a = base.alphabet_size;
    const std::int64_t b = base.contraction_ratio.den();

    std::vector<std::int64_t> grids(dim, 0); // level 0: single cell at origin
    for (int lv = 1; lv <= level; ++lv) {
        const std::size_t prev_count = grids.size() / dim;
        std::vector<std::int64_t> next(prev_count * a * dim);
        for (std::size_t q = 0; q < prev_count; ++q)
            for (int letter = 0; letter < a; ++letter)
                for (int d = 0; d < dim; ++d)
                    next[(q * a + letter) * dim + d] =
                        grids[q * dim + d] * b + base.cube_digits[letter][d];
        grids.swap(next);
    }

    fl.cell_count = static_cast<CellId>(grids.size() / dim);
    fl.cube_grid = std::move(grids);

    const double side = std::pow(base.contraction_ratio.to_double(), level);
    fl.centers.resize(static_cast<std::size_t>(fl.cell_count) * dim);
    for (CellId c = 0; c < fl.cell_count; ++c)
        for (int d = 0; d < dim; ++d)
            fl.centers[static_cast<std::size_t>(c) * dim + d] =
                (static_cast<double>(fl.cube_grid[static_cast<std::size_t>(c) * dim + d]) + 0.5) *
                side;

    // Closed cells [g, g+1] intersect exactly when grid coordinates differ by
    // at most 1 in every dimension. Probe the 3^dim - 1 candidate offsets.
    std::unordered_map<GridKey, CellId, GridKeyHash> lookup;
    lookup.reserve(fl.cell_count * 2);
    for (CellId c = 0; c < fl.cell_count; ++c) {
        GridKey k;
        for (int d = 0; d < dim; ++d) k.v[d] = fl.cube_grid[static_cast<std::size_t>(c) * dim + d];
        lookup.emplace(k, c);
    }
    int total_probes = 1;
    for (int d = 0; d < dim; ++d) total_probes *= 3;
    std::vector<std::vector<CellId>> nbrs(fl.cell_count);
    for (CellId c = 0; c < fl.cell_count; ++c) {
        GridKey k;
        for (int d = 0; d < dim; ++d) k.v[d] = fl.cube_grid[static_cast<std::size_t>(c) * dim + d];
        for (int p = 0; p < total_probes; ++p) {
            GridKey probe = k;
            int rem = p;
            bool self = true;
            for (int d = 0; d < dim; ++d) {
                int off = rem % 3 - 1;
                rem /= 3;
                probe.v[d] += off;
                if (off != 0) self = false;
            }
            if (self) continue;
            auto it = lookup.find(probe);
            if (it != lookup.end()) nbrs[c].push_back(it->second);
        }
        std::sort(nbrs[c].begin(), nbrs[c].end());
    }
    pack_csr(nbrs, fl.adj_offsets, fl.adj);
    return fl;
}

// Level-n triangle cells of the gasket. Vertices are tracked as exact
// integers scaled by 2^n; two closed cells of the subdivision intersect
// exactly when they share a vertex.
FactorLevel build_simplex_factor(const BaseSpec& base, int level) {
    FactorLevel fl;
    fl.base = base;
    fl.level = level;
    const int a = base.alphabet_size; // 3

    static const std::int64_t vx[3] = {0, 1, 0};
    static const std::int64_t vy[3] = {0, 0, 1};

    std::vector<std::array<std::int64_t, 6>> tris = {{0, 0, 1, 0, 0, 1}};
    for (int lv = 1; lv <= level; ++lv) {
        std::vector<std::array<std::int64_t, 6>> next(tris.size() * a);
        for (std::size_t q = 0; q < tris.size(); ++q) {
            // Scaled translation of the parent map: twice its vertex-0.
            const std::int64_t ox = 2 * tris[q][0];
            const std::int64_t oy = 2 * tris[q][1];
            for (int letter = 0; letter < a; ++letter) {
                auto& t = next[q * a + letter];
                for (int m = 0; m < 3; ++m) {
                    t[2 * m] = vx[m] + vx[letter] + ox;
                    t[2 * m + 1] = vy[m] + vy[letter] + oy;
                }
            }
        }
        tris.swap(next);
    }
    fl.tri_verts = std::move(tris);
    fl.cell_count = static_cast<CellId>(fl.tri_verts.size());

    const double scale = std::pow(0.5, level);
    fl.centers.resize(static_cast<std::size_t>(fl.cell_count) * 2);
    for (CellId c = 0; c < fl.cell_count; ++c) {
        const auto& t = fl.tri_verts[c];
        fl.centers[2 * c] = (t[0] + t[2] + t[4]) / 3.0 * scale;
        fl.centers[2 * c + 1] = (t[1] + t[3] + t[5]) / 3.0 * scale;
    }

    std::map<std::pair<std::int64_t, std::int64_t>, std::vector<CellId>> by_vertex;
    for (CellId c = 0; c < fl.cell_count; ++c)
        for (int m = 0; m < 3; ++m)
            by_vertex[{fl.tri_verts[c][2 * m], fl.tri_verts[c][2 * m + 1]}].push_back(c);

    std::vector<std::vector<CellId>> nbrs(fl.cell_count);
    for (const auto& [v, cells] : by_vertex)
        for (std::size_t i = 0; i < cells.size(); ++i)
            for (std::size_t j = i + 1; j < cells.size(); ++j) {
                nbrs[cells[i]].push_back(cells[j]);
                nbrs[cells[j]].push_back(cells[i]);
            }
    for (auto& v : nbrs) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    pack_csr(nbrs, fl.adj_offsets, fl.adj);
    return fl;
}

std::int64_t checked_pow(std::int64_t base, int e, std::int64_t cap) {
    __int128 v = 1;
    for (int i = 0; i < e; ++i) {
        v *= base;
        if (v > cap) return -1;
    }
    return static_cast<std::int64_t>(v);
}

} // namespace

CellId ApproximationGraph::from_factor_indices(std::span<const CellId> idx) const {
    if (factors_.size() == 1) return idx[0];
    const int n = level_;
    const int k = static_cast<int>(factors_.size());
    // Per-factor digit expansion (most significant first), then recompose the
    // interleaved product letters.
    std::array<std::array<int, 32>, 8> digits{};
    for (int f = 0; f < k; ++f) {
        std::uint64_t rem = idx[f];
        const int a = factors_[f].base.alphabet_size;
        for (int i = n - 1; i >= 0; --i) {
            digits[f][i] = static_cast<int>(rem % a);
            rem /= a;
        }
    }
    std::uint64_t full = 0;
    for (int i = 0; i < n; ++i) {
        std::uint64_t letter = 0;
        for (int f = 0; f < k; ++f)
            letter = letter * factors_[f].base.alphabet_size + digits[f][i];
        full = full * static_cast<std::uint64_t>(spec_.alphabet_size) + letter;
    }
    return static_cast<CellId>(full);
}

CellId ApproximationGraph::sub_index(CellId c, int fbegin, int fend) const {
    const int k = static_cast<int>(factors_.size());
    std::uint64_t out = 0;
    std::uint64_t rem = c;
    std::array<std::uint64_t, 32> letters{};
    for (int i = level_ - 1; i >= 0; --i) {
        letters[i] = rem % spec_.alphabet_size;
        rem /= spec_.alphabet_size;
    }
    std::uint64_t sub_alpha = 1;
    for (int f = fbegin; f < fend; ++f) sub_alpha *= factors_[f].base.alphabet_size;
    for (int i = 0; i < level_; ++i) {
        std::uint64_t letter = letters[i];
        std::array<std::uint64_t, 8> dig{};
        for (int f = k - 1; f >= 0; --f) {
            dig[f] = letter % factors_[f].base.alphabet_size;
            letter /= factors_[f].base.alphabet_size;
        }
        std::uint64_t sub_letter = 0;
        for (int f = fbegin; f < fend; ++f)
            sub_letter = sub_letter * factors_[f].base.alphabet_size + dig[f];
        out = out * sub_alpha + sub_letter;
    }
    return static_cast<CellId>(out);
}

CellAddress ApproximationGraph::address_of(CellId c) const {
    CellAddress addr;
    addr.word.assign(level_, 0);
    std::uint64_t rem = c;
    for (int i = level_ - 1; i >= 0; --i) {
        addr.word[i] = static_cast<int>(rem % spec_.alphabet_size);
        rem /= spec_.alphabet_size;
    }
    return addr;
}

CellId ApproximationGraph::index_of(const CellAddress& addr) const {
    if (addr.level() != level_) throw InvalidSpec("address level does not match graph level");
    std::uint64_t idx = 0;
    for (int letter : addr.word) {
        if (letter < 0 || letter >= spec_.alphabet_size) throw InvalidSpec("letter out of range");
        idx = idx * spec_.alphabet_size + static_cast<std::uint64_t>(letter);
    }
    return static_cast<CellId>(idx);
}

double ApproximationGraph::distance(CellId a, CellId b) const {
    double dmax = 0.0;
    for (std::size_t f = 0; f < factors_.size(); ++f) {
        CellId fa = factor_index(a, static_cast<int>(f));
        CellId fb = factor_index(b, static_cast<int>(f));
        dmax = std::max(dmax, factors_[f].distance(fa, fb));
    }
    return dmax;
}

std::vector<double> ApproximationGraph::center_coords(CellId c) const {
    std::vector<double> out;
    out.reserve(spec_.total_dim());
    for (std::size_t f = 0; f < factors_.size(); ++f) {
        CellId fc = factor_index(c, static_cast<int>(f));
        for (int d = 0; d < factors_[f].base.dim; ++d) out.push_back(factors_[f].center(fc, d));
    }
    return out;
}

double ApproximationGraph::point_distance(std::span<const double> a,
                                          std::span<const double> b) const {
    double dmax = 0.0;
    std::size_t off = 0;
    for (const auto& fl : factors_) {
        double d = 0.0;
        if (fl.base.metric == MetricKind::L2) {
            double s = 0.0;
            for (int i = 0; i < fl.base.dim; ++i) {
                double diff = a[off + i] - b[off + i];
                s += diff * diff;
            }
            d = std::sqrt(s);
        } else {
            for (int i = 0; i < fl.base.dim; ++i)
                d = std::max(d, std::abs(a[off + i] - b[off + i]));
        }
        dmax = std::max(dmax, d);
        off += fl.base.dim;
    }
    return dmax;
}

std::vector<CellId> ApproximationGraph::metric_ball(CellId center_cell, double radius) const {
    if (radius < 0) throw RadiusOutOfRange("metric_ball: negative radius");
    std::vector<CellId> out;
    for (CellId c = 0; c < cell_count_; ++c)
        if (distance(center_cell, c) <= radius) out.push_back(c);
    return out;
}

std::vector<CellId> ApproximationGraph::corner_cells() const {
    // Corner cells repeat one extreme letter at every level.
    std::vector<std::vector<int>> factor_corner_letters;
    for (const auto& fl : factors_) {
        std::vector<int> letters;
        if (fl.base.geometry == GeometryKind::Cube) {
            const int b = static_cast<int>(fl.base.contraction_ratio.den());
            const int corners = 1 << fl.base.dim;
            for (int mask = 0; mask < corners; ++mask)
                for (int letter = 0; letter < fl.base.alphabet_size; ++letter) {
                    bool match = true;
                    for (int d = 0; d < fl.base.dim; ++d) {
                        int want = ((mask >> d) & 1) ? b - 1 : 0;
                        if (fl.base.cube_digits[letter][d] != want) match = false;
                    }
                    if (match) {
                        letters.push_back(letter);
                        break;
                    }
                }
        } else {
            letters = {0, 1, 2};
        }
        factor_corner_letters.push_back(std::move(letters));
    }

    std::vector<CellId> out;
    std::vector<std::size_t> pick(factors_.size(), 0);
    while (true) {
        std::uint64_t letter = 0;
        for (std::size_t f = 0; f < factors_.size(); ++f)
            letter = letter * factors_[f].base.alphabet_size + factor_corner_letters[f][pick[f]];
        std::uint64_t idx = 0;
        for (int i = 0; i < level_; ++i) idx = idx * spec_.alphabet_size + letter;
        out.push_back(static_cast<CellId>(idx));
        int f = static_cast<int>(factors_.size()) - 1;
        while (f >= 0 && ++pick[f] == factor_corner_letters[f].size()) pick[f--] = 0;
        if (f < 0) break;
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool ApproximationGraph::connected() const {
    if (cell_count_ == 0) return true;
    std::vector<char> seen(cell_count_, 0);
    std::queue<CellId> q;
    q.push(0);
    seen[0] = 1;
    std::uint64_t visited = 1;
    while (!q.empty()) {
        CellId c = q.front();
        q.pop();
        for (CellId nb : neighbors(c))
            if (!seen[nb]) {
                seen[nb] = 1;
                ++visited;
                q.push(nb);
            }
    }
    return visited == cell_count_;
}

int ApproximationGraph::max_degree() const {
    std::uint64_t deg = 0;
    for (CellId c = 0; c < cell_count_; ++c)
        deg = std::max<std::uint64_t>(deg, adj_offsets_[c + 1] - adj_offsets_[c]);
    return static_cast<int>(deg);
}

struct GraphBuilder {
    static std::shared_ptr<ApproximationGraph> core(const FractalSpec& spec, int level,
                                                    const BuildOptions& options);
    static void adopt_base_adjacency(ApproximationGraph& g);
    static void build_product_adjacency(ApproximationGraph& g);
    static void install_edges(ApproximationGraph& g,
                              const std::vector<std::pair<std::uint64_t, std::uint64_t>>& edges);
};

std::shared_ptr<const ApproximationGraph> build_graph(const FractalSpec& spec, int level,
                                                      const BuildOptions& options) {
    auto g = GraphBuilder::core(spec, level, options);
    if (spec.factors.size() == 1)
        GraphBuilder::adopt_base_adjacency(*g);
    else
        GraphBuilder::build_product_adjacency(*g);
    return g;
}

void GraphBuilder::adopt_base_adjacency(ApproximationGraph& g) {
    g.adj_offsets_ = g.factors_[0].adj_offsets;
    g.adj_ = g.factors_[0].adj;
}

// Product adjacency: every combination of per-factor moves (stay or step
// to a factor neighbor), except all-stay. This is exactly closed-cell
// intersection in the l-infinity product geometry.
void GraphBuilder::build_product_adjacency(ApproximationGraph& g) {
    const int k = static_cast<int>(g.factors_.size());
    std::vector<std::vector<CellId>> nbrs(g.cell_count_);
    std::vector<CellId> fidx(k), pick(k);
    std::vector<std::span<const CellId>> fnbr(k);
    std::vector<int> choice(k);
    for (CellId c = 0; c < g.cell_count_; ++c) {
        for (int f = 0; f < k; ++f) {
            fidx[f] = g.factor_index_[f][c];
            fnbr[f] = g.factors_[f].neighbors(fidx[f]);
        }
        std::fill(choice.begin(), choice.end(), -1); // -1 = stay
        while (true) {
            bool all_stay = true;
            for (int f = 0; f < k; ++f)
                if (choice[f] >= 0) all_stay = false;
            if (!all_stay) {
                for (int f = 0; f < k; ++f)
                    pick[f] = choice[f] < 0 ? fidx[f] : fnbr[f][choice[f]];
                nbrs[c].push_back(g.from_factor_indices(pick));
            }
            int f = k - 1;
            while (f >= 0) {
                ++choice[f];
                if (choice[f] < static_cast<int>(fnbr[f].size())) break;
                choice[f] = -1;
                --f;
            }
            if (f < 0) break;
        }
        std::sort(nbrs[c].begin(), nbrs[c].end());
    }
    pack_csr(nbrs, g.adj_offsets_, g.adj_);
}

void GraphBuilder::install_edges(ApproximationGraph& g,
                                 const std::vector<std::pair<std::uint64_t, std::uint64_t>>& edges) {
    std::vector<std::vector<CellId>> nbrs(g.cell_count_);
    for (const auto& [u, v] : edges) {
        if (u >= g.cell_count_ || v >= g.cell_count_ || u == v)
            throw CacheError("edge endpoints out of range in cached graph");
        nbrs[u].push_back(static_cast<CellId>(v));
        nbrs[v].push_back(static_cast<CellId>(u));
    }
    for (auto& v : nbrs) std::sort(v.begin(), v.end());
    pack_csr(nbrs, g.adj_offsets_, g.adj_);
}

std::shared_ptr<ApproximationGraph> GraphBuilder::core(const FractalSpec& spec, int level,
                                                       const BuildOptions& options) {
    if (level < 0) throw InvalidSpec("level must be >= 0");
    if (level > 30) throw InvalidSpec("level too deep for exact 64-bit geometry");
    validate_spec(spec);
    if (spec.factors.size() > 8) throw InvalidSpec("at most 8 product factors supported");
    std::int64_t count = checked_pow(spec.alphabet_size, level, options.cell_cap);
    if (count < 0)
        throw CapExceeded("cell count " + std::to_string(spec.alphabet_size) + "^" +
                          std::to_string(level) + " exceeds cap " +
                          std::to_string(options.cell_cap));

    auto g = std::make_shared<ApproximationGraph>();
    g->spec_ = spec;
    g->level_ = level;
    g->cell_count_ = static_cast<CellId>(count);
    g->cell_diameter_ =
        std::pow(spec.contraction_ratio.to_double(), level) * spec.reference_diameter();
    g->cell_measure_rat_ = Rational(1, count);
    g->cell_measure_ = g->cell_measure_rat_.to_double();

    for (const auto& base : spec.factors)
        g->factors_.push_back(base.geometry == GeometryKind::Cube
                                  ? build_cube_factor(base, level)
                                  : build_simplex_factor(base, level));

    const int k = static_cast<int>(spec.factors.size());
    if (k > 1) {
        g->factor_index_.assign(k, std::vector<CellId>(g->cell_count_));
        for (CellId c = 0; c < g->cell_count_; ++c)
            for (int f = 0; f < k; ++f) g->factor_index_[f][c] = g->sub_index(c, f, f + 1);
    }
    return g;
}

std::shared_ptr<const ApproximationGraph> assemble_graph_with_adjacency(
    const FractalSpec& spec, int level,
    const std::vector<std::pair<std::uint64_t, std::uint64_t>>& edges,
    const BuildOptions& options) {
    auto g = GraphBuilder::core(spec, level, options);
    GraphBuilder::install_edges(*g, edges);
    return g;
}

} // namespace confmod
