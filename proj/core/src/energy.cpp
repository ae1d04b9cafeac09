#include "confmod/energy.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "confmod/errors.hpp"

namespace confmod {

EnergyForm make_energy_form(std::shared_ptr<const ApproximationGraph> graph, double p,
                            double beta_ref) {
    if (!(p > 1.0)) throw BadExponent("p must be > 1");
    EnergyForm form;
    form.p = p;
    form.beta_ref = beta_ref < 0.0 ? graph->spec().hausdorff_dim() : beta_ref;
    double ratio = graph->spec().contraction_ratio.to_double();
    form.conductance =
        std::pow(ratio, -static_cast<double>(graph->level()) *
                            (form.beta_ref - graph->spec().hausdorff_dim()));
    form.graph = std::move(graph);
    return form;
}

double energy(const EnergyForm& form, std::span<const double> f) {
    const auto& g = *form.graph;
    double e = 0.0;
    for (CellId c = 0; c < g.cell_count(); ++c)
        for (CellId nb : g.neighbors(c))
            if (c < nb) e += std::pow(std::abs(f[c] - f[nb]), form.p);
    return form.renormalization * form.conductance * e;
}

MeasureVector energy_measure(const EnergyForm& form, std::span<const double> f) {
    const auto& g = *form.graph;
    MeasureVector m = MeasureVector::zero(form.graph);
    const double scale = 0.5 * form.renormalization * form.conductance;
    for (CellId c = 0; c < g.cell_count(); ++c) {
        double mass = 0.0;
        for (CellId nb : g.neighbors(c)) mass += std::pow(std::abs(f[c] - f[nb]), form.p);
        m.weights[c] = scale * mass;
    }
    return m;
}

ProductEnergyForm make_product_energy_form(std::shared_ptr<const ApproximationGraph> graph,
                                           double p, double beta_ref, int split) {
    const int k = graph->factor_count();
    if (k < 2) throw GraphMismatch("product energy form needs a product graph");
    if (split < 1 || split >= k) throw GraphMismatch("bad factor split");

    ProductEnergyForm form;
    form.graph = graph;
    form.split = split;

    FractalSpec sx, sy;
    sx.factors.assign(graph->spec().factors.begin(), graph->spec().factors.begin() + split);
    sy.factors.assign(graph->spec().factors.begin() + split, graph->spec().factors.end());
    for (auto* s : {&sx, &sy}) {
        s->contraction_ratio = graph->spec().contraction_ratio;
        s->alphabet_size = 1;
        std::string name;
        for (const auto& f : s->factors) {
            s->alphabet_size *= f.alphabet_size;
            if (!name.empty()) name += '*';
            name += f.name;
        }
        s->name = name;
    }
    form.form_x = make_energy_form(build_graph(sx, graph->level()), p, beta_ref);
    form.form_y = make_energy_form(build_graph(sy, graph->level()), p, beta_ref);

    const CellId n = graph->cell_count();
    form.index_x.resize(n);
    form.index_y.resize(n);
    form.full_of.assign(n, 0);
    const CellId my = form.form_y.graph->cell_count();
    for (CellId c = 0; c < n; ++c) {
        CellId ix = graph->sub_index(c, 0, split);
        CellId iy = graph->sub_index(c, split, k);
        form.index_x[c] = ix;
        form.index_y[c] = iy;
        form.full_of[static_cast<std::size_t>(ix) * my + iy] = c;
    }
    return form;
}

double product_energy(const ProductEnergyForm& form, std::span<const double> u) {
    if (u.size() != form.graph->cell_count())
        throw GraphMismatch("function does not live on the product graph");
    const auto& gx = *form.form_x.graph;
    const auto& gy = *form.form_y.graph;
    const CellId mx = gx.cell_count();
    const CellId my = gy.cell_count();
    const double px = form.form_x.p;

    double e = 0.0;
    // x-slices: for each x-cell, the y-graph energy of the section u(x, .).
    const double cy = form.form_y.renormalization * form.form_y.conductance;
    for (CellId ix = 0; ix < mx; ++ix) {
        double ex = 0.0;
        for (CellId j = 0; j < my; ++j)
            for (CellId j2 : gy.neighbors(j))
                if (j < j2) {
                    double du = u[form.full_of[static_cast<std::size_t>(ix) * my + j]] -
                                u[form.full_of[static_cast<std::size_t>(ix) * my + j2]];
                    ex += std::pow(std::abs(du), px);
                }
        e += gx.cell_measure() * cy * ex;
    }
    // y-slices.
    const double cx = form.form_x.renormalization * form.form_x.conductance;
    for (CellId iy = 0; iy < my; ++iy) {
        double ey = 0.0;
        for (CellId i = 0; i < mx; ++i)
            for (CellId i2 : gx.neighbors(i))
                if (i < i2) {
                    double du = u[form.full_of[static_cast<std::size_t>(i) * my + iy]] -
                                u[form.full_of[static_cast<std::size_t>(i2) * my + iy]];
                    ey += std::pow(std::abs(du), px);
                }
        e += gy.cell_measure() * cx * ey;
    }
    return e;
}

MeasureVector product_energy_measure_vector(const ProductEnergyForm& form,
                                            std::span<const double> u) {
    if (u.size() != form.graph->cell_count())
        throw GraphMismatch("function does not live on the product graph");
    const auto& gx = *form.form_x.graph;
    const auto& gy = *form.form_y.graph;
    const CellId mx = gx.cell_count();
    const CellId my = gy.cell_count();
    const double px = form.form_x.p;

    MeasureVector m = MeasureVector::zero(form.graph);
    const double cy = 0.5 * form.form_y.renormalization * form.form_y.conductance;
    for (CellId ix = 0; ix < mx; ++ix)
        for (CellId j = 0; j < my; ++j) {
            double mass = 0.0;
            for (CellId j2 : gy.neighbors(j)) {
                double du = u[form.full_of[static_cast<std::size_t>(ix) * my + j]] -
                            u[form.full_of[static_cast<std::size_t>(ix) * my + j2]];
                mass += std::pow(std::abs(du), px);
            }
            m.weights[form.full_of[static_cast<std::size_t>(ix) * my + j]] +=
                gx.cell_measure() * cy * mass;
        }
    const double cx = 0.5 * form.form_x.renormalization * form.form_x.conductance;
    for (CellId iy = 0; iy < my; ++iy)
        for (CellId i = 0; i < mx; ++i) {
            double mass = 0.0;
            for (CellId i2 : gx.neighbors(i)) {
                double du = u[form.full_of[static_cast<std::size_t>(i) * my + iy]] -
                            u[form.full_of[static_cast<std::size_t>(i2) * my + iy]];
                mass += std::pow(std::abs(du), px);
            }
            m.weights[form.full_of[static_cast<std::size_t>(i) * my + iy]] +=
                gy.cell_measure() * cx * mass;
        }
    return m;
}

double product_energy_measure(const ProductEnergyForm& form, std::span<const double> u,
                              std::span<const CellId> cells) {
    MeasureVector m = product_energy_measure_vector(form, u);
    double total = 0.0;
    for (CellId c : cells) total += m.weights[c];
    return total;
}

double FormHandle::energy_of(std::span<const double> f) const {
    return plain_ ? energy(*plain_, f) : product_energy(*product_, f);
}

MeasureVector FormHandle::measure_of(std::span<const double> f) const {
    return plain_ ? energy_measure(*plain_, f) : product_energy_measure_vector(*product_, f);
}

int AxiomReport::total_violations() const {
    int v = 0;
    for (const auto& r : results) v += r.violations;
    return v;
}

namespace {

double set_mass(const MeasureVector& m, const std::vector<char>& mask) {
    double s = 0.0;
    for (std::size_t c = 0; c < m.weights.size(); ++c)
        if (mask[c]) s += m.weights[c];
    return s;
}

} // namespace

AxiomReport axiom_suite(const FormHandle& form, int samples, std::uint64_t seed, double tol) {
    const auto& g = form.graph();
    const CellId n = g.cell_count();
    const double p = form.p();

    AxiomReport report;
    report.spec = g.spec().name;
    report.level = g.level();
    report.p = p;
    report.samples = samples;
    report.seed = seed;
    report.tol = tol;

    AxiomResult homogeneity{"homogeneity", 0, 0, 0.0};
    AxiomResult triangle{"triangle_inequality", 0, 0, 0.0};
    AxiomResult contract{"lipschitz_contractivity", 0, 0, 0.0};
    AxiomResult locality{"strong_locality", 0, 0, 0.0};
    AxiomResult mass{"mass_conservation", 0, 0, 0.0};
    AxiomResult stability{"sequential_stability", 0, 0, 0.0};

    auto record = [&](AxiomResult& res, double residual, double allowed) {
        ++res.samples;
        res.worst_residual = std::max(res.worst_residual, residual);
        if (residual > allowed) ++res.violations;
    };

    for (int k = 0; k < samples; ++k) {
        std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ull + static_cast<std::uint64_t>(k));
        std::uniform_real_distribution<double> uni(-1.0, 1.0);

        std::vector<double> f(n), h(n);
        for (CellId c = 0; c < n; ++c) f[c] = uni(rng);
        for (CellId c = 0; c < n; ++c) h[c] = uni(rng);
        std::vector<char> set_a(n, 0);
        for (CellId c = 0; c < n; ++c) set_a[c] = uni(rng) > 0.4 ? 1 : 0;

        MeasureVector gf = form.measure_of(f);
        MeasureVector gh = form.measure_of(h);
        double ef = form.energy_of(f);
        double scale = std::max({1.0, ef, form.energy_of(h)});

        // (3) homogeneity: Gamma<lambda f> = |lambda|^p Gamma<f>, cellwise.
        {
            double lambda = k % 4 == 0 ? -2.0 : uni(rng) * 3.0;
            std::vector<double> lf(n);
            for (CellId c = 0; c < n; ++c) lf[c] = lambda * f[c];
            MeasureVector glf = form.measure_of(lf);
            double factor = std::pow(std::abs(lambda), p);
            double worst = 0.0;
            for (CellId c = 0; c < n; ++c)
                worst = std::max(worst, std::abs(glf.weights[c] - factor * gf.weights[c]));
            record(homogeneity, worst / std::max(1.0, factor * scale), tol);
        }

        // (4) triangle inequality on a random cell set.
        {
            std::vector<double> sum(n);
            for (CellId c = 0; c < n; ++c) sum[c] = f[c] + h[c];
            MeasureVector gsum = form.measure_of(sum);
            double lhs = std::pow(set_mass(gsum, set_a), 1.0 / p);
            double rhs = std::pow(set_mass(gf, set_a), 1.0 / p) +
                         std::pow(set_mass(gh, set_a), 1.0 / p);
            record(triangle, (lhs - rhs) / std::max(1.0, rhs), tol);
        }

        // (5) contractivity for the shipped 1-Lipschitz family, cellwise.
        {
            std::vector<double> pf(n);
            const int which = k % 3;
            for (CellId c = 0; c < n; ++c) {
                double x = f[c];
                if (which == 0) pf[c] = std::min(std::max(x, 0.0), 0.5);
                else if (which == 1) pf[c] = std::abs(x);
                else pf[c] = x > 0.25 ? x - 0.25 : (x < -0.25 ? x + 0.25 : 0.0);
            }
            MeasureVector gpf = form.measure_of(pf);
            double worst = 0.0;
            for (CellId c = 0; c < n; ++c)
                worst = std::max(worst, gpf.weights[c] - gf.weights[c]);
            record(contract, worst / std::max(1.0, scale), tol);
        }

        // (6) strong locality: f constant on the closed neighborhood of A.
        {
            std::vector<char> set_b(n, 0);
            for (CellId c = 0; c < n; ++c) set_b[c] = uni(rng) > 0.7 ? 1 : 0;
            std::vector<double> loc = h;
            const double value = 0.375;
            for (CellId c = 0; c < n; ++c)
                if (set_b[c]) {
                    loc[c] = value;
                    for (CellId nb : g.neighbors(c)) loc[nb] = value;
                }
            // Cells of B whose neighborhood got overwritten by another B cell
            // later keep the same constant, so B is genuinely flat.
            MeasureVector gloc = form.measure_of(loc);
            record(locality, set_mass(gloc, set_b), tol);
        }

        // Mass conservation: Gamma<f>(X) = E(f).
        {
            double total = 0.0;
            for (double w : gf.weights) total += w;
            record(mass, std::abs(total - ef) / std::max(1.0, ef), tol);
        }

        // (7) at finite level: sequential stability of Gamma in f. The edge
        // sums are locally Lipschitz in f; Hoelder gives the modulus below.
        {
            const double t = 1e-6;
            std::vector<double> pert(n);
            for (CellId c = 0; c < n; ++c) pert[c] = f[c] + t * h[c];
            double eh = form.energy_of(h);
            double bound =
                p * std::pow(std::pow(ef, 1.0 / p) + std::pow(eh, 1.0 / p), p - 1.0) *
                std::pow(eh, 1.0 / p) * t;
            double residual = std::abs(form.energy_of(pert) - ef);
            record(stability, std::max(0.0, residual - bound), tol);
        }
    }

    report.results = {homogeneity, triangle, contract, locality, mass, stability};
    return report;
}

MeasureVector minimal_energy_dominant(const FormHandle& form,
                                      const std::vector<std::vector<double>>& family,
                                      const std::vector<double>& weights) {
    if (family.empty()) throw EmptyFamily("minimal_energy_dominant needs a non-empty family");
    if (family.size() != weights.size())
        throw Error("InvalidArgument", "family and weights sizes differ");
    MeasureVector out;
    for (std::size_t i = 0; i < family.size(); ++i) {
        if (!(weights[i] > 0.0)) throw Error("InvalidArgument", "weights must be positive");
        MeasureVector gi = form.measure_of(family[i]);
        if (i == 0) {
            out = std::move(gi);
            for (double& w : out.weights) w *= weights[0];
        } else {
            for (std::size_t c = 0; c < out.weights.size(); ++c)
                out.weights[c] += weights[i] * gi.weights[c];
        }
    }
    return out;
}

double ks_energy(const ApproximationGraph& graph, const MeasureVector& nu,
                 std::span<const double> f, double p, std::span<const double> radii) {
    if (nu.graph.get() != &graph) throw GraphMismatch("measure does not live on the graph");
    if (radii.empty()) throw Error("InvalidArgument", "radius list is empty");
    for (double r : radii)
        if (r < graph.cell_diameter())
            throw RadiusOutOfRange("ks_energy radii must be >= cell diameter");

    const CellId n = graph.cell_count();
    double best = 0.0;
    for (double r : radii) {
        double total = 0.0;
        for (CellId x = 0; x < n; ++x) {
            if (nu.weights[x] <= 0.0) continue;
            std::vector<CellId> ball = graph.metric_ball(x, r);
            if (ball.empty()) throw Error("EmptyBall", "metric ball is empty");
            double mass = 0.0;
            for (CellId y : ball) mass += nu.weights[y];
            if (mass <= 0.0) continue;
            double inner = 0.0;
            for (CellId y : ball)
                inner += nu.weights[y] * std::pow(std::abs(f[x] - f[y]), p);
            total += nu.weights[x] * inner / mass;
        }
        best = std::max(best, total);
    }
    return best;
}

} // namespace confmod
