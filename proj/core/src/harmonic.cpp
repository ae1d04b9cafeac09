#include "confmod/harmonic.hpp"

#include <algorithm>
#include <cmath>

#include "confmod/errors.hpp"

namespace confmod {

namespace {

struct Csr {
    std::uint32_t n = 0;
    std::vector<std::uint64_t> offsets;
    std::vector<std::uint32_t> nbr;
};

double signed_pow(double d, double e) {
    return d >= 0.0 ? std::pow(d, e) : -std::pow(-d, e);
}

double gradient_sup(const Csr& g, const std::vector<double>& f, const std::vector<char>& fixed,
                    double p) {
    double worst = 0.0;
    for (std::uint32_t v = 0; v < g.n; ++v) {
        if (fixed[v]) continue;
        double grad = 0.0;
        for (std::uint64_t e = g.offsets[v]; e < g.offsets[v + 1]; ++e)
            grad += signed_pow(f[v] - f[g.nbr[e]], p - 1.0);
        worst = std::max(worst, p * std::abs(grad));
    }
    return worst;
}

HarmonicSolution solve_csr(const Csr& g, double p, std::span<const std::uint32_t> boundary_nodes,
                           std::span<const double> boundary_values,
                           const HarmonicOptions& opt) {
    if (!(p > 1.0)) throw BadExponent("p must be > 1");
    if (boundary_nodes.empty()) throw Error("InvalidArgument", "boundary set is empty");
    if (boundary_nodes.size() != boundary_values.size())
        throw Error("InvalidArgument", "boundary nodes/values size mismatch");
    for (double v : boundary_values)
        if (!std::isfinite(v)) throw Error("InvalidArgument", "boundary value not finite");

    std::vector<char> fixed(g.n, 0);
    std::vector<double> f(g.n, 0.0);
    double avg = 0.0;
    for (double v : boundary_values) avg += v;
    avg /= static_cast<double>(boundary_values.size());
    std::fill(f.begin(), f.end(), avg);
    for (std::size_t i = 0; i < boundary_nodes.size(); ++i) {
        fixed[boundary_nodes[i]] = 1;
        f[boundary_nodes[i]] = boundary_values[i];
    }

    HarmonicSolution sol;
    bool any_free = false;
    for (std::uint32_t v = 0; v < g.n; ++v)
        if (!fixed[v]) any_free = true;
    if (!any_free) {
        sol.values = std::move(f);
        return sol;
    }

    if (p == 2.0) {
        // CG on the free block of the graph Laplacian, Jacobi preconditioner.
        std::vector<double> r(g.n, 0.0), z(g.n, 0.0), d(g.n, 0.0), q(g.n, 0.0);
        std::vector<double> diag(g.n, 0.0);
        for (std::uint32_t v = 0; v < g.n; ++v)
            diag[v] = static_cast<double>(g.offsets[v + 1] - g.offsets[v]);
        auto apply = [&](const std::vector<double>& x, std::vector<double>& out) {
            for (std::uint32_t v = 0; v < g.n; ++v) {
                if (fixed[v]) {
                    out[v] = 0.0;
                    continue;
                }
                double acc = diag[v] * x[v];
                for (std::uint64_t e = g.offsets[v]; e < g.offsets[v + 1]; ++e) {
                    std::uint32_t w = g.nbr[e];
                    if (!fixed[w]) acc -= x[w];
                }
                out[v] = acc;
            }
        };
        // r = b - A f0 where b carries the boundary terms.
        for (std::uint32_t v = 0; v < g.n; ++v) {
            if (fixed[v]) continue;
            double b = 0.0;
            for (std::uint64_t e = g.offsets[v]; e < g.offsets[v + 1]; ++e) {
                std::uint32_t w = g.nbr[e];
                if (fixed[w]) b += f[w];
            }
            r[v] = b;
        }
        apply(f, q);
        for (std::uint32_t v = 0; v < g.n; ++v)
            if (!fixed[v]) r[v] -= q[v];
        double rz = 0.0;
        for (std::uint32_t v = 0; v < g.n; ++v)
            if (!fixed[v]) {
                z[v] = r[v] / diag[v];
                rz += r[v] * z[v];
            }
        d = z;
        const double grad_tol = opt.tol / 2.0; // gradient = 2 * residual
        int it = 0;
        while (it < opt.max_iterations) {
            double rmax = 0.0;
            for (std::uint32_t v = 0; v < g.n; ++v)
                if (!fixed[v]) rmax = std::max(rmax, std::abs(r[v]));
            if (rmax <= grad_tol) break;
            ++it;
            apply(d, q);
            double dq = 0.0;
            for (std::uint32_t v = 0; v < g.n; ++v)
                if (!fixed[v]) dq += d[v] * q[v];
            if (dq <= 0.0) break;
            double alpha = rz / dq;
            for (std::uint32_t v = 0; v < g.n; ++v)
                if (!fixed[v]) {
                    f[v] += alpha * d[v];
                    r[v] -= alpha * q[v];
                }
            double rz_new = 0.0;
            for (std::uint32_t v = 0; v < g.n; ++v)
                if (!fixed[v]) {
                    z[v] = r[v] / diag[v];
                    rz_new += r[v] * z[v];
                }
            double beta = rz_new / rz;
            rz = rz_new;
            for (std::uint32_t v = 0; v < g.n; ++v)
                if (!fixed[v]) d[v] = z[v] + beta * d[v];
        }
        sol.iterations = it;
    } else {
        // Damped Newton for p != 2: the Hessian of sum |df|^p is the
        // weighted Laplacian with edge weights p(p-1)|df|^(p-2); each step
        // solves it by CG on the free block with backtracking on the true
        // objective. Flat edges get a clamped weight so the metric stays
        // positive definite for p < 2.
        double span = 1.0;
        {
            double lo = *std::min_element(boundary_values.begin(), boundary_values.end());
            double hi = *std::max_element(boundary_values.begin(), boundary_values.end());
            span = std::max(hi - lo, 1e-30);
        }
        auto objective = [&](const std::vector<double>& x) {
            double e = 0.0;
            for (std::uint32_t v = 0; v < g.n; ++v)
                for (std::uint64_t idx = g.offsets[v]; idx < g.offsets[v + 1]; ++idx) {
                    std::uint32_t w = g.nbr[idx];
                    if (w > v) e += std::pow(std::abs(x[v] - x[w]), p);
                }
            return e;
        };

        // A few Gauss-Seidel warmup sweeps put the iterate into the Newton
        // basin; they also settle degenerate flat patches.
        for (int sweep = 0; sweep < 16; ++sweep) {
            for (std::uint32_t v = 0; v < g.n; ++v) {
                if (fixed[v] || g.offsets[v] == g.offsets[v + 1]) continue;
                double lo = f[g.nbr[g.offsets[v]]], hi = lo;
                for (std::uint64_t e = g.offsets[v]; e < g.offsets[v + 1]; ++e) {
                    lo = std::min(lo, f[g.nbr[e]]);
                    hi = std::max(hi, f[g.nbr[e]]);
                }
                double a = lo, b = hi;
                for (int iter = 0; iter < 50 && b - a > 0.0; ++iter) {
                    double mid = 0.5 * (a + b);
                    double deriv = 0.0;
                    for (std::uint64_t e = g.offsets[v]; e < g.offsets[v + 1]; ++e)
                        deriv += signed_pow(mid - f[g.nbr[e]], p - 1.0);
                    (deriv > 0.0 ? b : a) = mid;
                }
                f[v] = 0.5 * (a + b);
            }
        }

        const double weight_floor = std::pow(1e-10 * span, p - 2.0);
        std::vector<double> grad(g.n, 0.0), weight(g.nbr.size(), 0.0);
        std::vector<double> delta(g.n, 0.0), r(g.n), z(g.n), d(g.n), q(g.n), diag(g.n);
        int outer = 0;
        double obj = objective(f);
        for (; outer < 400; ++outer) {
            double gmax = 0.0;
            for (std::uint32_t v = 0; v < g.n; ++v) {
                if (fixed[v]) {
                    grad[v] = 0.0;
                    continue;
                }
                double acc = 0.0;
                for (std::uint64_t e = g.offsets[v]; e < g.offsets[v + 1]; ++e)
                    acc += signed_pow(f[v] - f[g.nbr[e]], p - 1.0);
                grad[v] = p * acc;
                gmax = std::max(gmax, std::abs(grad[v]));
            }
            if (gmax <= opt.tol) break;

            for (std::uint32_t v = 0; v < g.n; ++v) {
                diag[v] = 0.0;
                for (std::uint64_t e = g.offsets[v]; e < g.offsets[v + 1]; ++e) {
                    double ad = std::abs(f[v] - f[g.nbr[e]]);
                    double w = ad <= 1e-10 * span && p < 2.0 ? weight_floor
                                                             : std::pow(std::max(ad, 1e-300), p - 2.0);
                    weight[e] = w;
                    diag[v] += w;
                }
                if (diag[v] <= 0.0) diag[v] = 1.0;
            }
            auto apply = [&](const std::vector<double>& x, std::vector<double>& out) {
                for (std::uint32_t v = 0; v < g.n; ++v) {
                    if (fixed[v]) {
                        out[v] = 0.0;
                        continue;
                    }
                    double acc = diag[v] * x[v];
                    for (std::uint64_t e = g.offsets[v]; e < g.offsets[v + 1]; ++e) {
                        std::uint32_t w = g.nbr[e];
                        if (!fixed[w]) acc -= weight[e] * x[w];
                    }
                    out[v] = acc;
                }
            };
            // Solve L_w delta = -grad / (p(p-1)) on the free block.
            std::fill(delta.begin(), delta.end(), 0.0);
            const double scale = 1.0 / (p * (p - 1.0));
            double rz = 0.0;
            for (std::uint32_t v = 0; v < g.n; ++v) {
                r[v] = fixed[v] ? 0.0 : -grad[v] * scale;
                z[v] = fixed[v] ? 0.0 : r[v] / diag[v];
                rz += r[v] * z[v];
            }
            d = z;
            double r0 = 0.0;
            for (std::uint32_t v = 0; v < g.n; ++v) r0 = std::max(r0, std::abs(r[v]));
            for (int it = 0; it < 4000; ++it) {
                double rmax = 0.0;
                for (std::uint32_t v = 0; v < g.n; ++v) rmax = std::max(rmax, std::abs(r[v]));
                if (rmax <= 1e-9 * r0 || rmax == 0.0) break;
                apply(d, q);
                double dq = 0.0;
                for (std::uint32_t v = 0; v < g.n; ++v)
                    if (!fixed[v]) dq += d[v] * q[v];
                if (dq <= 0.0) break;
                double alpha = rz / dq;
                for (std::uint32_t v = 0; v < g.n; ++v)
                    if (!fixed[v]) {
                        delta[v] += alpha * d[v];
                        r[v] -= alpha * q[v];
                    }
                double rz_new = 0.0;
                for (std::uint32_t v = 0; v < g.n; ++v)
                    if (!fixed[v]) {
                        z[v] = r[v] / diag[v];
                        rz_new += r[v] * z[v];
                    }
                double beta = rz_new / rz;
                rz = rz_new;
                for (std::uint32_t v = 0; v < g.n; ++v)
                    if (!fixed[v]) d[v] = z[v] + beta * d[v];
            }

            // Backtracking line search on the objective.
            double dir_deriv = 0.0;
            for (std::uint32_t v = 0; v < g.n; ++v)
                if (!fixed[v]) dir_deriv += grad[v] * delta[v];
            double t = 1.0;
            double step_max = 0.0;
            for (std::uint32_t v = 0; v < g.n; ++v)
                step_max = std::max(step_max, std::abs(delta[v]));
            if (step_max <= 1e-16 * span) break;
            std::vector<double> trial(f);
            bool accepted = false;
            for (int ls = 0; ls < 60; ++ls) {
                for (std::uint32_t v = 0; v < g.n; ++v)
                    trial[v] = fixed[v] ? f[v] : f[v] + t * delta[v];
                double tobj = objective(trial);
                if (tobj <= obj + 1e-4 * t * dir_deriv) {
                    f.swap(trial);
                    obj = tobj;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if (!accepted) break;
        }
        sol.iterations = outer;
    }

    sol.gradient_norm = gradient_sup(g, f, fixed, p);
    if (sol.gradient_norm > opt.tol * 16.0 && sol.iterations >= opt.max_iterations)
        throw NonConvergence("p-harmonic solver exhausted its iteration budget",
                             sol.gradient_norm, 0.0, sol.iterations);
    sol.values = std::move(f);
    return sol;
}

} // namespace

HarmonicSolution solve_p_harmonic(const VertexNetwork& net, double p,
                                  std::span<const std::uint32_t> boundary_nodes,
                                  std::span<const double> boundary_values,
                                  const HarmonicOptions& options) {
    Csr g;
    g.n = net.node_count;
    g.offsets = net.node_offsets;
    g.nbr.reserve(net.node_adj.size());
    for (const auto& [node, edge] : net.node_adj) g.nbr.push_back(node);
    return solve_csr(g, p, boundary_nodes, boundary_values, options);
}

HarmonicSolution solve_p_harmonic_cells(const EnergyForm& form,
                                        std::span<const CellId> boundary_cells,
                                        std::span<const double> boundary_values,
                                        const HarmonicOptions& options) {
    const auto& gr = *form.graph;
    Csr g;
    g.n = gr.cell_count();
    g.offsets.assign(g.n + 1, 0);
    for (std::uint32_t c = 0; c < g.n; ++c)
        g.offsets[c + 1] = g.offsets[c] + gr.neighbors(c).size();
    g.nbr.reserve(g.offsets.back());
    for (std::uint32_t c = 0; c < g.n; ++c)
        for (CellId nb : gr.neighbors(c)) g.nbr.push_back(nb);
    return solve_csr(g, form.p, boundary_cells, boundary_values, options);
}

} // namespace confmod
