#include "confmod/scaling.hpp"

#include <algorithm>
#include <cmath>

#include "confmod/errors.hpp"
#include "confmod/family.hpp"
#include "confmod/parallel.hpp"

namespace confmod {

namespace {

// Deterministic annulus centers: stride midpoints over the cell enumeration,
// keeping only cells whose (r, 2r) annulus is non-degenerate, topped up by
// an index scan when strides land on invalid centers.
std::vector<CellId> pick_centers(const ApproximationGraph& g, double r, int want) {
    auto valid = [&](CellId c) {
        // Outer complement must be non-empty; the inner ball always holds c.
        std::vector<CellId> outer_ball = g.metric_ball(c, 2.0 * r);
        return outer_ball.size() < g.cell_count();
    };
    std::vector<CellId> centers;
    auto add = [&](CellId c) {
        if (std::find(centers.begin(), centers.end(), c) != centers.end()) return;
        if (valid(c)) centers.push_back(c);
    };
    const std::uint64_t n = g.cell_count();
    for (int j = 0; j < want && centers.size() < static_cast<std::size_t>(want); ++j)
        add(static_cast<CellId>((2ull * j + 1) * n / (2ull * want)));
    for (CellId c = 0; c < n && centers.size() < static_cast<std::size_t>(want); ++c) add(c);
    if (centers.empty()) throw RadiusOutOfRange("no valid annulus center at this radius");
    std::sort(centers.begin(), centers.end());
    return centers;
}

struct LevelEval {
    LevelSample sample;
    std::vector<double> center_values;
};

LevelEval eval_level(const FractalSpec& spec, int level, double p, double r,
                     const ScalingOptions& opt) {
    auto g = build_graph(spec, level);
    std::vector<CellId> centers = pick_centers(*g, r, opt.centers);

    std::vector<double> values(centers.size(), 0.0);
    std::vector<double> slacks(centers.size(), 0.0);
    SolverOptions sopt;
    sopt.tol = opt.solver_tol;
    parallel_for_index(centers.size(), opt.workers, [&](std::size_t i) {
        CurveFamily fam = annulus_family(g, centers[i], r, 2.0 * r);
        ModulusResult res = solve_modulus(fam, p, sopt);
        values[i] = res.value;
        slacks[i] = res.empty_family ? 0.0 : res.slack;
    });

    LevelEval ev;
    ev.center_values = values;
    ev.sample.level = level;
    ev.sample.eps_over_r = g->cell_diameter() / r;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    ev.sample.modulus = mean;
    ev.sample.slack = *std::min_element(slacks.begin(), slacks.end());
    // Spread of log(mean): delta method on the center spread of the mean.
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= std::max<std::size_t>(1, values.size() - 1) * values.size();
    ev.sample.log_stddev = mean > 0.0 ? std::sqrt(var) / mean : 0.0;
    return ev;
}

} // namespace

ScalingFit fit_exponent(const FractalSpec& spec, double p, int level_lo, int level_hi,
                        const ScalingOptions& options) {
    if (level_hi - level_lo + 1 < 3)
        throw InsufficientLevels("scaling fit needs at least 3 levels");
    if (!(p > 1.0)) throw BadExponent("p must be > 1");

    ScalingFit fit;
    fit.spec = spec.name;
    fit.p = p;
    fit.level_lo = level_lo;
    fit.level_hi = level_hi;

    double r = options.radius;
    if (r <= 0.0)
        r = std::pow(spec.contraction_ratio.to_double(), level_lo) * spec.reference_diameter();
    fit.radius = r;

    const int count = level_hi - level_lo + 1;
    std::vector<LevelEval> evals(count);
    for (int i = 0; i < count; ++i) evals[i] = eval_level(spec, level_lo + i, p, r, options);

    std::vector<double> x(count), y(count), sigma(count);
    for (int i = 0; i < count; ++i) {
        fit.samples.push_back(evals[i].sample);
        if (!(evals[i].sample.modulus > 0.0))
            throw EmptyFamily("annulus family degenerated to zero modulus at level " +
                              std::to_string(level_lo + i));
        x[i] = std::log(evals[i].sample.eps_over_r);
        y[i] = std::log(evals[i].sample.modulus);
        sigma[i] = evals[i].sample.log_stddev;
    }

    double xm = 0.0, ym = 0.0;
    for (int i = 0; i < count; ++i) {
        xm += x[i];
        ym += y[i];
    }
    xm /= count;
    ym /= count;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (int i = 0; i < count; ++i) {
        sxx += (x[i] - xm) * (x[i] - xm);
        sxy += (x[i] - xm) * (y[i] - ym);
        syy += (y[i] - ym) * (y[i] - ym);
    }
    fit.slope = sxy / sxx;
    fit.intercept = ym - fit.slope * xm;
    fit.r2 = syy > 0.0 ? std::min(1.0, (sxy * sxy) / (sxx * syy)) : 1.0;
    fit.beta_p = fit.slope + spec.hausdorff_dim();

    // Residual-based standard error plus propagated center spread; two
    // honest noise sources, take the larger.
    double rss = 0.0;
    for (int i = 0; i < count; ++i) {
        double e = y[i] - (fit.intercept + fit.slope * x[i]);
        rss += e * e;
    }
    double se_resid = count > 2 ? std::sqrt(rss / (count - 2) / sxx) : 0.0;
    double se_prop = 0.0;
    for (int i = 0; i < count; ++i) {
        double w = (x[i] - xm) / sxx;
        se_prop += w * w * sigma[i] * sigma[i];
    }
    fit.slope_stderr = std::max(se_resid, std::sqrt(se_prop));

    for (int i = 0; i + 1 < count; ++i)
        fit.ratio_slopes.push_back((y[i + 1] - y[i]) / (x[i + 1] - x[i]));

    // Tail extrapolation. The error estimate comes from the spread of
    // per-center tail slopes: each center keeps its own constants, so its
    // consecutive-level ratios cancel them and the spread reflects genuine
    // exponent noise rather than center-to-center offsets.
    if (count >= 3) {
        double s_last = fit.ratio_slopes[count - 2];
        double s_prev = fit.ratio_slopes[count - 3];
        fit.tail_slope = 2.0 * s_last - s_prev;
    } else {
        fit.tail_slope = fit.ratio_slopes.back();
    }
    std::vector<double> center_tails;
    std::size_t centers = evals[0].center_values.size();
    for (const auto& ev : evals) centers = std::min(centers, ev.center_values.size());
    for (std::size_t j = 0; j < centers; ++j) {
        bool ok = true;
        for (const auto& ev : evals)
            if (!(ev.center_values[j] > 0.0)) ok = false;
        if (!ok) continue;
        auto local = [&](int i) {
            return (std::log(evals[i + 1].center_values[j]) -
                    std::log(evals[i].center_values[j])) /
                   (x[i + 1] - x[i]);
        };
        center_tails.push_back(count >= 3 ? 2.0 * local(count - 2) - local(count - 3)
                                          : local(count - 2));
    }
    if (center_tails.size() >= 2) {
        double mean = 0.0;
        for (double v : center_tails) mean += v;
        mean /= static_cast<double>(center_tails.size());
        double var = 0.0;
        for (double v : center_tails) var += (v - mean) * (v - mean);
        var /= static_cast<double>(center_tails.size() - 1) *
               static_cast<double>(center_tails.size());
        fit.tail_stderr = std::sqrt(var);
    } else {
        double dx = x[count - 1] - x[count - 2];
        fit.tail_stderr = std::sqrt(sigma[count - 1] * sigma[count - 1] +
                                    sigma[count - 2] * sigma[count - 2]) /
                          std::abs(dx);
    }
    return fit;
}

namespace {

struct SlopeEval {
    double slope;
    double stderr_;
};

// Slope evaluation shared by the bisection and the monotonicity report. Works
// down to two levels (confdim refinement studies start there): the
// least-squares machinery of fit_exponent needs >= 3 levels, so the two-level
// case falls back to the ratio estimator with propagated center spread.
SlopeEval eval_slope(const FractalSpec& spec, double p, int level_lo, int level_hi,
                     const ScalingOptions& options) {
    const int count = level_hi - level_lo + 1;
    if (count >= 3) {
        ScalingFit f = fit_exponent(spec, p, level_lo, level_hi, options);
        return {f.tail_slope, f.tail_stderr};
    }
    if (count < 2) throw InsufficientLevels("slope needs at least 2 levels");
    double r = options.radius;
    if (r <= 0.0)
        r = std::pow(spec.contraction_ratio.to_double(), level_lo) * spec.reference_diameter();
    ScalingOptions opt = options;
    opt.radius = r;
    LevelEval a = eval_level(spec, level_lo, p, r, opt);
    LevelEval b = eval_level(spec, level_hi, p, r, opt);
    if (!(a.sample.modulus > 0.0) || !(b.sample.modulus > 0.0))
        throw EmptyFamily("annulus family degenerated to zero modulus");
    double dx = std::log(b.sample.eps_over_r) - std::log(a.sample.eps_over_r);
    double slope = (std::log(b.sample.modulus) - std::log(a.sample.modulus)) / dx;
    std::vector<double> per_center;
    std::size_t centers = std::min(a.center_values.size(), b.center_values.size());
    for (std::size_t j = 0; j < centers; ++j)
        if (a.center_values[j] > 0.0 && b.center_values[j] > 0.0)
            per_center.push_back(
                (std::log(b.center_values[j]) - std::log(a.center_values[j])) / dx);
    double se;
    if (per_center.size() >= 2) {
        double mean = 0.0;
        for (double v : per_center) mean += v;
        mean /= static_cast<double>(per_center.size());
        double var = 0.0;
        for (double v : per_center) var += (v - mean) * (v - mean);
        var /= static_cast<double>(per_center.size() - 1) *
               static_cast<double>(per_center.size());
        se = std::sqrt(var);
    } else {
        se = std::sqrt(a.sample.log_stddev * a.sample.log_stddev +
                       b.sample.log_stddev * b.sample.log_stddev) /
             std::abs(dx);
    }
    return {slope, se};
}

} // namespace

ConfDimEstimate estimate_confdim(const FractalSpec& spec, int level_lo, int level_hi,
                                 double p_bracket_lo, double p_bracket_hi, double bisect_tol,
                                 const ScalingOptions& options) {
    if (!(bisect_tol > 0.0)) throw Error("InvalidArgument", "bisect_tol must be > 0");
    const double d_h = spec.hausdorff_dim();
    const double clamp_lo = 1.01;
    const double clamp_hi = d_h + 1.0;

    ConfDimEstimate est;
    est.spec = spec.name;
    est.level_lo = level_lo;
    est.level_hi = level_hi;

    std::vector<std::pair<double, SlopeEval>> evals;
    auto slope_at = [&](double p) {
        for (const auto& [q, s] : evals)
            if (q == p) return s;
        SlopeEval s = eval_slope(spec, p, level_lo, level_hi, options);
        evals.push_back({p, s});
        return s;
    };

    double lo = std::max(clamp_lo, p_bracket_lo);
    double hi = std::min(clamp_hi, std::max(p_bracket_hi, lo + bisect_tol));
    SlopeEval slo = slope_at(lo);
    SlopeEval shi = slope_at(hi);

    // Widen towards the clamps until the slopes straddle zero.
    while (slo.slope > 0.0 && lo > clamp_lo) {
        lo = std::max(clamp_lo, lo - (hi - lo));
        slo = slope_at(lo);
    }
    while (shi.slope < 0.0 && hi < clamp_hi) {
        hi = std::min(clamp_hi, hi + (hi - lo));
        shi = slope_at(hi);
    }

    if (slo.slope > 0.0) {
        // Positive slope everywhere down to the p > 1 clamp: the critical
        // exponent sits at/below 1 (interval-like geometry).
        est.degenerate_low = true;
        est.q_estimate = lo;
        est.p_low = lo;
        est.p_high = lo;
    } else if (shi.slope < 0.0) {
        est.degenerate_high = true;
        est.q_estimate = hi;
        est.p_low = hi;
        est.p_high = hi;
    } else {
        // Bisection; stop at the fit-noise floor so the reported bracket is
        // honest about what the data can resolve.
        double dslope =
            std::max((shi.slope - slo.slope) / std::max(hi - lo, 1e-12), 1e-3);
        while (true) {
            double noise =
                2.0 * std::max(slo.stderr_, shi.stderr_) / dslope;
            est.noise_width = noise;
            if (hi - lo < std::max(bisect_tol, noise)) break;
            double mid = 0.5 * (lo + hi);
            SlopeEval sm = slope_at(mid);
            if (sm.slope <= 0.0) {
                lo = mid;
                slo = sm;
            } else {
                hi = mid;
                shi = sm;
            }
            dslope = std::max((shi.slope - slo.slope) / std::max(hi - lo, 1e-12), 1e-3);
        }
        est.p_low = lo;
        est.p_high = hi;
        est.q_estimate = 0.5 * (lo + hi);
    }

    // The estimate lives in [1, d_H] by theory; clamp the midpoint, keep the
    // raw bracket.
    est.q_estimate = std::min(std::max(est.q_estimate, 1.0), d_h);

    std::sort(evals.begin(), evals.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [q, s] : evals) {
        est.per_p_slopes.push_back({q, s.slope});
    }
    for (std::size_t i = 0; i + 1 < evals.size(); ++i) {
        double tolerance = 2.0 * (evals[i].second.stderr_ + evals[i + 1].second.stderr_);
        if (evals[i + 1].second.slope < evals[i].second.slope - tolerance) est.non_monotone = true;
    }
    return est;
}

SlopeReport slope_monotonicity_report(const FractalSpec& spec, const std::vector<double>& p_grid,
                                      int level_lo, int level_hi, const ScalingOptions& options) {
    if (!std::is_sorted(p_grid.begin(), p_grid.end()))
        throw Error("InvalidArgument", "p grid must be sorted");
    for (double p : p_grid)
        if (!(p > 1.0)) throw BadExponent("p grid entries must be > 1");

    SlopeReport rep;
    rep.spec = spec.name;
    rep.level_lo = level_lo;
    rep.level_hi = level_hi;
    for (double p : p_grid) {
        SlopeEval s = eval_slope(spec, p, level_lo, level_hi, options);
        SlopeRow row;
        row.p = p;
        row.slope = s.slope;
        row.stderr_ = s.stderr_;
        rep.rows.push_back(row);
    }
    for (std::size_t i = 1; i < rep.rows.size(); ++i) {
        double tolerance = 2.0 * (rep.rows[i - 1].stderr_ + rep.rows[i].stderr_);
        if (rep.rows[i].slope < rep.rows[i - 1].slope - tolerance) {
            rep.rows[i].inversion = true;
            rep.any_inversion = true;
        }
    }
    return rep;
}

} // namespace confmod
