#pragma once

#include <string>
#include <utility>
#include <vector>

#include "confmod/graph.hpp"
#include "confmod/modulus.hpp"

namespace confmod {

struct ScalingOptions {
    double radius = 0.0;     // annulus inner radius; 0 = cell diameter at the coarsest level
    int centers = 5;         // deterministic center sample size (index stride)
    double solver_tol = 1e-8;
    int workers = 1;
};

struct LevelSample {
    int level = 0;
    double eps_over_r = 0.0;
    double modulus = 0.0; // mean over centers
    double slack = 0.0;   // worst (most negative) slack among centers
    double log_stddev = 0.0; // center-to-center spread of log modulus (of the mean)
};

/// Log-log scaling fit of annular modulus across levels. slope estimates
/// beta_p - d_H; the alternative consecutive-level ratio estimates are kept
/// alongside the primary least-squares fit.
struct ScalingFit {
    std::string spec;
    double p = 2.0;
    double radius = 0.0;
    int level_lo = 0, level_hi = 0;
    std::vector<LevelSample> samples;
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    double slope_stderr = 0.0;
    double beta_p = 0.0; // slope + hausdorff_dim
    std::vector<double> ratio_slopes; // per consecutive level pair
    // Richardson-extrapolated tail slope 2*s_k - s_(k-1) of the consecutive
    // level estimates: the discrete modulus carries an O(eps/r) transient at
    // coarse levels which biases the raw least-squares slope; the
    // extrapolation removes the leading term. Root finding uses this.
    double tail_slope = 0.0;
    double tail_stderr = 0.0;
};

ScalingFit fit_exponent(const FractalSpec& spec, double p, int level_lo, int level_hi,
                        const ScalingOptions& options = {});

struct ConfDimEstimate {
    std::string spec;
    double q_estimate = 0.0;
    double p_low = 0.0, p_high = 0.0; // final bracket, slope(p_low) <= 0 <= slope(p_high)
    std::vector<std::pair<double, double>> per_p_slopes; // evaluated (p, slope), sorted by p
    int level_lo = 0, level_hi = 0;
    double noise_width = 0.0; // bracket width floor implied by fit noise
    bool degenerate_low = false;  // slope already positive at the p > 1 clamp
    bool degenerate_high = false; // slope still negative at d_H + 1
    bool non_monotone = false;    // slope inversions beyond fit noise observed
};

/// Critical-exponent estimate: bisection on p for the root of the annular
/// scaling slope. The bracket is widened automatically up to
/// [1.01, d_H + 1]; bisection stops at max(bisect_tol, noise width). Throws
/// BracketFailure only when slopes are inconsistent after widening.
ConfDimEstimate estimate_confdim(const FractalSpec& spec, int level_lo, int level_hi,
                                 double p_bracket_lo, double p_bracket_hi, double bisect_tol,
                                 const ScalingOptions& options = {});

struct SlopeRow {
    double p = 0.0;
    double slope = 0.0;
    double stderr_ = 0.0;
    bool inversion = false; // slope dropped vs previous p beyond fit noise
};

struct SlopeReport {
    std::string spec;
    int level_lo = 0, level_hi = 0;
    std::vector<SlopeRow> rows;
    bool any_inversion = false;
};

/// Per-p slopes over a sorted grid with inversion flags (2x stderr rule).
SlopeReport slope_monotonicity_report(const FractalSpec& spec, const std::vector<double>& p_grid,
                                      int level_lo, int level_hi,
                                      const ScalingOptions& options = {});

} // namespace confmod
