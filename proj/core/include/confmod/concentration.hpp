#pragma once

#include <string>
#include <vector>

#include "confmod/harmonic.hpp"
#include "confmod/measure.hpp"
#include "confmod/network.hpp"
#include "confmod/spec.hpp"

namespace confmod {

struct ConcentrationOptions {
    double solver_tol = 1e-12;
    int workers = 1;
    /// Per-level conductance renormalization factor; 0 = estimate it from
    /// the unit-conductance energy ratio of consecutive levels (for the
    /// gasket at p = 2 this recovers 5/3).
    double renorm_factor = 0.0;
};

struct ConcentrationRow {
    int level = 0;
    double energy = 0.0;        // renormalized harmonic energy
    double renorm_factor = 0.0; // conductance factor applied from the previous level
    double max_cell_ratio = 0.0;
    double gini = 0.0;
    double tv_distance = 0.0;
};

struct ConcentrationReport {
    std::string spec;
    double p = 2.0;
    std::vector<double> corner_values; // boundary data per reference corner
    int level_lo = 0, level_hi = 0;
    std::vector<ConcentrationRow> rows;
};

/// Solves the corner-boundary p-harmonic problem on the vertex network at
/// each level, localizes the energy measure onto cells and reports how far
/// it drifts from the uniform self-similar measure:
///   max_cell_ratio = max_c (normalized energy / normalized measure),
///   the Gini coefficient of cell energies, and the total-variation
///   distance between the normalized measures.
ConcentrationReport concentration_scan(const FractalSpec& spec, double p,
                                       const std::vector<double>& corner_values, int level_lo,
                                       int level_hi, const ConcentrationOptions& options = {});

/// The corner-problem energy measure itself (normalized), localized on
/// cells: the finite-level energy dominant measure the product demo uses.
MeasureVector harmonic_energy_measure(const FractalSpec& spec, double p,
                                      const std::vector<double>& corner_values, int level,
                                      const ConcentrationOptions& options = {});

struct ProductDemoRow {
    int level = 0;
    double mutual_tv = 0.0;        // tv(Lambda_X x mu_Y, mu_X x Lambda_Y)
    double lm_vs_uniform = 0.0;    // tv(Lambda_X x mu_Y, mu_X x mu_Y)
    double ml_vs_uniform = 0.0;    // tv(mu_X x Lambda_Y, mu_X x mu_Y)
};

struct ProductDemoReport {
    std::string spec_x, spec_y;
    double p = 2.0;
    std::vector<ProductDemoRow> rows;
};

/// Builds the factor energy-dominant measures Lambda from corner-boundary
/// harmonic problems (corner 0 carries value 1 by default) and tabulates the
/// per-level total-variation distances between the two product measures
/// Lambda_X x mu_Y and mu_X x Lambda_Y. Growing mutual distance is the
/// finite-level shadow of their mutual singularity.
ProductDemoReport product_singularity_demo(const FractalSpec& spec_x, const FractalSpec& spec_y,
                                           double p, int level_lo, int level_hi,
                                           const ConcentrationOptions& options = {});

} // namespace confmod
