#pragma once

#include <vector>

#include "confmod/family.hpp"

namespace confmod {

struct SolverOptions {
    double tol = 1e-9;        // outer tolerance: admissibility slack + objective stall
    int max_iterations = 10000;
    int inner_max_passes = 400;
    /// Optional warm-start constraints (cell sequences). Used by the
    /// uniqueness tests to vary the solver's starting point.
    std::vector<std::vector<CellId>> initial_paths;
};

/// Output of the discrete p-modulus program
///   minimize sum_c rho(c)^p  s.t.  sum_{c in gamma} rho(c) >= 1 for all
/// paths gamma of the family. `rho` is rescaled to be exactly admissible, so
/// `value` is a true upper bound; `lower_bound` comes from the Lagrangian
/// dual on the generated constraints, so the optimum lies in
/// [lower_bound, value].
struct ModulusResult {
    double value = 0.0;
    std::vector<double> rho;
    double p = 2.0;
    double slack = 0.0;       // min over paths of (sum rho - 1) after rescale
    double duality_gap = 0.0; // value - lower_bound
    double lower_bound = 0.0;
    int iterations = 0;
    std::size_t active_paths = 0;
    bool empty_family = false;
};

/// Constraint generation with a rho-shortest-path separation oracle;
/// restricted problems are solved by cyclic dual coordinate ascent on the
/// active path multipliers. Throws BadExponent for p <= 1, NonConvergence
/// when the iteration budget runs out.
ModulusResult solve_modulus(const CurveFamily& family, double p, const SolverOptions& options = {});

/// Annular modulus at radius pair (r, 2r); the lemma-scale preconditions
/// r <= diam/32 and cell_diameter <= r are enforced here.
ModulusResult annulus_modulus(const std::shared_ptr<const ApproximationGraph>& graph,
                              CellId center, double r, double p, const SolverOptions& options = {});

/// Modulus of the diameter-capped family joining B(x,r) and B(y,r) with
/// separation at most A*r and cap L*r.
ModulusResult ball_to_ball_modulus(const std::shared_ptr<const ApproximationGraph>& graph,
                                   CellId x, CellId y, double r, double A, double p, double L = 0.0,
                                   const SolverOptions& options = {});

/// Discrete potential reconstruction: f(c) = rho-shortest-path cost from c
/// to the family's target side (both endpoint cells included), zero on the
/// target side itself. Admissible rho gives f >= 1 on the source side.
std::vector<double> potential_from_weights(const CurveFamily& family,
                                           const std::vector<double>& rho);

} // namespace confmod
