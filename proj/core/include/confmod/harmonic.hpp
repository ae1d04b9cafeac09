#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "confmod/energy.hpp"
#include "confmod/network.hpp"

namespace confmod {

struct HarmonicOptions {
    double tol = 1e-12;          // sup-norm of the energy gradient on free nodes
    int max_iterations = 2'000'000;
};

struct HarmonicSolution {
    std::vector<double> values;
    double gradient_norm = 0.0;
    int iterations = 0;
};

/// Minimizes the p-energy over node values with the given boundary data
/// (unit conductance; the minimizer is invariant under conductance scaling).
/// p = 2 runs Jacobi-preconditioned conjugate gradient; p != 2 runs
/// nonlinear Gauss-Seidel with exact per-node line solves. Deterministic
/// initialization at the boundary average; satisfies the discrete comparison
/// principle at convergence. Throws NonConvergence with the residual
/// attached when the iteration budget runs out.
HarmonicSolution solve_p_harmonic(const VertexNetwork& net, double p,
                                  std::span<const std::uint32_t> boundary_nodes,
                                  std::span<const double> boundary_values,
                                  const HarmonicOptions& options = {});

/// Same solver on the cell-adjacency graph of an energy form; boundary data
/// lives on cells.
HarmonicSolution solve_p_harmonic_cells(const EnergyForm& form,
                                        std::span<const CellId> boundary_cells,
                                        std::span<const double> boundary_values,
                                        const HarmonicOptions& options = {});

} // namespace confmod
