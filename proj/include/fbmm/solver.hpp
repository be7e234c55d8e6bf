#pragma once

// Constrained harmonic map solver: projected Gauss-Seidel sweeps that move
// each vertex to the constrained minimizer of its local energy. Every update
// is accepted only if it lowers the local energy, so the total energy is
// monotone whatever the relaxation factor.

#include <vector>

#include "fbmm/energy.hpp"

namespace fbmm {

struct SolveConfig {
  double tol = 1e-10;   // target for interior + boundary residual
  int max_sweeps = 50000;
  double omega = 1.0;   // over-relaxation; candidates are safeguarded
  int check_every = 20;
  bool record_energy_trace = false;
};

struct SolveResult {
  bool converged = false;
  int sweeps = 0;
  double energy = 0.0;
  double interior_residual = 0.0;
  double boundary_residual = 0.0;
  std::vector<double> energy_trace;  // per sweep, when recorded
};

// Relax the listed vertices (all others act as fixed data). Vertices pinned
// by their class never move even if listed.
SolveResult solve_region(MapOnMesh& u, const std::vector<VertexClass>& classes,
                         const std::vector<int>& active,
                         const SolveConfig& cfg = {});

// Relax everything that is not pinned.
SolveResult solve_harmonic(MapOnMesh& u,
                           const std::vector<VertexClass>& classes,
                           const SolveConfig& cfg = {});

// Exact ambient harmonic extension of the pinned values (sparse direct
// solve), then projection back onto the target/constraint. The usual warm
// start for solves from Dirichlet data.
void initialize_flat_extension(MapOnMesh& u,
                               const std::vector<VertexClass>& classes);

// Harmonic replacement on one region: re-solve its inner vertices, rim and
// everything outside stay bitwise untouched. Energy cannot increase.
SolveResult harmonic_replacement(MapOnMesh& u,
                                 const std::vector<VertexClass>& classes,
                                 const ReplacementRegion& region,
                                 const SolveConfig& cfg = {});

}  // namespace fbmm
