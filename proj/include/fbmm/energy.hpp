#pragma once

// Discrete Dirichlet energy machinery on triangle meshes: cotangent weights,
// per-triangle gradients, areas and Hopf differentials, and the residuals
// that certify a map is (constrained) harmonic. Energies follow the
// half-convention E(u) = (1/2) int |grad u|^2 throughout; raw integrals are
// named raw_* where a statement needs them.

#include <complex>
#include <memory>
#include <vector>

#include "fbmm/domain.hpp"
#include "fbmm/manifold.hpp"

namespace fbmm {

// How a vertex participates in a solve: relaxed over the whole target,
// pinned, or sliding along the constraint submanifold.
enum class VertexClass : unsigned char { Free, Pinned, OnConstraint };

struct MapOnMesh {
  std::shared_ptr<const Mesh> mesh;
  std::shared_ptr<const EmbeddedManifold> target;
  std::shared_ptr<const ConstraintSubmanifold> constraint;  // may be null
  MatrixXd values;  // one row per vertex, ambient coordinates

  int vertex_count() const { return mesh->vertex_count(); }
};

// Cotangent weights in CSR form plus lumped vertex areas and boundary edge
// masses. Assembly is cheap; callers just rebuild it when needed.
struct EnergyAssembly {
  std::vector<int> offset;
  std::vector<int> neighbor;
  std::vector<double> weight;
  std::vector<double> vertex_mass;    // one third of incident triangle area
  std::vector<double> boundary_mass;  // half-sum of incident boundary edges
  int vertex_count() const { return static_cast<int>(offset.size()) - 1; }
};

EnergyAssembly assemble(const Mesh& m);

// E(u) = (1/2) sum_T |grad u|^2 area_T, compensated summation.
double dirichlet_energy(const Mesh& m, const MatrixXd& values);
// Area swept by the map: integral of the parallelogram Jacobian.
double map_area(const Mesh& m, const MatrixXd& values);
// L^1 norm of the Hopf differential |u_x|^2 - |u_y|^2 - 2i <u_x, u_y>.
double hopf_l1(const Mesh& m, const MatrixXd& values);

// Per-triangle pieces for windowed integrals.
std::vector<double> triangle_raw_energy(const Mesh& m, const MatrixXd& values);
std::vector<double> triangle_area_jacobian(const Mesh& m,
                                           const MatrixXd& values);
std::vector<std::complex<double>> triangle_hopf(const Mesh& m,
                                                const MatrixXd& values);
double triangle_subset_sum(const std::vector<double>& per_triangle,
                           const std::vector<int>& subset);

// (E(v) - E(u)) - E(v - u); zero exactly when u is a discrete minimizer of
// the flat problem and v an admissible competitor.
double pythagoras_margin(const Mesh& m, const MatrixXd& u, const MatrixXd& v);

// Residuals of the constrained harmonic map equation. The interior residual
// measures the target-tangential part of the cotangent Laplacian at Free
// vertices; the boundary residual the constraint-tangential part at
// OnConstraint vertices (the variational conormal flux). Both vanish, up to
// solver tolerance, exactly at discrete minimizers.
void residuals(const MapOnMesh& u, const EnergyAssembly& a,
               const std::vector<VertexClass>& classes, double& interior,
               double& boundary);

struct EnergyReport {
  double energy = 0.0;
  double area = 0.0;
  double hopf_norm = 0.0;
  double interior_residual = 0.0;
  double boundary_residual = 0.0;
};

EnergyReport energy_report(const MapOnMesh& u,
                           const std::vector<VertexClass>& classes);

// Standard vertex classifications.
std::vector<VertexClass> classify_dirichlet(const Mesh& m);  // boundary pinned
// Arcs and corners pinned, chords sliding along Gamma.
std::vector<VertexClass> classify_mixed(const Mesh& m);
// Whole boundary sliding along Gamma (free-boundary disk problem).
std::vector<VertexClass> classify_free(const Mesh& m);

// Barycentric sampling of vertex values.
VectorXd sample_values(const Mesh& m, const MatrixXd& values,
                       const MeshLocator::Hit& hit);

// Largest distance from an OnConstraint vertex value to Gamma.
double max_trace_distance(const MapOnMesh& u,
                          const std::vector<VertexClass>& classes);

// Winding number of the boundary trace along a closed 1-d constraint.
// Throws TraceMismatch when the trace strays off Gamma by more than
// trace_tol.
int boundary_degree(const MapOnMesh& u, double trace_tol = 1e-6);

}  // namespace fbmm
