#pragma once

// Parameter domains: triangle meshes of the disk, half-disk, half-annulus
// and cylinder, plus the conformal boundary-ball machinery used to carve out
// replacement regions.

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

#include "fbmm/common.hpp"

namespace fbmm {

using Complex = std::complex<double>;

enum class DomainKind { Disk, HalfDisk, HalfAnnulus, HalfCylinder };

// Geometric boundary labels; the solver maps them to conditions per problem.
// Arc0 is the outer circular arc (or the s = b end of a cylinder), Arc1 the
// inner arc (s = a end), Chord the straight pieces, Corner their meeting
// points with the arcs.
enum class VertexTag : unsigned char { Interior, Arc0, Arc1, Chord, Corner };

struct Mesh {
  DomainKind kind = DomainKind::Disk;
  double h = 0.0;
  bool periodic = false;  // cylinder glued in the angular direction
  double param_a = 0.0;   // annulus inner radius / cylinder start
  double param_b = 0.0;   // annulus outer radius / cylinder end
  Eigen::Matrix<double, Eigen::Dynamic, 2> vertices;
  Eigen::Matrix<int, Eigen::Dynamic, 3> triangles;
  std::vector<VertexTag> tags;

  int vertex_count() const { return static_cast<int>(vertices.rows()); }
  int triangle_count() const { return static_cast<int>(triangles.rows()); }
  bool on_boundary(int i) const { return tags[i] != VertexTag::Interior; }
  Complex point(int i) const { return {vertices(i, 0), vertices(i, 1)}; }
};

Mesh make_disk_mesh(double h);
Mesh make_half_disk_mesh(double h);
// Log-uniform in radius so cells stay near-square at every scale.
Mesh make_half_annulus_mesh(double r1, double r2, double h);
// Flat strip [a, b] x [0, pi], or [a, b] x S^1_{2 pi} when half = false.
Mesh make_cylinder_mesh(double a, double b, double h, bool half = true);

// Boundary vertex cycles, oriented with the triangles (counterclockwise for
// our meshes). One cycle for disk-type domains, two for the glued cylinder.
std::vector<std::vector<int>> boundary_cycles(const Mesh& m);

void save_mesh(const Mesh& m, const std::string& path);
Mesh load_mesh(const std::string& path);

// ---------------------------------------------------------------------------
// Conformal machinery on the disk. cayley maps the upper half-plane onto the
// unit disk sending (0, 1, infinity) to (-i, 1, i); the distinguished point
// p_plus = i is where every boundary-ball chart degenerates, so the covers
// downstream keep clear of it.

Complex cayley(Complex z);
Complex cayley_inv(Complex w);
inline Complex p_plus() { return {0.0, 1.0}; }

// Generalized ball attached to a boundary point. The chart
// phi(z) = cayley(r z + x_tilde) identifies the scaled upper half-disk
// D+_rho with a region of D hugging the boundary point; rho = 1 is the ball
// itself, smaller rho shrinks it conformally.
struct BoundaryBall {
  double center_angle = 0.0;  // boundary point exp(i * center_angle)
  double radius = 0.25;       // chart scale, kept below 1/2 in covers

  BoundaryBall() = default;
  BoundaryBall(double angle, double r);

  Complex center() const;
  Complex chart_to_disk(Complex z) const;  // phi: D+ -> region
  Complex disk_to_chart(Complex w) const;  // phi^{-1}
  // Conformal dilation of the ball onto the whole disk.
  Complex dilation(Complex w) const;
  bool contains(Complex w, double rho) const;

 private:
  double x_tilde_ = 0.0;  // cayley_inv(center), real
};

// Euclidean ball in the interior, used for interior replacements and
// blow-ups.
struct InteriorBall {
  Complex center;
  double radius = 0.0;
  bool contains(Complex w, double rho) const {
    return std::abs(w - center) <= rho * radius;
  }
};

// A replacement region is a union of whole triangles of the existing mesh.
// Vertices split into the rim (shared with outside triangles, pinned during
// a replacement) and the inner part (re-solved). Solving only inner vertices
// keeps energies monotone and leaves everything outside bitwise untouched.
struct ReplacementRegion {
  std::vector<int> triangles;
  std::vector<int> inner_vertices;
  std::vector<int> rim_vertices;
  bool empty() const { return triangles.empty(); }
};

ReplacementRegion select_region(const Mesh& m, const BoundaryBall& ball,
                                double rho);
ReplacementRegion select_region(const Mesh& m, const InteriorBall& ball,
                                double rho);

// True when the regions share no vertices at all, which is what simultaneous
// replacement needs.
bool regions_disjoint(const ReplacementRegion& a, const ReplacementRegion& b);

// ---------------------------------------------------------------------------
// Point location for resampling maps between meshes / reparametrizations.

class MeshLocator {
 public:
  explicit MeshLocator(const Mesh& m, int grid = 64);

  // Barycentric coordinates of the triangle containing p (nearest triangle
  // if p falls slightly outside, as happens on curved boundaries).
  struct Hit {
    int triangle = -1;
    double w0 = 0, w1 = 0, w2 = 0;
  };
  Hit locate(Complex p) const;

 private:
  const Mesh* mesh_;
  int grid_;
  double x0_, y0_, dx_, dy_;
  std::vector<std::vector<int>> cells_;
};

}  // namespace fbmm
