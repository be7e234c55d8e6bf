#pragma once

// Target manifolds N embedded in R^n and constraint submanifolds Gamma
// inside them. Everything downstream (energies, the solver, the sweepout
// constructions) talks to these through closest-point projection, tangent
// projectors, and the second fundamental form, so adding a new target means
// filling in one of the factories below.

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <memory>
#include <vector>

#include "fbmm/common.hpp"

namespace fbmm {

using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::Vector3d;
using Eigen::VectorXd;

class EmbeddedManifold {
 public:
  enum class Kind { FlatTorus, Sphere, Ellipsoid, LevelSet };

  // R^n viewed as the universal cover of a torus; maps are stored in the
  // cover, so projection is the identity and the lattice is bookkeeping for
  // degree counting. Defaults to the unit lattice.
  static EmbeddedManifold flat_torus(int ambient_dim,
                                     MatrixXd lattice = MatrixXd());

  static EmbeddedManifold sphere(double radius = 1.0, int ambient_dim = 3);

  // Axis-aligned ellipsoid, sum_i (x_i / a_i)^2 = 1.
  static EmbeddedManifold ellipsoid(VectorXd semi_axes);

  // Hypersurface {f = 0}. Projection runs Newton on the KKT system, so the
  // caller declares how far from the surface that is trustworthy, plus a
  // lower bound on the curvature radius for chart sizing.
  static EmbeddedManifold level_set(
      int ambient_dim, std::function<double(const VectorXd&)> f,
      std::function<VectorXd(const VectorXd&)> grad,
      std::function<MatrixXd(const VectorXd&)> hess, double tubular_radius,
      double curvature_radius);

  Kind kind() const { return kind_; }
  int ambient_dim() const { return n_; }
  int dim() const { return kind_ == Kind::FlatTorus ? n_ : n_ - 1; }
  double tubular_radius() const { return tube_; }
  double curvature_radius_min() const { return curv_radius_; }
  double sphere_radius() const { return radius_; }
  const MatrixXd& lattice() const { return lattice_; }

  // Closest point on N. Throws OutsideTubularNeighborhood where a unique
  // closest point is not guaranteed.
  VectorXd project(const VectorXd& p) const;

  // Same, but reports failure instead of throwing (solver hot path).
  bool try_project(const VectorXd& p, VectorXd& out) const;

  // Orthogonal projector onto T_x N for x on (or numerically near) N.
  MatrixXd tangent_projector(const VectorXd& x) const;

  // A_x(v, w), normal-valued, with the sign fixed by A = (d_v P) w for the
  // tangent projector field P. On a radius-R sphere this evaluates to
  // -<v, w> x / R^2. Throws NotTangent when v or w is not tangent at x.
  VectorXd second_fundamental_form(const VectorXd& x, const VectorXd& v,
                                   const VectorXd& w) const;

  // Geodesic exponential, available where a closed form exists (flat torus
  // and sphere); throws GateViolation otherwise.
  VectorXd exp_map(const VectorXd& x, const VectorXd& v) const;

  bool contains(const VectorXd& p, double tol = 1e-9) const;

 private:
  friend class ConstraintSubmanifold;
  EmbeddedManifold() = default;

  VectorXd unit_normal(const VectorXd& x) const;
  double ellipsoid_root(const VectorXd& p) const;
  bool level_set_project(const VectorXd& p, VectorXd& out) const;

  Kind kind_ = Kind::FlatTorus;
  int n_ = 0;
  double tube_ = 0.0;
  double curv_radius_ = 0.0;
  double radius_ = 1.0;
  VectorXd semi_axes_;
  MatrixXd lattice_;
  std::function<double(const VectorXd&)> f_;
  std::function<VectorXd(const VectorXd&)> grad_;
  std::function<MatrixXd(const VectorXd&)> hess_;
};

// Chart along a closed curve Gamma in a surface N: y(0) is arc length along
// Gamma (periodic), y(1) is the signed geodesic-normal offset, so Gamma is
// exactly {y(1) = 0}. to_point refuses offsets beyond `radius`.
struct FermiChart {
  int dim = 2;
  int dim_gamma = 1;
  double radius = 0.0;
  double period = 0.0;
  std::function<VectorXd(const VectorXd&)> to_point;
  std::function<VectorXd(const VectorXd&)> from_point;
};

class ConstraintSubmanifold {
 public:
  enum class Kind { LinearSubtorus, Latitude, ParametricCurve };

  // Affine subspace base + span(directions) in the cover of a flat torus.
  // `period` is the closed length of the loop when directions has one
  // column; it feeds degree counting.
  static ConstraintSubmanifold linear_subtorus(const EmbeddedManifold& torus,
                                               const VectorXd& base,
                                               const MatrixXd& directions,
                                               double period = 1.0);

  // Circle {x3 = height} on a sphere centered at the origin.
  static ConstraintSubmanifold latitude(const EmbeddedManifold& sphere,
                                        double height);

  // Closed curve t in [0, curve_period) -> N, resampled to arc length
  // internally. Ambient surface must be 2-dimensional.
  static ConstraintSubmanifold parametric_curve(
      const EmbeddedManifold& ambient, std::function<VectorXd(double)> curve,
      double curve_period, int samples = 512);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  double length() const { return length_; }
  const EmbeddedManifold& ambient() const { return ambient_; }

  VectorXd project(const VectorXd& p) const;
  MatrixXd tangent_projector(const VectorXd& x) const;

  // Arc-length position of the closest curve point, in [0, length).
  double param_of(const VectorXd& x) const;
  VectorXd point_at(double s) const;
  VectorXd unit_tangent_at(double s) const;
  // In-surface unit normal nu(s) completing the Fermi frame.
  VectorXd unit_conormal_at(double s) const;

  // How far the Fermi chart stays an honest chart (transverse offset).
  double fermi_radius() const { return fermi_radius_; }
  FermiChart fermi_chart() const;

  // |tangential part of v| / |v| at x on Gamma; 0 means v is Gamma-normal.
  double orthogonality_defect(const VectorXd& x, const VectorXd& v) const;

 private:
  ConstraintSubmanifold() = default;

  void build_arclength_table(const std::function<VectorXd(double)>& curve,
                             double curve_period, int samples);

  Kind kind_ = Kind::LinearSubtorus;
  int dim_ = 1;
  double length_ = 0.0;
  double fermi_radius_ = 0.0;
  EmbeddedManifold ambient_;

  // linear subtorus data
  VectorXd base_;
  MatrixXd q_gamma_;  // orthonormal columns spanning Gamma directions
  MatrixXd q_perp_;   // orthonormal complement within the cover

  // latitude data
  double lat_height_ = 0.0;

  // parametric curve data: arc-length table of on-manifold points
  std::vector<VectorXd> table_pts_;
  std::vector<double> table_s_;
};

// Stereographic coordinates on the unit sphere, projecting from the north
// pole (0, 0, 1): w = 0 is the south pole, |w| -> infinity approaches north.
Vector3d stereo_to_sphere(const std::complex<double>& w);
std::complex<double> sphere_to_stereo(const Vector3d& x);

}  // namespace fbmm
