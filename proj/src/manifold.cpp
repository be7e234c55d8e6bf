#include "fbmm/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace fbmm {

namespace {
constexpr double kTangencyTol = 1e-6;

double safe_norm(const VectorXd& v) { return v.norm(); }
}  // namespace

// ---------------------------------------------------------------------------
// Factories

EmbeddedManifold EmbeddedManifold::flat_torus(int ambient_dim,
                                              MatrixXd lattice) {
  EmbeddedManifold m;
  m.kind_ = Kind::FlatTorus;
  m.n_ = ambient_dim;
  if (lattice.size() == 0)
    lattice = MatrixXd::Identity(ambient_dim, ambient_dim);
  m.lattice_ = lattice;
  m.tube_ = std::numeric_limits<double>::infinity();
  m.curv_radius_ = std::numeric_limits<double>::infinity();
  return m;
}

EmbeddedManifold EmbeddedManifold::sphere(double radius, int ambient_dim) {
  EmbeddedManifold m;
  m.kind_ = Kind::Sphere;
  m.n_ = ambient_dim;
  m.radius_ = radius;
  m.tube_ = radius;  // unique closest point everywhere except the center
  m.curv_radius_ = radius;
  return m;
}

EmbeddedManifold EmbeddedManifold::ellipsoid(VectorXd semi_axes) {
  EmbeddedManifold m;
  m.kind_ = Kind::Ellipsoid;
  m.n_ = static_cast<int>(semi_axes.size());
  m.semi_axes_ = semi_axes;
  double a_max = semi_axes.maxCoeff();
  double a_min = semi_axes.minCoeff();
  // Sharpest bend is at the end of the longest axis; its curvature radius
  // a_min^2 / a_max bounds the reach from inside.
  m.curv_radius_ = a_min * a_min / a_max;
  m.tube_ = m.curv_radius_;
  return m;
}

EmbeddedManifold EmbeddedManifold::level_set(
    int ambient_dim, std::function<double(const VectorXd&)> f,
    std::function<VectorXd(const VectorXd&)> grad,
    std::function<MatrixXd(const VectorXd&)> hess, double tubular_radius,
    double curvature_radius) {
  EmbeddedManifold m;
  m.kind_ = Kind::LevelSet;
  m.n_ = ambient_dim;
  m.f_ = std::move(f);
  m.grad_ = std::move(grad);
  m.hess_ = std::move(hess);
  m.tube_ = tubular_radius;
  m.curv_radius_ = curvature_radius;
  return m;
}

// ---------------------------------------------------------------------------
// Projection

VectorXd EmbeddedManifold::project(const VectorXd& p) const {
  VectorXd out;
  if (!try_project(p, out))
    throw OutsideTubularNeighborhood(
        "closest-point projection undefined or outside the tubular "
        "neighborhood");
  return out;
}

bool EmbeddedManifold::try_project(const VectorXd& p, VectorXd& out) const {
  switch (kind_) {
    case Kind::FlatTorus:
      out = p;
      return true;
    case Kind::Sphere: {
      double r = safe_norm(p);
      if (r <= 1e-12 * radius_) return false;
      out = (radius_ / r) * p;
      return true;
    }
    case Kind::Ellipsoid: {
      if (safe_norm(p) <= 1e-13) return false;
      double t = ellipsoid_root(p);
      if (!std::isfinite(t)) return false;
      out.resize(n_);
      for (int i = 0; i < n_; ++i) {
        double a2 = semi_axes_[i] * semi_axes_[i];
        out[i] = p[i] * a2 / (a2 + t);
      }
      // Inside the ellipsoid uniqueness only holds up to the reach; outside
      // it holds globally.
      double f = 0.0;
      for (int i = 0; i < n_; ++i) f += sqr(p[i] / semi_axes_[i]);
      if (f < 1.0 && (p - out).norm() >= 0.999 * tube_) return false;
      return true;
    }
    case Kind::LevelSet:
      return level_set_project(p, out);
  }
  return false;
}

// Root of g(t) = sum_i (p_i a_i / (a_i^2 + t))^2 - 1 on the interval where g
// is monotone; that root gives the closest point x_i = p_i a_i^2/(a_i^2+t).
double EmbeddedManifold::ellipsoid_root(const VectorXd& p) const {
  double t_min = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_; ++i)
    if (std::abs(p[i]) > 0.0)
      t_min = std::min(t_min, semi_axes_[i] * semi_axes_[i]);
  if (!std::isfinite(t_min)) return std::numeric_limits<double>::quiet_NaN();
  t_min = -t_min;

  auto g = [&](double t) {
    double s = -1.0;
    for (int i = 0; i < n_; ++i) {
      double a = semi_axes_[i];
      double denom = a * a + t;
      s += sqr(p[i] * a / denom);
    }
    return s;
  };
  auto dg = [&](double t) {
    double s = 0.0;
    for (int i = 0; i < n_; ++i) {
      double a = semi_axes_[i];
      double denom = a * a + t;
      s += -2.0 * sqr(p[i] * a) / (denom * denom * denom);
    }
    return s;
  };

  double scale = semi_axes_.maxCoeff();
  double lo = t_min + 1e-14 * scale * scale;
  while (g(lo) < 0.0) {
    // numerically we overshot the pole; pull closer
    lo = t_min + 0.1 * (lo - t_min);
    if (lo - t_min < 1e-300) return std::numeric_limits<double>::quiet_NaN();
  }
  double hi = std::max(0.0, t_min) + scale * scale;
  while (g(hi) > 0.0) hi *= 2.0;

  double t = 0.5 * (lo + hi);
  if (g(0.0) > 0.0 && hi > 0.0) t = std::min(hi, safe_norm(p) * scale);
  for (int it = 0; it < 200; ++it) {
    double gt = g(t);
    if (std::abs(gt) < 1e-14) break;
    if (gt > 0.0)
      lo = t;
    else
      hi = t;
    double d = dg(t);
    double t_next = (d != 0.0) ? t - gt / d : 0.5 * (lo + hi);
    if (!(t_next > lo && t_next < hi)) t_next = 0.5 * (lo + hi);
    if (std::abs(t_next - t) < 1e-16 * (1.0 + std::abs(t))) {
      t = t_next;
      break;
    }
    t = t_next;
  }
  return t;
}

bool EmbeddedManifold::level_set_project(const VectorXd& p,
                                         VectorXd& out) const {
  VectorXd x = p;
  // First drive x onto the surface along the gradient.
  double f_scale = std::max(1.0, std::abs(f_(p)));
  for (int it = 0; it < 100; ++it) {
    double fx = f_(x);
    if (std::abs(fx) < 1e-14 * f_scale) break;
    VectorXd g = grad_(x);
    double g2 = g.squaredNorm();
    if (g2 < 1e-20) return false;
    x -= (fx / g2) * g;
  }
  if (std::abs(f_(x)) > 1e-9) return false;

  // Then refine the KKT system x - p + lam * grad f(x) = 0, f(x) = 0.
  VectorXd g = grad_(x);
  double lam = (p - x).dot(g) / g.squaredNorm();
  lam = -lam;
  for (int it = 0; it < 60; ++it) {
    g = grad_(x);
    VectorXd r1 = x - p + lam * g;
    double r2 = f_(x);
    double res = std::sqrt(r1.squaredNorm() + r2 * r2);
    if (res < 1e-12 * (1.0 + p.norm())) break;
    MatrixXd kkt(n_ + 1, n_ + 1);
    kkt.setZero();
    kkt.topLeftCorner(n_, n_) =
        MatrixXd::Identity(n_, n_) + lam * hess_(x);
    kkt.topRightCorner(n_, 1) = g;
    kkt.bottomLeftCorner(1, n_) = g.transpose();
    VectorXd rhs(n_ + 1);
    rhs.head(n_) = -r1;
    rhs[n_] = -r2;
    VectorXd d = kkt.fullPivLu().solve(rhs);
    double alpha = 1.0;
    VectorXd x_new;
    double lam_new = lam;
    for (int ls = 0; ls < 12; ++ls) {
      x_new = x + alpha * d.head(n_);
      lam_new = lam + alpha * d[n_];
      VectorXd r1n = x_new - p + lam_new * grad_(x_new);
      double r2n = f_(x_new);
      if (std::sqrt(r1n.squaredNorm() + r2n * r2n) < res) break;
      alpha *= 0.5;
    }
    x = x_new;
    lam = lam_new;
  }
  if (std::abs(f_(x)) > 1e-9) return false;
  if ((x - p).norm() >= tube_) return false;
  out = x;
  return true;
}

// ---------------------------------------------------------------------------
// Tangent structure

VectorXd EmbeddedManifold::unit_normal(const VectorXd& x) const {
  switch (kind_) {
    case Kind::FlatTorus:
      throw NotTangent("flat torus has no normal direction");
    case Kind::Sphere:
      return x / safe_norm(x);
    case Kind::Ellipsoid: {
      VectorXd g(n_);
      for (int i = 0; i < n_; ++i) g[i] = x[i] / sqr(semi_axes_[i]);
      return g / safe_norm(g);
    }
    case Kind::LevelSet: {
      VectorXd g = grad_(x);
      return g / safe_norm(g);
    }
  }
  return VectorXd();
}

MatrixXd EmbeddedManifold::tangent_projector(const VectorXd& x) const {
  if (kind_ == Kind::FlatTorus) return MatrixXd::Identity(n_, n_);
  VectorXd nrm = unit_normal(x);
  return MatrixXd::Identity(n_, n_) - nrm * nrm.transpose();
}

VectorXd EmbeddedManifold::second_fundamental_form(const VectorXd& x,
                                                   const VectorXd& v,
                                                   const VectorXd& w) const {
  if (kind_ == Kind::FlatTorus) return VectorXd::Zero(n_);
  VectorXd nrm = unit_normal(x);
  double vn = std::abs(nrm.dot(v));
  double wn = std::abs(nrm.dot(w));
  if (vn > kTangencyTol * std::max(1.0, v.norm()) ||
      wn > kTangencyTol * std::max(1.0, w.norm()))
    throw NotTangent("second fundamental form needs tangent arguments");

  switch (kind_) {
    case Kind::Sphere:
      return -(v.dot(w) / sqr(radius_)) * x;
    case Kind::Ellipsoid: {
      double hvw = 0.0;
      double gn = 0.0;
      for (int i = 0; i < n_; ++i) {
        hvw += 2.0 * v[i] * w[i] / sqr(semi_axes_[i]);
        gn += sqr(2.0 * x[i] / sqr(semi_axes_[i]));
      }
      return -(hvw / std::sqrt(gn)) * nrm;
    }
    case Kind::LevelSet: {
      double hvw = w.dot(hess_(x) * v);
      return -(hvw / grad_(x).norm()) * nrm;
    }
    default:
      return VectorXd::Zero(n_);
  }
}

VectorXd EmbeddedManifold::exp_map(const VectorXd& x, const VectorXd& v) const {
  switch (kind_) {
    case Kind::FlatTorus:
      return x + v;
    case Kind::Sphere: {
      VectorXd vt = v - (v.dot(x) / x.squaredNorm()) * x;
      if ((vt - v).norm() > 1e-8 * (1.0 + v.norm()))
        throw NotTangent("exp_map argument is not tangent");
      double t = vt.norm();
      if (t < 1e-300) return x;
      return std::cos(t / radius_) * x +
             (radius_ * std::sin(t / radius_) / t) * vt;
    }
    default:
      throw GateViolation("no closed-form exponential map for this target");
  }
}

bool EmbeddedManifold::contains(const VectorXd& p, double tol) const {
  switch (kind_) {
    case Kind::FlatTorus:
      return true;
    case Kind::Sphere:
      return std::abs(safe_norm(p) - radius_) < tol;
    case Kind::Ellipsoid: {
      double f = -1.0;
      for (int i = 0; i < n_; ++i) f += sqr(p[i] / semi_axes_[i]);
      return std::abs(f) < tol;
    }
    case Kind::LevelSet:
      return std::abs(f_(p)) < tol;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Constraint submanifolds

ConstraintSubmanifold ConstraintSubmanifold::linear_subtorus(
    const EmbeddedManifold& torus, const VectorXd& base,
    const MatrixXd& directions, double period) {
  if (torus.kind() != EmbeddedManifold::Kind::FlatTorus)
    throw GateViolation("linear subtorus requires a flat torus target");
  ConstraintSubmanifold g;
  g.kind_ = Kind::LinearSubtorus;
  g.ambient_ = torus;
  g.base_ = base;
  int n = torus.ambient_dim();
  Eigen::HouseholderQR<MatrixXd> qr(directions);
  MatrixXd q = qr.householderQ() * MatrixXd::Identity(n, n);
  int k = static_cast<int>(directions.cols());
  g.q_gamma_ = q.leftCols(k);
  // QR may flip orientation; keep the stated direction so arc-length
  // parameters (and hence degrees) keep their sign.
  if (g.q_gamma_.col(0).dot(directions.col(0)) < 0.0)
    g.q_gamma_.col(0) *= -1.0;
  g.q_perp_ = q.rightCols(n - k);
  g.dim_ = k;
  g.length_ = period;
  // Transverse chart validity: half the shortest deck translation, after
  // which the nearest-lift bookkeeping becomes ambiguous.
  double min_lat = std::numeric_limits<double>::infinity();
  for (int j = 0; j < torus.lattice().cols(); ++j)
    min_lat = std::min(min_lat, torus.lattice().col(j).norm());
  g.fermi_radius_ = 0.5 * min_lat;
  return g;
}

ConstraintSubmanifold ConstraintSubmanifold::latitude(
    const EmbeddedManifold& sphere, double height) {
  if (sphere.kind() != EmbeddedManifold::Kind::Sphere ||
      sphere.ambient_dim() != 3)
    throw GateViolation("latitude circles live on a sphere in R^3");
  double r = sphere.sphere_radius();
  if (std::abs(height) >= r)
    throw GateViolation("latitude height must be strictly between the poles");
  ConstraintSubmanifold g;
  g.kind_ = Kind::Latitude;
  g.ambient_ = sphere;
  g.lat_height_ = height;
  g.dim_ = 1;
  double phi0 = std::asin(height / r);
  g.length_ = 2.0 * std::numbers::pi * r * std::cos(phi0);
  // The chart folds at the poles.
  g.fermi_radius_ = 0.999 * r * (std::numbers::pi / 2.0 - std::abs(phi0));
  return g;
}

ConstraintSubmanifold ConstraintSubmanifold::parametric_curve(
    const EmbeddedManifold& ambient, std::function<VectorXd(double)> curve,
    double curve_period, int samples) {
  if (ambient.dim() != 2)
    throw GateViolation("parametric constraint curves need a 2-d target");
  ConstraintSubmanifold g;
  g.kind_ = Kind::ParametricCurve;
  g.ambient_ = ambient;
  g.dim_ = 1;
  g.build_arclength_table(curve, curve_period, samples);
  return g;
}

void ConstraintSubmanifold::build_arclength_table(
    const std::function<VectorXd(double)>& curve, double curve_period,
    int samples) {
  // Oversample, measure chordal length, then resample uniformly in arc
  // length so later lookups are trivial.
  int fine = samples * 8;
  std::vector<VectorXd> pts(fine);
  std::vector<double> cum(fine + 1, 0.0);
  for (int i = 0; i < fine; ++i) {
    double t = curve_period * static_cast<double>(i) / fine;
    pts[i] = ambient_.project(curve(t));
  }
  for (int i = 0; i < fine; ++i)
    cum[i + 1] = cum[i] + (pts[(i + 1) % fine] - pts[i]).norm();
  length_ = cum[fine];

  table_pts_.resize(samples);
  table_s_.resize(samples);
  int j = 0;
  for (int i = 0; i < samples; ++i) {
    double target = length_ * static_cast<double>(i) / samples;
    while (j + 1 < fine && cum[j + 1] < target) ++j;
    double seg = cum[j + 1] - cum[j];
    double w = seg > 0.0 ? (target - cum[j]) / seg : 0.0;
    VectorXd p = (1.0 - w) * pts[j] + w * pts[(j + 1) % fine];
    table_pts_[i] = ambient_.project(p);
    table_s_[i] = target;
  }

  // Chart validity: the tube folds once the transverse offset reaches the
  // curve's in-surface bending radius, estimated from second differences.
  double max_kappa = 0.0;
  double ds = length_ / samples;
  for (int i = 0; i < samples; ++i) {
    const VectorXd& a = table_pts_[(i + samples - 1) % samples];
    const VectorXd& b = table_pts_[i];
    const VectorXd& c = table_pts_[(i + 1) % samples];
    VectorXd dd = (a - 2.0 * b + c) / (ds * ds);
    // keep only the in-surface part; ambient bending is chart-irrelevant
    dd = ambient_.tangent_projector(b) * dd;
    max_kappa = std::max(max_kappa, dd.norm());
  }
  fermi_radius_ = max_kappa > 1e-12 ? 0.5 / max_kappa : 0.25 * length_;
  if (ambient_.kind() == EmbeddedManifold::Kind::Sphere) {
    double cap = 0.999 * ambient_.sphere_radius() * std::numbers::pi / 2.0;
    fermi_radius_ = std::min(fermi_radius_, cap);
  }
}

VectorXd ConstraintSubmanifold::project(const VectorXd& p) const {
  switch (kind_) {
    case Kind::LinearSubtorus:
      return base_ + q_gamma_ * (q_gamma_.transpose() * (p - base_));
    case Kind::Latitude: {
      double r = ambient_.sphere_radius();
      double rc = std::sqrt(r * r - lat_height_ * lat_height_);
      double xy = std::hypot(p[0], p[1]);
      if (xy < 1e-12 * r)
        throw OutsideTubularNeighborhood(
            "latitude projection undefined on the polar axis");
      VectorXd out(3);
      out[0] = rc * p[0] / xy;
      out[1] = rc * p[1] / xy;
      out[2] = lat_height_;
      return out;
    }
    case Kind::ParametricCurve:
      return point_at(param_of(p));
  }
  return VectorXd();
}

double ConstraintSubmanifold::param_of(const VectorXd& x) const {
  switch (kind_) {
    case Kind::LinearSubtorus: {
      if (dim_ != 1)
        throw GateViolation("param_of needs a one-dimensional constraint");
      double s = q_gamma_.col(0).dot(x - base_);
      s = std::fmod(s, length_);
      if (s < 0.0) s += length_;
      return s;
    }
    case Kind::Latitude: {
      double theta = std::atan2(x[1], x[0]);
      if (theta < 0.0) theta += 2.0 * std::numbers::pi;
      return theta / (2.0 * std::numbers::pi) * length_;
    }
    case Kind::ParametricCurve: {
      int m = static_cast<int>(table_pts_.size());
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) {
        double d = (table_pts_[i] - x).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = i;
        }
      }
      // Golden-section refine around the winning sample.
      double ds = length_ / m;
      double lo = table_s_[best] - ds;
      double hi = table_s_[best] + ds;
      auto dist2 = [&](double s) { return (point_at(s) - x).squaredNorm(); };
      const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
      double a = lo, b = hi;
      double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
      double f1 = dist2(c1), f2 = dist2(c2);
      for (int it = 0; it < 60; ++it) {
        if (f1 < f2) {
          b = c2;
          c2 = c1;
          f2 = f1;
          c1 = b - gr * (b - a);
          f1 = dist2(c1);
        } else {
          a = c1;
          c1 = c2;
          f1 = f2;
          c2 = a + gr * (b - a);
          f2 = dist2(c2);
        }
      }
      double s = std::fmod(0.5 * (a + b), length_);
      if (s < 0.0) s += length_;
      return s;
    }
  }
  return 0.0;
}

VectorXd ConstraintSubmanifold::point_at(double s) const {
  s = std::fmod(s, length_);
  if (s < 0.0) s += length_;
  switch (kind_) {
    case Kind::LinearSubtorus:
      if (dim_ != 1)
        throw GateViolation("point_at needs a one-dimensional constraint");
      return base_ + s * q_gamma_.col(0);
    case Kind::Latitude: {
      double r = ambient_.sphere_radius();
      double rc = std::sqrt(r * r - lat_height_ * lat_height_);
      double theta = 2.0 * std::numbers::pi * s / length_;
      VectorXd out(3);
      out[0] = rc * std::cos(theta);
      out[1] = rc * std::sin(theta);
      out[2] = lat_height_;
      return out;
    }
    case Kind::ParametricCurve: {
      // Catmull-Rom through the uniform arc-length table; linear chords are
      // too coarse for the closest-point refinement downstream.
      int m = static_cast<int>(table_pts_.size());
      double pos = s / length_ * m;
      int i = static_cast<int>(std::floor(pos)) % m;
      double w = pos - std::floor(pos);
      const VectorXd& p0 = table_pts_[(i + m - 1) % m];
      const VectorXd& p1 = table_pts_[i];
      const VectorXd& p2 = table_pts_[(i + 1) % m];
      const VectorXd& p3 = table_pts_[(i + 2) % m];
      VectorXd p = 0.5 * (2.0 * p1 + (-p0 + p2) * w +
                          (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * (w * w) +
                          (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * (w * w * w));
      return ambient_.project(p);
    }
  }
  return VectorXd();
}

VectorXd ConstraintSubmanifold::unit_tangent_at(double s) const {
  if (kind_ == Kind::LinearSubtorus) return q_gamma_.col(0);
  double d = 1e-5 * length_;
  VectorXd t = point_at(s + d) - point_at(s - d);
  t = ambient_.tangent_projector(point_at(s)) * t;
  return t / t.norm();
}

VectorXd ConstraintSubmanifold::unit_conormal_at(double s) const {
  VectorXd x = point_at(s);
  VectorXd t = unit_tangent_at(s);
  if (ambient_.kind() == EmbeddedManifold::Kind::FlatTorus) {
    if (ambient_.ambient_dim() != 2)
      throw GateViolation("conormal frame needs a 2-d target");
    VectorXd nu(2);
    nu[0] = -t[1];
    nu[1] = t[0];
    return nu;
  }
  // On a surface in R^3 the frame closes with the cross product.
  Vector3d nrm(x[0], x[1], x[2]);
  nrm.normalize();
  Vector3d tv(t[0], t[1], t[2]);
  Vector3d nu = nrm.cross(tv);
  VectorXd out(3);
  out << nu[0], nu[1], nu[2];
  return out;
}

MatrixXd ConstraintSubmanifold::tangent_projector(const VectorXd& x) const {
  if (kind_ == Kind::LinearSubtorus) return q_gamma_ * q_gamma_.transpose();
  double s = param_of(x);
  VectorXd t = unit_tangent_at(s);
  return t * t.transpose();
}

double ConstraintSubmanifold::orthogonality_defect(const VectorXd& x,
                                                   const VectorXd& v) const {
  double vn = v.norm();
  if (vn < 1e-300) return 0.0;
  return (tangent_projector(x) * v).norm() / vn;
}

FermiChart ConstraintSubmanifold::fermi_chart() const {
  FermiChart chart;
  chart.radius = fermi_radius_;
  chart.period = length_;
  chart.dim_gamma = dim_;
  chart.dim = ambient_.dim();

  if (kind_ == Kind::LinearSubtorus) {
    VectorXd base = base_;
    MatrixXd qg = q_gamma_;
    MatrixXd qp = q_perp_;
    double radius = fermi_radius_;
    double period = length_;
    int k = dim_;
    int n = ambient_.ambient_dim();
    chart.to_point = [=](const VectorXd& y) -> VectorXd {
      if (y.tail(n - k).norm() > radius)
        throw GateViolation("chart offset exceeds validity radius");
      return base + qg * y.head(k) + qp * y.tail(n - k);
    };
    chart.from_point = [=](const VectorXd& x) -> VectorXd {
      VectorXd y(n);
      y.head(k) = qg.transpose() * (x - base);
      y.tail(n - k) = qp.transpose() * (x - base);
      for (int i = 0; i < k; ++i) {
        y[i] = std::fmod(y[i], period);
        if (y[i] < 0.0) y[i] += period;
      }
      return y;
    };
    return chart;
  }

  if (kind_ == Kind::Latitude) {
    // Exact chart: y(0) arc length along the circle, y(1) meridian arc
    // length. Transverse distances are exact; longitudinal ones dilate by
    // cos(phi)/cos(phi0).
    double r = ambient_.sphere_radius();
    double phi0 = std::asin(lat_height_ / r);
    double radius = fermi_radius_;
    double period = length_;
    chart.to_point = [=](const VectorXd& y) -> VectorXd {
      if (std::abs(y[1]) > radius)
        throw GateViolation("chart offset exceeds validity radius");
      double theta = 2.0 * std::numbers::pi * y[0] / period;
      double phi = phi0 + y[1] / r;
      VectorXd out(3);
      out[0] = r * std::cos(phi) * std::cos(theta);
      out[1] = r * std::cos(phi) * std::sin(theta);
      out[2] = r * std::sin(phi);
      return out;
    };
    chart.from_point = [=](const VectorXd& x) -> VectorXd {
      double theta = std::atan2(x[1], x[0]);
      if (theta < 0.0) theta += 2.0 * std::numbers::pi;
      double phi = std::asin(std::clamp(x[2] / r, -1.0, 1.0));
      VectorXd y(2);
      y[0] = theta / (2.0 * std::numbers::pi) * period;
      y[1] = r * (phi - phi0);
      return y;
    };
    return chart;
  }

  // Parametric curve: exponential normal chart built from the frame. The
  // lambdas keep their own copy so the chart outlives this object.
  ConstraintSubmanifold self = *this;
  double radius = fermi_radius_;
  chart.to_point = [self, radius](const VectorXd& y) -> VectorXd {
    if (std::abs(y[1]) > radius)
      throw GateViolation("chart offset exceeds validity radius");
    VectorXd q = self.point_at(y[0]);
    return self.ambient().exp_map(q, y[1] * self.unit_conormal_at(y[0]));
  };
  chart.from_point = [self](const VectorXd& x) -> VectorXd {
    double s = self.param_of(x);
    VectorXd q = self.point_at(s);
    VectorXd y(2);
    y[0] = s;
    if (self.ambient().kind() == EmbeddedManifold::Kind::Sphere) {
      double r = self.ambient().sphere_radius();
      double c = std::clamp(q.dot(x) / (r * r), -1.0, 1.0);
      double dist = r * std::acos(c);
      double sign = (x - q).dot(self.unit_conormal_at(s)) >= 0.0 ? 1.0 : -1.0;
      y[1] = sign * dist;
    } else {
      y[1] = (x - q).dot(self.unit_conormal_at(s));
    }
    return y;
  };
  return chart;
}

// ---------------------------------------------------------------------------
// Stereographic helpers

Vector3d stereo_to_sphere(const std::complex<double>& w) {
  double r2 = std::norm(w);
  return Vector3d(2.0 * w.real(), 2.0 * w.imag(), r2 - 1.0) / (1.0 + r2);
}

std::complex<double> sphere_to_stereo(const Vector3d& x) {
  double denom = 1.0 - x[2];
  if (std::abs(denom) < 1e-300)
    throw GateViolation("stereographic chart undefined at the north pole");
  return std::complex<double>(x[0] / denom, x[1] / denom);
}

}  // namespace fbmm
