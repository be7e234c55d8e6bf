#pragma once

// Shared helpers for the test binaries: building maps by sampling closed
// forms, and error norms computed independently of the library's assembly.

#include <functional>
#include <memory>
#include <vector>

#include "fbmm/energy.hpp"

namespace fbmm {

inline std::shared_ptr<const Mesh> share(Mesh m) {
  return std::make_shared<Mesh>(std::move(m));
}

inline VectorXd v2(double a, double b) {
  VectorXd v(2);
  v << a, b;
  return v;
}

inline VectorXd v3(double a, double b, double c) {
  VectorXd v(3);
  v << a, b, c;
  return v;
}

inline MapOnMesh sample_map(std::shared_ptr<const Mesh> mesh,
                            std::shared_ptr<const EmbeddedManifold> target,
                            std::shared_ptr<const ConstraintSubmanifold> gamma,
                            const std::function<VectorXd(Complex)>& f) {
  MapOnMesh u;
  u.mesh = mesh;
  u.target = target;
  u.constraint = gamma;
  u.values.resize(mesh->vertex_count(), target->ambient_dim());
  for (int i = 0; i < mesh->vertex_count(); ++i)
    u.values.row(i) = f(mesh->point(i)).transpose();
  return u;
}

// Triangle areas summed per corner, computed from scratch.
inline std::vector<double> lumped_mass_direct(const Mesh& m) {
  std::vector<double> mass(m.vertex_count(), 0.0);
  for (int t = 0; t < m.triangle_count(); ++t) {
    auto a = m.point(m.triangles(t, 0));
    auto b = m.point(m.triangles(t, 1));
    auto c = m.point(m.triangles(t, 2));
    double area2 = (b.real() - a.real()) * (c.imag() - a.imag()) -
                   (c.real() - a.real()) * (b.imag() - a.imag());
    for (int k = 0; k < 3; ++k) mass[m.triangles(t, k)] += area2 / 6.0;
  }
  return mass;
}

inline double mesh_area_direct(const Mesh& m) {
  double s = 0.0;
  for (double mi : lumped_mass_direct(m)) s += mi;
  return s;
}

// Mass-weighted L2 distance between vertex values and a reference map.
inline double l2_error(const MapOnMesh& u,
                       const std::function<VectorXd(Complex)>& exact) {
  auto mass = lumped_mass_direct(*u.mesh);
  double s = 0.0;
  for (int i = 0; i < u.vertex_count(); ++i) {
    VectorXd d = u.values.row(i).transpose() - exact(u.mesh->point(i));
    s += mass[i] * d.squaredNorm();
  }
  return std::sqrt(s);
}

inline double linf_error(const MapOnMesh& u,
                         const std::function<VectorXd(Complex)>& exact) {
  double worst = 0.0;
  for (int i = 0; i < u.vertex_count(); ++i) {
    VectorXd d = u.values.row(i).transpose() - exact(u.mesh->point(i));
    worst = std::max(worst, d.norm());
  }
  return worst;
}

}  // namespace fbmm
