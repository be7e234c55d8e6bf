#include "fbmm/energy.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace fbmm {

namespace {

struct TriGrad {
  double area;
  VectorXd ux, uy;
};

// Gradient of the piecewise-linear interpolant on one triangle.
TriGrad tri_grad(const Mesh& m, const MatrixXd& values, int t) {
  int a = m.triangles(t, 0), b = m.triangles(t, 1), c = m.triangles(t, 2);
  double e1x = m.vertices(b, 0) - m.vertices(a, 0);
  double e1y = m.vertices(b, 1) - m.vertices(a, 1);
  double e2x = m.vertices(c, 0) - m.vertices(a, 0);
  double e2y = m.vertices(c, 1) - m.vertices(a, 1);
  double det = e1x * e2y - e2x * e1y;
  int n = static_cast<int>(values.cols());
  TriGrad g;
  g.area = 0.5 * det;
  g.ux.resize(n);
  g.uy.resize(n);
  for (int k = 0; k < n; ++k) {
    double d1 = values(b, k) - values(a, k);
    double d2 = values(c, k) - values(a, k);
    g.ux[k] = (e2y * d1 - e1y * d2) / det;
    g.uy[k] = (-e2x * d1 + e1x * d2) / det;
  }
  return g;
}

}  // namespace

EnergyAssembly assemble(const Mesh& m) {
  int nv = m.vertex_count();
  std::map<std::pair<int, int>, double> w;
  std::map<std::pair<int, int>, int> edge_count;
  EnergyAssembly a;
  a.vertex_mass.assign(nv, 0.0);
  a.boundary_mass.assign(nv, 0.0);

  for (int t = 0; t < m.triangle_count(); ++t) {
    int v[3] = {m.triangles(t, 0), m.triangles(t, 1), m.triangles(t, 2)};
    double px[3], py[3];
    for (int k = 0; k < 3; ++k) {
      px[k] = m.vertices(v[k], 0);
      py[k] = m.vertices(v[k], 1);
    }
    double area2 = (px[1] - px[0]) * (py[2] - py[0]) -
                   (px[2] - px[0]) * (py[1] - py[0]);
    for (int k = 0; k < 3; ++k) a.vertex_mass[v[k]] += area2 / 6.0;
    for (int k = 0; k < 3; ++k) {
      // cotangent at corner k, weighting the opposite edge
      int i = (k + 1) % 3, j = (k + 2) % 3;
      double ax = px[i] - px[k], ay = py[i] - py[k];
      double bx = px[j] - px[k], by = py[j] - py[k];
      double cot = (ax * bx + ay * by) / area2;  // dot / cross of the wedge
      auto key = std::minmax(v[i], v[j]);
      w[{key.first, key.second}] += 0.5 * cot;
      edge_count[{key.first, key.second}]++;
    }
  }
  for (auto& [e, cnt] : edge_count) {
    if (cnt != 1) continue;
    double len = std::abs(m.point(e.first) - m.point(e.second));
    a.boundary_mass[e.first] += 0.5 * len;
    a.boundary_mass[e.second] += 0.5 * len;
  }

  std::vector<int> degree(nv, 0);
  for (auto& [e, wij] : w) {
    degree[e.first]++;
    degree[e.second]++;
  }
  a.offset.assign(nv + 1, 0);
  for (int i = 0; i < nv; ++i) a.offset[i + 1] = a.offset[i] + degree[i];
  a.neighbor.resize(a.offset[nv]);
  a.weight.resize(a.offset[nv]);
  std::vector<int> cursor(a.offset.begin(), a.offset.end() - 1);
  for (auto& [e, wij] : w) {
    a.neighbor[cursor[e.first]] = e.second;
    a.weight[cursor[e.first]++] = wij;
    a.neighbor[cursor[e.second]] = e.first;
    a.weight[cursor[e.second]++] = wij;
  }
  return a;
}

double dirichlet_energy(const Mesh& m, const MatrixXd& values) {
  KahanSum s;
  for (int t = 0; t < m.triangle_count(); ++t) {
    TriGrad g = tri_grad(m, values, t);
    s.add((g.ux.squaredNorm() + g.uy.squaredNorm()) * g.area);
  }
  return 0.5 * s.value();
}

double map_area(const Mesh& m, const MatrixXd& values) {
  KahanSum s;
  for (int t = 0; t < m.triangle_count(); ++t) {
    TriGrad g = tri_grad(m, values, t);
    double det = g.ux.squaredNorm() * g.uy.squaredNorm() - sqr(g.ux.dot(g.uy));
    s.add(std::sqrt(std::max(0.0, det)) * g.area);
  }
  return s.value();
}

double hopf_l1(const Mesh& m, const MatrixXd& values) {
  KahanSum s;
  for (int t = 0; t < m.triangle_count(); ++t) {
    TriGrad g = tri_grad(m, values, t);
    double re = g.ux.squaredNorm() - g.uy.squaredNorm();
    double im = -2.0 * g.ux.dot(g.uy);
    s.add(std::hypot(re, im) * g.area);
  }
  return s.value();
}

std::vector<double> triangle_raw_energy(const Mesh& m,
                                        const MatrixXd& values) {
  std::vector<double> out(m.triangle_count());
  for (int t = 0; t < m.triangle_count(); ++t) {
    TriGrad g = tri_grad(m, values, t);
    out[t] = (g.ux.squaredNorm() + g.uy.squaredNorm()) * g.area;
  }
  return out;
}

std::vector<double> triangle_area_jacobian(const Mesh& m,
                                           const MatrixXd& values) {
  std::vector<double> out(m.triangle_count());
  for (int t = 0; t < m.triangle_count(); ++t) {
    TriGrad g = tri_grad(m, values, t);
    double det = g.ux.squaredNorm() * g.uy.squaredNorm() - sqr(g.ux.dot(g.uy));
    out[t] = std::sqrt(std::max(0.0, det)) * g.area;
  }
  return out;
}

std::vector<std::complex<double>> triangle_hopf(const Mesh& m,
                                                const MatrixXd& values) {
  std::vector<std::complex<double>> out(m.triangle_count());
  for (int t = 0; t < m.triangle_count(); ++t) {
    TriGrad g = tri_grad(m, values, t);
    out[t] = {g.ux.squaredNorm() - g.uy.squaredNorm(),
              -2.0 * g.ux.dot(g.uy)};
  }
  return out;
}

double triangle_subset_sum(const std::vector<double>& per_triangle,
                           const std::vector<int>& subset) {
  KahanSum s;
  for (int t : subset) s.add(per_triangle[t]);
  return s.value();
}

double pythagoras_margin(const Mesh& m, const MatrixXd& u, const MatrixXd& v) {
  double eu = dirichlet_energy(m, u);
  double ev = dirichlet_energy(m, v);
  double ed = dirichlet_energy(m, v - u);
  return (ev - eu) - ed;
}

void residuals(const MapOnMesh& u, const EnergyAssembly& a,
               const std::vector<VertexClass>& classes, double& interior,
               double& boundary) {
  const MatrixXd& vals = u.values;
  int nv = u.vertex_count();
  bool flat = u.target->kind() == EmbeddedManifold::Kind::FlatTorus;
  KahanSum si, sb;
  VectorXd lu(vals.cols());
  for (int i = 0; i < nv; ++i) {
    if (classes[i] == VertexClass::Pinned) continue;
    lu.setZero();
    for (int e = a.offset[i]; e < a.offset[i + 1]; ++e)
      lu += a.weight[e] *
            (vals.row(a.neighbor[e]) - vals.row(i)).transpose();
    if (classes[i] == VertexClass::Free) {
      VectorXd r = flat ? lu
                        : VectorXd(u.target->tangent_projector(
                                       vals.row(i).transpose()) *
                                   lu);
      si.add(r.squaredNorm() / a.vertex_mass[i]);
    } else {  // OnConstraint
      VectorXd r = u.constraint->tangent_projector(vals.row(i).transpose()) *
                   lu;
      sb.add(r.squaredNorm() / a.boundary_mass[i]);
    }
  }
  interior = std::sqrt(si.value());
  boundary = std::sqrt(sb.value());
}

EnergyReport energy_report(const MapOnMesh& u,
                           const std::vector<VertexClass>& classes) {
  EnergyReport r;
  r.energy = dirichlet_energy(*u.mesh, u.values);
  r.area = map_area(*u.mesh, u.values);
  r.hopf_norm = hopf_l1(*u.mesh, u.values);
  EnergyAssembly a = assemble(*u.mesh);
  residuals(u, a, classes, r.interior_residual, r.boundary_residual);
  return r;
}

std::vector<VertexClass> classify_dirichlet(const Mesh& m) {
  std::vector<VertexClass> c(m.vertex_count(), VertexClass::Free);
  for (int i = 0; i < m.vertex_count(); ++i)
    if (m.on_boundary(i)) c[i] = VertexClass::Pinned;
  return c;
}

std::vector<VertexClass> classify_mixed(const Mesh& m) {
  std::vector<VertexClass> c(m.vertex_count(), VertexClass::Free);
  for (int i = 0; i < m.vertex_count(); ++i) {
    switch (m.tags[i]) {
      case VertexTag::Interior:
        break;
      case VertexTag::Chord:
        c[i] = VertexClass::OnConstraint;
        break;
      default:
        c[i] = VertexClass::Pinned;
    }
  }
  return c;
}

std::vector<VertexClass> classify_free(const Mesh& m) {
  std::vector<VertexClass> c(m.vertex_count(), VertexClass::Free);
  for (int i = 0; i < m.vertex_count(); ++i)
    if (m.on_boundary(i)) c[i] = VertexClass::OnConstraint;
  return c;
}

VectorXd sample_values(const Mesh& m, const MatrixXd& values,
                       const MeshLocator::Hit& hit) {
  return hit.w0 * values.row(m.triangles(hit.triangle, 0)).transpose() +
         hit.w1 * values.row(m.triangles(hit.triangle, 1)).transpose() +
         hit.w2 * values.row(m.triangles(hit.triangle, 2)).transpose();
}

double max_trace_distance(const MapOnMesh& u,
                          const std::vector<VertexClass>& classes) {
  double worst = 0.0;
  for (int i = 0; i < u.vertex_count(); ++i) {
    if (classes[i] != VertexClass::OnConstraint) continue;
    VectorXd x = u.values.row(i).transpose();
    worst = std::max(worst, (x - u.constraint->project(x)).norm());
  }
  return worst;
}

int boundary_degree(const MapOnMesh& u, double trace_tol) {
  if (!u.constraint || u.constraint->dim() != 1)
    throw GateViolation("boundary degree needs a closed 1-d constraint");
  auto cycles = boundary_cycles(*u.mesh);
  if (cycles.empty()) throw GateViolation("mesh has no boundary");
  const auto& cycle = cycles.front();
  double len = u.constraint->length();
  double tol = trace_tol;

  double total = 0.0;
  double prev = 0.0;
  bool first = true;
  double s0 = 0.0;
  for (int v : cycle) {
    VectorXd x = u.values.row(v).transpose();
    if ((x - u.constraint->project(x)).norm() > tol)
      throw TraceMismatch("boundary trace strays off the constraint curve");
    double s = u.constraint->param_of(x);
    if (first) {
      s0 = s;
      first = false;
    } else {
      double ds = s - prev;
      // nearest-lift increment
      ds -= len * std::round(ds / len);
      total += ds;
    }
    prev = s;
  }
  double ds = s0 - prev;
  ds -= len * std::round(ds / len);
  total += ds;
  return static_cast<int>(std::lround(total / len));
}

}  // namespace fbmm
