#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <Eigen/Sparse>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "fbmm/solver.hpp"
#include "support.hpp"

using namespace fbmm;
using std::numbers::pi;

namespace {

// Reference: direct sparse solve of the flat Dirichlet problem, assembled
// from scratch with the same finite element (independent code path from the
// iterative solver).
MatrixXd direct_flat_dirichlet(const Mesh& m, const MatrixXd& boundary_vals) {
  int nv = m.vertex_count();
  std::vector<int> unknown_of(nv, -1);
  std::vector<int> order;
  for (int i = 0; i < nv; ++i)
    if (!m.on_boundary(i)) {
      unknown_of[i] = static_cast<int>(order.size());
      order.push_back(i);
    }
  int nu = static_cast<int>(order.size());
  std::map<std::pair<int, int>, double> w;
  for (int t = 0; t < m.triangle_count(); ++t) {
    int v[3] = {m.triangles(t, 0), m.triangles(t, 1), m.triangles(t, 2)};
    double px[3], py[3];
    for (int k = 0; k < 3; ++k) {
      px[k] = m.vertices(v[k], 0);
      py[k] = m.vertices(v[k], 1);
    }
    double area2 =
        (px[1] - px[0]) * (py[2] - py[0]) - (px[2] - px[0]) * (py[1] - py[0]);
    for (int k = 0; k < 3; ++k) {
      int i = (k + 1) % 3, j = (k + 2) % 3;
      double dot = (px[i] - px[k]) * (px[j] - px[k]) +
                   (py[i] - py[k]) * (py[j] - py[k]);
      auto key = std::minmax(v[i], v[j]);
      w[{key.first, key.second}] += 0.5 * dot / area2;
    }
  }
  std::vector<Eigen::Triplet<double>> trip;
  MatrixXd rhs = MatrixXd::Zero(nu, boundary_vals.cols());
  std::vector<double> diag(nu, 0.0);
  for (auto& [e, wij] : w) {
    int a = e.first, b = e.second;
    for (int swap = 0; swap < 2; ++swap) {
      int i = swap ? b : a, j = swap ? a : b;
      if (unknown_of[i] < 0) continue;
      diag[unknown_of[i]] += wij;
      if (unknown_of[j] >= 0)
        trip.emplace_back(unknown_of[i], unknown_of[j], -wij);
      else
        rhs.row(unknown_of[i]) += wij * boundary_vals.row(j);
    }
  }
  for (int k = 0; k < nu; ++k) trip.emplace_back(k, k, diag[k]);
  Eigen::SparseMatrix<double> lap(nu, nu);
  lap.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> chol(lap);
  MatrixXd sol = boundary_vals;
  MatrixXd x = chol.solve(rhs);
  for (int k = 0; k < nu; ++k) sol.row(order[k]) = x.row(k);
  return sol;
}

}  // namespace

TEST_CASE("flat Dirichlet solve matches the direct sparse solution") {
  auto mesh = share(make_disk_mesh(0.1));
  auto torus =
      std::make_shared<EmbeddedManifold>(EmbeddedManifold::flat_torus(2));
  auto classes = classify_dirichlet(*mesh);
  auto u = sample_map(mesh, torus, nullptr, [](Complex z) {
    // rough interior, smooth boundary data
    Complex w = z * z * z - 0.4 * z;
    double bump = std::sin(9.0 * z.real()) * 0.3;
    return v2(w.real() + bump, w.imag());
  });
  MatrixXd reference = direct_flat_dirichlet(*mesh, u.values);

  SolveConfig cfg;
  cfg.tol = 1e-11;
  cfg.omega = 1.7;
  cfg.record_energy_trace = true;
  SolveResult res = solve_harmonic(u, classes, cfg);
  CHECK(res.converged);
  CHECK(res.interior_residual + res.boundary_residual <= cfg.tol);
  CHECK((u.values - reference).cwiseAbs().maxCoeff() < 1e-9);

  // energy never increases along the sweeps
  for (size_t k = 1; k < res.energy_trace.size(); ++k)
    CHECK(res.energy_trace[k] <= res.energy_trace[k - 1] + 1e-14);

  // plain relaxation reaches the same discrete minimizer
  auto u2 = sample_map(mesh, torus, nullptr, [](Complex z) {
    Complex w = z * z * z - 0.4 * z;
    double bump = std::sin(9.0 * z.real()) * 0.3;
    return v2(w.real() + bump, w.imag());
  });
  SolveConfig cfg2;
  cfg2.tol = 1e-11;
  cfg2.omega = 1.0;
  cfg2.max_sweeps = 200000;
  SolveResult res2 = solve_harmonic(u2, classes, cfg2);
  CHECK(res2.converged);
  CHECK((u2.values - reference).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("mixed flat problem reproduces the closed-form solution") {
  // Harmonic pair whose trace follows the x-axis on the diameter, with
  // matching normal-derivative orthogonality. Solving from its boundary data
  // must converge back to it at second order.
  auto exact = [](Complex z) {
    double r = std::abs(z), th = std::arg(z);
    double u1 = 0.25 + 0.22 * r * std::cos(th) +
                0.10 * r * r * std::cos(2 * th) -
                0.06 * r * r * r * std::cos(3 * th);
    double u2 = 0.18 * r * std::sin(th) + 0.07 * r * r * r * std::sin(3 * th);
    return v2(u1, u2);
  };
  auto mesh = share(make_half_disk_mesh(0.1));
  auto torus =
      std::make_shared<EmbeddedManifold>(EmbeddedManifold::flat_torus(2));
  auto gamma = std::make_shared<ConstraintSubmanifold>(
      ConstraintSubmanifold::linear_subtorus(
          *torus, v2(0, 0), MatrixXd::Identity(2, 2).col(0), 1.0));
  auto classes = classify_mixed(*mesh);

  auto u = sample_map(mesh, torus, gamma, exact);
  // wipe the interior, keep only boundary information
  for (int i = 0; i < u.vertex_count(); ++i) {
    if (classes[i] == VertexClass::Free) u.values.row(i).setZero();
    if (classes[i] == VertexClass::OnConstraint) u.values(i, 1) = 0.0;
  }
  initialize_flat_extension(u, classes);
  SolveConfig cfg;
  cfg.tol = 1e-11;
  cfg.omega = 1.7;
  SolveResult res = solve_harmonic(u, classes, cfg);
  CHECK(res.converged);
  CHECK(res.boundary_residual < cfg.tol);
  CHECK(l2_error(u, exact) < 4e-3);
  CHECK(max_trace_distance(u, classes) < 1e-12);
}

TEST_CASE("small-energy sphere solves are unique across initializations") {
  auto mesh = share(make_disk_mesh(0.1));
  auto sph = std::make_shared<EmbeddedManifold>(EmbeddedManifold::sphere(1.0));
  auto classes = classify_dirichlet(*mesh);
  VectorXd pole = v3(0, 0, 1);
  auto data = [&](Complex z) {
    // small cap around the pole
    return VectorXd(sph->project(
        v3(0.22 * z.real(), 0.22 * z.imag(), 1.0)));
  };
  auto ua = sample_map(mesh, sph, nullptr, data);
  initialize_flat_extension(ua, classes);
  double e0 = dirichlet_energy(*mesh, ua.values);
  CHECK(e0 < 0.3);  // inside the small-energy regime

  auto ub = sample_map(mesh, sph, nullptr, data);
  std::mt19937_64 rng(77);
  std::normal_distribution<double> gauss;
  for (int i = 0; i < ub.vertex_count(); ++i)
    if (!mesh->on_boundary(i)) {
      VectorXd p = ub.values.row(i).transpose();
      p += 0.05 * v3(gauss(rng), gauss(rng), gauss(rng));
      ub.values.row(i) = sph->project(p).transpose();
    }

  SolveConfig cfg;
  cfg.tol = 1e-10;
  cfg.omega = 1.2;
  SolveResult ra = solve_harmonic(ua, classes, cfg);
  SolveResult rb = solve_harmonic(ub, classes, cfg);
  CHECK(ra.converged);
  CHECK(rb.converged);
  CHECK((ua.values - ub.values).cwiseAbs().maxCoeff() < 1e-7);
  CHECK(ra.energy <= e0 + 1e-14);
}

TEST_CASE("sphere Dirichlet solve recovers the hemisphere map") {
  auto mesh = share(make_disk_mesh(0.1));
  auto sph = std::make_shared<EmbeddedManifold>(EmbeddedManifold::sphere(1.0));
  auto classes = classify_dirichlet(*mesh);
  auto exact = [](Complex z) {
    Vector3d p = stereo_to_sphere(z);
    return v3(p[0], p[1], p[2]);
  };
  auto u = sample_map(mesh, sph, nullptr, exact);
  // distort the interior, then ask the solver to find the hemisphere again
  for (int i = 0; i < u.vertex_count(); ++i)
    if (!mesh->on_boundary(i)) {
      Complex z = mesh->point(i);
      Complex zd = z * std::abs(z);  // radial crush
      u.values.row(i) = stereo_to_sphere(zd).transpose();
    }
  double e_init = dirichlet_energy(*mesh, u.values);

  SolveConfig cfg;
  cfg.tol = 1e-9;
  cfg.omega = 1.2;
  SolveResult res = solve_harmonic(u, classes, cfg);
  CHECK(res.converged);
  CHECK(res.energy <= e_init + 1e-14);
  CHECK(std::abs(res.energy - 2.0 * pi) < 0.1);
  CHECK(map_area(*mesh, u.values) <= res.energy + 1e-12);
  CHECK(l2_error(u, exact) < 0.02);
  // conformal limit: hopf differential nearly vanishes
  CHECK(hopf_l1(*mesh, u.values) < 0.2);
}

TEST_CASE("free-boundary sphere solve satisfies the reflection oracle") {
  // stereographic map of the upper half-disk: arc lands on the equator
  // (pinned), diameter slides along the great circle {y = 0}, and the map is
  // conformal, so the conormal is automatically constraint-orthogonal.
  auto mesh = share(make_half_disk_mesh(0.1));
  auto sph = std::make_shared<EmbeddedManifold>(EmbeddedManifold::sphere(1.0));
  auto gamma = std::make_shared<ConstraintSubmanifold>(
      ConstraintSubmanifold::parametric_curve(
          *sph,
          [](double t) { return v3(std::cos(t), 0.0, std::sin(t)); },
          2.0 * pi, 720));
  auto classes = classify_mixed(*mesh);
  auto exact = [](Complex z) {
    Vector3d p = stereo_to_sphere(z);
    return v3(p[0], p[1], p[2]);
  };
  auto u = sample_map(mesh, sph, gamma, exact);
  for (int i = 0; i < u.vertex_count(); ++i)
    if (classes[i] == VertexClass::Free) u.values.row(i) = v3(0, 1, 0);
  initialize_flat_extension(u, classes);

  SolveConfig cfg;
  cfg.tol = 2e-9;
  cfg.omega = 1.2;
  cfg.max_sweeps = 100000;
  SolveResult res = solve_harmonic(u, classes, cfg);
  CHECK(res.converged);
  CHECK(res.boundary_residual < cfg.tol);
  CHECK(l2_error(u, exact) < 0.02);
  CHECK(max_trace_distance(u, classes) < 1e-7);
}

TEST_CASE("harmonic replacement is local, monotone and idempotent") {
  auto mesh = share(make_disk_mesh(0.1));
  auto torus =
      std::make_shared<EmbeddedManifold>(EmbeddedManifold::flat_torus(2));
  auto classes = classify_dirichlet(*mesh);
  auto u = sample_map(mesh, torus, nullptr, [](Complex z) {
    return v2(0.3 * std::sin(4.0 * z.real()) + 0.1 * z.imag(),
              0.2 * std::cos(3.0 * z.imag()));
  });

  BoundaryBall ball(0.8, 0.3);
  auto region = select_region(*mesh, ball, 1.0);
  REQUIRE_FALSE(region.empty());

  MatrixXd before = u.values;
  double e_before = dirichlet_energy(*mesh, u.values);
  SolveConfig cfg;
  cfg.tol = 1e-11;
  cfg.omega = 1.6;
  SolveResult res = harmonic_replacement(u, classes, region, cfg);
  CHECK(res.converged);
  double e_after = dirichlet_energy(*mesh, u.values);
  CHECK(e_after <= e_before + 1e-15);
  CHECK(e_after < e_before - 1e-6);  // this data really has slack

  // bitwise locality: everything except inner vertices is untouched
  std::vector<char> inner(mesh->vertex_count(), 0);
  for (int v : region.inner_vertices) inner[v] = 1;
  for (int i = 0; i < mesh->vertex_count(); ++i) {
    if (inner[i]) continue;
    CHECK(u.values(i, 0) == before(i, 0));
    CHECK(u.values(i, 1) == before(i, 1));
  }

  // replacing again changes nothing at all
  MatrixXd once = u.values;
  SolveResult res2 = harmonic_replacement(u, classes, region, cfg);
  CHECK(res2.converged);
  CHECK((u.values - once).cwiseAbs().maxCoeff() == 0.0);
}
