#include "fbmm/solver.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>

namespace fbmm {

namespace {

// Residuals restricted to a vertex subset; same convention as residuals().
void subset_residuals(const MapOnMesh& u, const EnergyAssembly& a,
                      const std::vector<VertexClass>& classes,
                      const std::vector<int>& subset, double& interior,
                      double& boundary) {
  const MatrixXd& vals = u.values;
  bool flat = u.target->kind() == EmbeddedManifold::Kind::FlatTorus;
  KahanSum si, sb;
  VectorXd lu(vals.cols());
  for (int i : subset) {
    if (classes[i] == VertexClass::Pinned) continue;
    lu.setZero();
    for (int e = a.offset[i]; e < a.offset[i + 1]; ++e)
      lu += a.weight[e] * (vals.row(a.neighbor[e]) - vals.row(i)).transpose();
    if (classes[i] == VertexClass::Free) {
      if (flat) {
        si.add(lu.squaredNorm() / a.vertex_mass[i]);
      } else {
        VectorXd r =
            u.target->tangent_projector(vals.row(i).transpose()) * lu;
        si.add(r.squaredNorm() / a.vertex_mass[i]);
      }
    } else {
      VectorXd r =
          u.constraint->tangent_projector(vals.row(i).transpose()) * lu;
      sb.add(r.squaredNorm() / a.boundary_mass[i]);
    }
  }
  interior = std::sqrt(si.value());
  boundary = std::sqrt(sb.value());
}

}  // namespace

SolveResult solve_region(MapOnMesh& u, const std::vector<VertexClass>& classes,
                         const std::vector<int>& active,
                         const SolveConfig& cfg) {
  EnergyAssembly a = assemble(*u.mesh);
  MatrixXd& vals = u.values;
  int n = static_cast<int>(vals.cols());
  bool flat = u.target->kind() == EmbeddedManifold::Kind::FlatTorus;

  std::vector<int> work;
  work.reserve(active.size());
  for (int i : active)
    if (classes[i] != VertexClass::Pinned) work.push_back(i);
  std::sort(work.begin(), work.end());
  work.erase(std::unique(work.begin(), work.end()), work.end());

  SolveResult res;
  if (work.empty()) {
    res.converged = true;
    res.energy = dirichlet_energy(*u.mesh, vals);
    return res;
  }

  // converged-on-entry keeps replacements idempotent (no bits move)
  subset_residuals(u, a, classes, work, res.interior_residual,
                   res.boundary_residual);
  if (res.interior_residual + res.boundary_residual <= cfg.tol) {
    res.converged = true;
    res.energy = dirichlet_energy(*u.mesh, vals);
    return res;
  }

  VectorXd s(n), mean(n), cand(n), cand_sor(n), old(n);
  for (int sweep = 1; sweep <= cfg.max_sweeps; ++sweep) {
    for (int i : work) {
      double w_sum = 0.0;
      s.setZero();
      for (int e = a.offset[i]; e < a.offset[i + 1]; ++e) {
        double w = a.weight[e];
        w_sum += w;
        s += w * vals.row(a.neighbor[e]).transpose();
      }
      if (!(w_sum > 0.0)) continue;
      mean = s / w_sum;
      old = vals.row(i).transpose();

      bool ok;
      if (classes[i] == VertexClass::Free) {
        ok = flat ? (cand = mean, true) : u.target->try_project(mean, cand);
      } else {
        try {
          cand = u.constraint->project(mean);
          ok = true;
        } catch (const OutsideTubularNeighborhood&) {
          ok = false;
        }
      }
      if (!ok) continue;

      if (cfg.omega != 1.0) {
        // local energy up to a constant: L(p) = w_sum |p|^2 / 2 - <p, s>
        auto local = [&](const VectorXd& p) {
          return 0.5 * w_sum * p.squaredNorm() - p.dot(s);
        };
        VectorXd shoot = old + cfg.omega * (cand - old);
        bool ok2;
        if (classes[i] == VertexClass::Free) {
          ok2 = flat ? (cand_sor = shoot, true)
                     : u.target->try_project(shoot, cand_sor);
        } else {
          try {
            cand_sor = u.constraint->project(shoot);
            ok2 = true;
          } catch (const OutsideTubularNeighborhood&) {
            ok2 = false;
          }
        }
        if (ok2 && local(cand_sor) < local(cand)) cand = cand_sor;
      }
      vals.row(i) = cand.transpose();
    }

    if (cfg.record_energy_trace)
      res.energy_trace.push_back(dirichlet_energy(*u.mesh, vals));

    res.sweeps = sweep;
    if (sweep % cfg.check_every == 0 || sweep == cfg.max_sweeps) {
      subset_residuals(u, a, classes, work, res.interior_residual,
                       res.boundary_residual);
      if (res.interior_residual + res.boundary_residual <= cfg.tol) {
        res.converged = true;
        break;
      }
    }
  }
  res.energy = dirichlet_energy(*u.mesh, vals);
  return res;
}

SolveResult solve_harmonic(MapOnMesh& u,
                           const std::vector<VertexClass>& classes,
                           const SolveConfig& cfg) {
  std::vector<int> all(u.vertex_count());
  for (int i = 0; i < u.vertex_count(); ++i) all[i] = i;
  return solve_region(u, classes, all, cfg);
}

void initialize_flat_extension(MapOnMesh& u,
                               const std::vector<VertexClass>& classes) {
  const Mesh& m = *u.mesh;
  EnergyAssembly a = assemble(m);
  int nv = m.vertex_count();
  std::vector<int> unknown_of(nv, -1);
  std::vector<int> order;
  for (int i = 0; i < nv; ++i)
    if (classes[i] != VertexClass::Pinned) {
      unknown_of[i] = static_cast<int>(order.size());
      order.push_back(i);
    }

  int nu = static_cast<int>(order.size());
  MatrixXd before = u.values;
  if (nu > 0 && nu < nv) {
    std::vector<Eigen::Triplet<double>> trip;
    MatrixXd rhs = MatrixXd::Zero(nu, u.values.cols());
    for (int k = 0; k < nu; ++k) {
      int i = order[k];
      double diag = 0.0;
      for (int e = a.offset[i]; e < a.offset[i + 1]; ++e) {
        int j = a.neighbor[e];
        double w = a.weight[e];
        diag += w;
        if (unknown_of[j] >= 0)
          trip.emplace_back(k, unknown_of[j], -w);
        else
          rhs.row(k) += w * u.values.row(j);
      }
      trip.emplace_back(k, k, diag);
    }
    Eigen::SparseMatrix<double> lap(nu, nu);
    lap.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> chol(lap);
    if (chol.info() == Eigen::Success) {
      MatrixXd sol = chol.solve(rhs);
      for (int k = 0; k < nu; ++k) u.values.row(order[k]) = sol.row(k);
    }
  }

  // pull everything back onto the target / constraint; where the extension
  // leaves the tubular neighborhood, keep the previous (on-target) value
  for (int i = 0; i < nv; ++i) {
    if (classes[i] == VertexClass::Pinned) continue;
    VectorXd x = u.values.row(i).transpose();
    if (classes[i] == VertexClass::OnConstraint) {
      try {
        u.values.row(i) = u.constraint->project(x).transpose();
      } catch (const OutsideTubularNeighborhood&) {
        u.values.row(i) = before.row(i);
      }
    } else {
      VectorXd p;
      if (u.target->try_project(x, p))
        u.values.row(i) = p.transpose();
      else
        u.values.row(i) = before.row(i);
    }
  }
}

SolveResult harmonic_replacement(MapOnMesh& u,
                                 const std::vector<VertexClass>& classes,
                                 const ReplacementRegion& region,
                                 const SolveConfig& cfg) {
  return solve_region(u, classes, region.inner_vertices, cfg);
}

}  // namespace fbmm
