#include "fbmm/domain.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

namespace fbmm {

using std::numbers::pi;

namespace {

// Triangulates the strip between two concentric vertex rings by always
// advancing whichever side has the smaller next angular fraction. Produces
// a + b counterclockwise triangles for segment counts a and b.
void band_closed(const std::vector<int>& inner, const std::vector<int>& outer,
                 std::vector<std::array<int, 3>>& out) {
  int a = static_cast<int>(inner.size());
  int b = static_cast<int>(outer.size());
  int i = 0, j = 0;
  while (i < a || j < b) {
    bool adv_inner;
    if (i == a)
      adv_inner = false;
    else if (j == b)
      adv_inner = true;
    else
      adv_inner = static_cast<double>(i + 1) / a <=
                  static_cast<double>(j + 1) / b;
    if (adv_inner) {
      out.push_back({inner[i % a], outer[j % b], inner[(i + 1) % a]});
      ++i;
    } else {
      out.push_back({outer[j % b], outer[(j + 1) % b], inner[i % a]});
      ++j;
    }
  }
}

// Same for open strips (vertex paths with a+1 and b+1 points).
void band_open(const std::vector<int>& inner, const std::vector<int>& outer,
               std::vector<std::array<int, 3>>& out) {
  int a = static_cast<int>(inner.size()) - 1;
  int b = static_cast<int>(outer.size()) - 1;
  int i = 0, j = 0;
  while (i < a || j < b) {
    bool adv_inner;
    if (i == a)
      adv_inner = false;
    else if (j == b)
      adv_inner = true;
    else
      adv_inner = static_cast<double>(i + 1) / a <=
                  static_cast<double>(j + 1) / b;
    if (adv_inner) {
      out.push_back({inner[i], outer[j], inner[i + 1]});
      ++i;
    } else {
      out.push_back({outer[j], outer[j + 1], inner[i]});
      ++j;
    }
  }
}

Mesh finish(DomainKind kind, double h,
            const std::vector<std::array<double, 2>>& pts,
            const std::vector<VertexTag>& tags,
            const std::vector<std::array<int, 3>>& tris) {
  Mesh m;
  m.kind = kind;
  m.h = h;
  m.vertices.resize(static_cast<int>(pts.size()), 2);
  for (size_t i = 0; i < pts.size(); ++i) {
    m.vertices(static_cast<int>(i), 0) = pts[i][0];
    m.vertices(static_cast<int>(i), 1) = pts[i][1];
  }
  m.triangles.resize(static_cast<int>(tris.size()), 3);
  for (size_t t = 0; t < tris.size(); ++t)
    for (int k = 0; k < 3; ++k)
      m.triangles(static_cast<int>(t), k) = tris[t][k];
  m.tags = tags;
  return m;
}

}  // namespace

Mesh make_disk_mesh(double h) {
  int n = std::max(2, static_cast<int>(std::lround(1.0 / h)));
  std::vector<std::array<double, 2>> pts;
  std::vector<VertexTag> tags;
  std::vector<std::array<int, 3>> tris;

  pts.push_back({0.0, 0.0});
  tags.push_back(VertexTag::Interior);
  std::vector<std::vector<int>> rings(n + 1);
  rings[0] = {0};
  for (int k = 1; k <= n; ++k) {
    double r = static_cast<double>(k) / n;
    int cnt = 6 * k;
    rings[k].resize(cnt);
    for (int j = 0; j < cnt; ++j) {
      double th = 2.0 * pi * j / cnt;
      rings[k][j] = static_cast<int>(pts.size());
      pts.push_back({r * std::cos(th), r * std::sin(th)});
      tags.push_back(k == n ? VertexTag::Arc0 : VertexTag::Interior);
    }
  }
  // center fan
  for (int j = 0; j < 6; ++j)
    tris.push_back({rings[1][j], rings[1][(j + 1) % 6], 0});
  for (int k = 1; k < n; ++k) band_closed(rings[k], rings[k + 1], tris);
  return finish(DomainKind::Disk, h, pts, tags, tris);
}

Mesh make_half_disk_mesh(double h) {
  int n = std::max(2, static_cast<int>(std::lround(1.0 / h)));
  std::vector<std::array<double, 2>> pts;
  std::vector<VertexTag> tags;
  std::vector<std::array<int, 3>> tris;

  pts.push_back({0.0, 0.0});
  tags.push_back(VertexTag::Chord);  // the diameter passes through the center
  std::vector<std::vector<int>> rings(n + 1);
  rings[0] = {0};
  for (int k = 1; k <= n; ++k) {
    double r = static_cast<double>(k) / n;
    int cnt = 3 * k;  // segments; cnt + 1 vertices
    rings[k].resize(cnt + 1);
    for (int j = 0; j <= cnt; ++j) {
      double th = pi * j / cnt;
      rings[k][j] = static_cast<int>(pts.size());
      pts.push_back({r * std::cos(th), r * std::sin(th)});
      VertexTag tag;
      if (k == n)
        tag = (j == 0 || j == cnt) ? VertexTag::Corner : VertexTag::Arc0;
      else
        tag = (j == 0 || j == cnt) ? VertexTag::Chord : VertexTag::Interior;
      tags.push_back(tag);
    }
  }
  for (int j = 0; j < 3; ++j)
    tris.push_back({rings[1][j], rings[1][j + 1], 0});
  for (int k = 1; k < n; ++k) band_open(rings[k], rings[k + 1], tris);
  return finish(DomainKind::HalfDisk, h, pts, tags, tris);
}

Mesh make_half_annulus_mesh(double r1, double r2, double h) {
  if (!(0.0 < r1 && r1 < r2))
    throw GateViolation("half annulus needs 0 < r1 < r2");
  int nth = std::max(3, static_cast<int>(std::lround(pi * r2 / h)));
  int mr =
      std::max(2, static_cast<int>(std::lround(r2 * std::log(r2 / r1) / h)));
  std::vector<std::array<double, 2>> pts;
  std::vector<VertexTag> tags;
  std::vector<std::array<int, 3>> tris;

  for (int i = 0; i <= mr; ++i) {
    double r = r1 * std::exp(std::log(r2 / r1) * i / mr);
    for (int j = 0; j <= nth; ++j) {
      double th = pi * j / nth;
      pts.push_back({r * std::cos(th), r * std::sin(th)});
      bool chord = (j == 0 || j == nth);
      VertexTag tag = VertexTag::Interior;
      if (i == 0)
        tag = chord ? VertexTag::Corner : VertexTag::Arc1;
      else if (i == mr)
        tag = chord ? VertexTag::Corner : VertexTag::Arc0;
      else if (chord)
        tag = VertexTag::Chord;
      tags.push_back(tag);
    }
  }
  auto idx = [nth](int i, int j) { return i * (nth + 1) + j; };
  for (int i = 0; i < mr; ++i)
    for (int j = 0; j < nth; ++j) {
      int a = idx(i, j), b = idx(i + 1, j), c = idx(i + 1, j + 1),
          d = idx(i, j + 1);
      if ((i + j) % 2 == 0) {
        tris.push_back({a, b, c});
        tris.push_back({a, c, d});
      } else {
        tris.push_back({a, b, d});
        tris.push_back({b, c, d});
      }
    }
  Mesh m = finish(DomainKind::HalfAnnulus, h, pts, tags, tris);
  m.param_a = r1;
  m.param_b = r2;
  return m;
}

Mesh make_cylinder_mesh(double a, double b, double h, bool half) {
  if (!(a < b)) throw GateViolation("cylinder needs a < b");
  double span = half ? pi : 2.0 * pi;
  int ms = std::max(2, static_cast<int>(std::lround((b - a) / h)));
  int nth = std::max(half ? 3 : 6, static_cast<int>(std::lround(span / h)));
  int cols = half ? nth + 1 : nth;

  std::vector<std::array<double, 2>> pts;
  std::vector<VertexTag> tags;
  std::vector<std::array<int, 3>> tris;

  for (int i = 0; i <= ms; ++i) {
    double s = a + (b - a) * i / ms;
    for (int j = 0; j < cols; ++j) {
      double th = span * j / nth;
      pts.push_back({s, th});
      VertexTag tag = VertexTag::Interior;
      bool side = half && (j == 0 || j == nth);
      if (i == 0)
        tag = side ? VertexTag::Corner : VertexTag::Arc1;
      else if (i == ms)
        tag = side ? VertexTag::Corner : VertexTag::Arc0;
      else if (side)
        tag = VertexTag::Chord;
      tags.push_back(tag);
    }
  }
  auto idx = [cols](int i, int j) { return i * cols + j; };
  int jmax = half ? nth : nth;  // segments either way
  for (int i = 0; i < ms; ++i)
    for (int j = 0; j < jmax; ++j) {
      int jn = half ? j + 1 : (j + 1) % nth;
      int p = idx(i, j), q = idx(i + 1, j), r = idx(i + 1, jn),
          s = idx(i, jn);
      if ((i + j) % 2 == 0) {
        tris.push_back({p, q, r});
        tris.push_back({p, r, s});
      } else {
        tris.push_back({p, q, s});
        tris.push_back({q, r, s});
      }
    }
  Mesh m = finish(DomainKind::HalfCylinder, h, pts, tags, tris);
  m.periodic = !half;
  m.param_a = a;
  m.param_b = b;
  return m;
}

std::vector<std::vector<int>> boundary_cycles(const Mesh& m) {
  // boundary edges are the directed triangle edges whose reverse never shows
  // up; chaining them follows the induced orientation
  std::map<std::pair<int, int>, int> count;
  for (int t = 0; t < m.triangle_count(); ++t)
    for (int k = 0; k < 3; ++k) {
      int u = m.triangles(t, k), v = m.triangles(t, (k + 1) % 3);
      count[{std::min(u, v), std::max(u, v)}]++;
    }
  std::map<int, int> next;
  for (int t = 0; t < m.triangle_count(); ++t)
    for (int k = 0; k < 3; ++k) {
      int u = m.triangles(t, k), v = m.triangles(t, (k + 1) % 3);
      if (count[{std::min(u, v), std::max(u, v)}] == 1) next[u] = v;
    }
  std::vector<std::vector<int>> cycles;
  std::map<int, bool> used;
  for (auto& [start, _] : next) {
    if (used[start]) continue;
    std::vector<int> cycle;
    int v = start;
    do {
      cycle.push_back(v);
      used[v] = true;
      v = next.at(v);
    } while (v != start);
    cycles.push_back(std::move(cycle));
  }
  return cycles;
}

// ---------------------------------------------------------------------------
// Mesh files: a one-line header, vertices with tags, then triangles.

void save_mesh(const Mesh& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw GateViolation("cannot open mesh file for writing: " + path);
  const char* names[] = {"disk", "half_disk", "half_annulus", "half_cylinder"};
  out << "mesh v=" << m.vertex_count() << " t=" << m.triangle_count()
      << " domain=" << names[static_cast<int>(m.kind)] << " format=1\n";
  out << "h=" << format_double(m.h) << " periodic=" << (m.periodic ? 1 : 0)
      << " a=" << format_double(m.param_a) << " b=" << format_double(m.param_b)
      << "\n";
  for (int i = 0; i < m.vertex_count(); ++i)
    out << format_double(m.vertices(i, 0)) << ' '
        << format_double(m.vertices(i, 1)) << ' '
        << static_cast<int>(m.tags[i]) << '\n';
  for (int t = 0; t < m.triangle_count(); ++t)
    out << m.triangles(t, 0) << ' ' << m.triangles(t, 1) << ' '
        << m.triangles(t, 2) << '\n';
}

Mesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw GateViolation("cannot open mesh file: " + path);
  std::string word;
  in >> word;
  if (word != "mesh") throw GateViolation("not a mesh file: " + path);
  int nv = 0, nt = 0, fmt = 0;
  std::string domain;
  auto parse_kv = [&](const std::string& tok) {
    auto eq = tok.find('=');
    return std::pair(tok.substr(0, eq), tok.substr(eq + 1));
  };
  for (int k = 0; k < 4; ++k) {
    in >> word;
    auto [key, val] = parse_kv(word);
    if (key == "v") nv = std::stoi(val);
    if (key == "t") nt = std::stoi(val);
    if (key == "domain") domain = val;
    if (key == "format") fmt = std::stoi(val);
  }
  if (fmt != 1) throw GateViolation("unsupported mesh format");
  Mesh m;
  if (domain == "disk")
    m.kind = DomainKind::Disk;
  else if (domain == "half_disk")
    m.kind = DomainKind::HalfDisk;
  else if (domain == "half_annulus")
    m.kind = DomainKind::HalfAnnulus;
  else if (domain == "half_cylinder")
    m.kind = DomainKind::HalfCylinder;
  else
    throw GateViolation("unknown domain kind: " + domain);
  for (int k = 0; k < 4; ++k) {
    in >> word;
    auto [key, val] = parse_kv(word);
    if (key == "h") m.h = std::stod(val);
    if (key == "periodic") m.periodic = val == "1";
    if (key == "a") m.param_a = std::stod(val);
    if (key == "b") m.param_b = std::stod(val);
  }
  m.vertices.resize(nv, 2);
  m.tags.resize(nv);
  for (int i = 0; i < nv; ++i) {
    double x, y;
    int tag;
    in >> x >> y >> tag;
    m.vertices(i, 0) = x;
    m.vertices(i, 1) = y;
    m.tags[i] = static_cast<VertexTag>(tag);
  }
  m.triangles.resize(nt, 3);
  for (int t = 0; t < nt; ++t)
    in >> m.triangles(t, 0) >> m.triangles(t, 1) >> m.triangles(t, 2);
  if (!in) throw GateViolation("truncated mesh file: " + path);
  return m;
}

// ---------------------------------------------------------------------------
// Conformal machinery

Complex cayley(Complex z) {
  return Complex(0, 1) * (z - Complex(0, 1)) / (z + Complex(0, 1));
}

Complex cayley_inv(Complex w) {
  return (Complex(1, 0) - Complex(0, 1) * w) / (w - Complex(0, 1));
}

BoundaryBall::BoundaryBall(double angle, double r)
    : center_angle(angle), radius(r) {
  Complex x = center();
  if (std::abs(x - p_plus()) < 0.05)
    throw GateViolation(
        "boundary ball center degenerates the chart near the distinguished "
        "point");
  x_tilde_ = cayley_inv(x).real();
}

Complex BoundaryBall::center() const {
  return std::polar(1.0, center_angle);
}

Complex BoundaryBall::chart_to_disk(Complex z) const {
  return cayley(radius * z + x_tilde_);
}

Complex BoundaryBall::disk_to_chart(Complex w) const {
  return (cayley_inv(w) - x_tilde_) / radius;
}

Complex BoundaryBall::dilation(Complex w) const {
  return cayley(disk_to_chart(w));
}

bool BoundaryBall::contains(Complex w, double rho) const {
  if (std::abs(w - p_plus()) < 1e-14) return false;
  return std::abs(disk_to_chart(w)) <= rho;
}

// ---------------------------------------------------------------------------
// Region selection

namespace {

template <class Ball>
ReplacementRegion select_region_impl(const Mesh& m, const Ball& ball,
                                     double rho) {
  int nv = m.vertex_count();
  std::vector<char> inside(nv);
  for (int i = 0; i < nv; ++i) inside[i] = ball.contains(m.point(i), rho);

  ReplacementRegion region;
  std::vector<char> in_region(nv, 0), touches_outside(nv, 0);
  for (int t = 0; t < m.triangle_count(); ++t) {
    bool all = inside[m.triangles(t, 0)] && inside[m.triangles(t, 1)] &&
               inside[m.triangles(t, 2)];
    for (int k = 0; k < 3; ++k) {
      if (all)
        in_region[m.triangles(t, k)] = 1;
      else
        touches_outside[m.triangles(t, k)] = 1;
    }
    if (all) region.triangles.push_back(t);
  }
  for (int i = 0; i < nv; ++i) {
    if (!in_region[i]) continue;
    if (touches_outside[i])
      region.rim_vertices.push_back(i);
    else
      region.inner_vertices.push_back(i);
  }
  return region;
}

}  // namespace

ReplacementRegion select_region(const Mesh& m, const BoundaryBall& ball,
                                double rho) {
  return select_region_impl(m, ball, rho);
}

ReplacementRegion select_region(const Mesh& m, const InteriorBall& ball,
                                double rho) {
  return select_region_impl(m, ball, rho);
}

bool regions_disjoint(const ReplacementRegion& a, const ReplacementRegion& b) {
  std::vector<int> va, vb;
  auto collect = [](const ReplacementRegion& r, std::vector<int>& v) {
    v.insert(v.end(), r.inner_vertices.begin(), r.inner_vertices.end());
    v.insert(v.end(), r.rim_vertices.begin(), r.rim_vertices.end());
    std::sort(v.begin(), v.end());
  };
  collect(a, va);
  collect(b, vb);
  std::vector<int> both;
  std::set_intersection(va.begin(), va.end(), vb.begin(), vb.end(),
                        std::back_inserter(both));
  return both.empty();
}

// ---------------------------------------------------------------------------
// Point location

MeshLocator::MeshLocator(const Mesh& m, int grid) : mesh_(&m), grid_(grid) {
  double x1 = m.vertices.col(0).minCoeff(), x2 = m.vertices.col(0).maxCoeff();
  double y1 = m.vertices.col(1).minCoeff(), y2 = m.vertices.col(1).maxCoeff();
  double pad = 1e-9 + 1e-6 * std::max(x2 - x1, y2 - y1);
  x0_ = x1 - pad;
  y0_ = y1 - pad;
  dx_ = (x2 - x1 + 2 * pad) / grid;
  dy_ = (y2 - y1 + 2 * pad) / grid;
  cells_.resize(static_cast<size_t>(grid) * grid);
  for (int t = 0; t < m.triangle_count(); ++t) {
    double tx1 = 1e30, tx2 = -1e30, ty1 = 1e30, ty2 = -1e30;
    for (int k = 0; k < 3; ++k) {
      int v = m.triangles(t, k);
      tx1 = std::min(tx1, m.vertices(v, 0));
      tx2 = std::max(tx2, m.vertices(v, 0));
      ty1 = std::min(ty1, m.vertices(v, 1));
      ty2 = std::max(ty2, m.vertices(v, 1));
    }
    int i1 = std::clamp(static_cast<int>((tx1 - x0_) / dx_), 0, grid - 1);
    int i2 = std::clamp(static_cast<int>((tx2 - x0_) / dx_), 0, grid - 1);
    int j1 = std::clamp(static_cast<int>((ty1 - y0_) / dy_), 0, grid - 1);
    int j2 = std::clamp(static_cast<int>((ty2 - y0_) / dy_), 0, grid - 1);
    for (int i = i1; i <= i2; ++i)
      for (int j = j1; j <= j2; ++j)
        cells_[static_cast<size_t>(j) * grid + i].push_back(t);
  }
}

MeshLocator::Hit MeshLocator::locate(Complex p) const {
  const Mesh& m = *mesh_;
  auto bary = [&](int t, double& w0, double& w1, double& w2) {
    int a = m.triangles(t, 0), b = m.triangles(t, 1), c = m.triangles(t, 2);
    double ax = m.vertices(a, 0), ay = m.vertices(a, 1);
    double bx = m.vertices(b, 0), by = m.vertices(b, 1);
    double cx = m.vertices(c, 0), cy = m.vertices(c, 1);
    double det = (bx - ax) * (cy - ay) - (cx - ax) * (by - ay);
    w1 = ((p.real() - ax) * (cy - ay) - (cx - ax) * (p.imag() - ay)) / det;
    w2 = ((bx - ax) * (p.imag() - ay) - (p.real() - ax) * (by - ay)) / det;
    w0 = 1.0 - w1 - w2;
  };

  auto scan = [&](const std::vector<int>& candidates, Hit& best,
                  double& best_min) {
    for (int t : candidates) {
      double w0, w1, w2;
      bary(t, w0, w1, w2);
      double mn = std::min({w0, w1, w2});
      if (mn > best_min) {
        best_min = mn;
        best = {t, w0, w1, w2};
      }
      if (mn >= -1e-12) return true;
    }
    return false;
  };

  Hit best;
  double best_min = -1e30;
  int gi = std::clamp(static_cast<int>((p.real() - x0_) / dx_), 0, grid_ - 1);
  int gj = std::clamp(static_cast<int>((p.imag() - y0_) / dy_), 0, grid_ - 1);
  bool found =
      scan(cells_[static_cast<size_t>(gj) * grid_ + gi], best, best_min);
  if (!found) {
    // widen to the 3x3 neighborhood, then everything
    std::vector<int> cand;
    for (int i = std::max(0, gi - 1); i <= std::min(grid_ - 1, gi + 1); ++i)
      for (int j = std::max(0, gj - 1); j <= std::min(grid_ - 1, gj + 1); ++j)
        for (int t : cells_[static_cast<size_t>(j) * grid_ + i])
          cand.push_back(t);
    found = scan(cand, best, best_min);
  }
  if (!found && best_min < -1e-6) {
    std::vector<int> all(mesh_->triangle_count());
    for (int t = 0; t < mesh_->triangle_count(); ++t) all[t] = t;
    scan(all, best, best_min);
  }
  // clamp slightly-outside points onto the nearest triangle
  best.w0 = std::max(best.w0, 0.0);
  best.w1 = std::max(best.w1, 0.0);
  best.w2 = std::max(best.w2, 0.0);
  double s = best.w0 + best.w1 + best.w2;
  best.w0 /= s;
  best.w1 /= s;
  best.w2 /= s;
  return best;
}

}  // namespace fbmm
