#pragma once

#include "geometry.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace trefftz {

enum class FacetKind { interior, boundary };

/// Mesh facet: an edge in 2D, a point in 1D.
/// The stored unit normal points out of the first adjacent element,
/// which is always the one with the lower element id.
struct Facet {
  std::vector<int> vertex_ids;      // 2 ids in 2D, 1 id in 1D
  std::array<int, 2> adjacent{-1, -1}; // second is -1 on the boundary
  Vec2 unit_normal;
  double measure = 0.0;             // edge length; 1 for point facets
  FacetKind kind = FacetKind::boundary;

  bool is_boundary() const { return kind == FacetKind::boundary; }
};

struct Element {
  std::array<int, 3> vertex_ids{-1, -1, -1}; // 2 ids in 1D (third is -1)
  double measure = 0.0;   // area in 2D, length in 1D
  double diameter = 0.0;  // longest edge / interval length
  Vec2 centroid;
};

/// Simplicial mesh of intervals (dim 1) or triangles (dim 2).
/// Immutable after construction; refine() returns a new mesh.
class Mesh {
public:
  int dim = 2;
  std::vector<Vec2> vertices;
  std::vector<Element> elements;
  std::vector<Facet> facets;
  std::vector<int> boundary_facet_ids;
  double h_max = 0.0;

  int num_elements() const { return static_cast<int>(elements.size()); }
  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_facets() const { return static_cast<int>(facets.size()); }

  std::array<Vec2, 3> element_vertices(int k) const {
    const Element &e = elements[k];
    std::array<Vec2, 3> v{};
    for (int i = 0; i < dim + 1; ++i)
      v[i] = vertices[e.vertex_ids[i]];
    return v;
  }

  /// Plain-text dump for debugging: "dim nv ne", vertices, elements.
  void dump(std::ostream &os) const {
    os << dim << ' ' << num_vertices() << ' ' << num_elements() << '\n';
    for (const Vec2 &v : vertices) {
      os << v.x;
      if (dim == 2)
        os << ' ' << v.y;
      os << '\n';
    }
    for (const Element &e : elements) {
      for (int i = 0; i < dim + 1; ++i)
        os << (i ? " " : "") << e.vertex_ids[i];
      os << '\n';
    }
  }
};

namespace detail {

inline Element make_triangle(const std::vector<Vec2> &verts, int a, int b, int c) {
  Element e;
  e.vertex_ids = {a, b, c};
  const Vec2 &va = verts[a], &vb = verts[b], &vc = verts[c];
  e.measure = 0.5 * cross(vb - va, vc - va);
  if (e.measure <= 0.0)
    throw std::invalid_argument("mesh: non-positively-oriented triangle");
  e.centroid = (va + vb + vc) / 3.0;
  e.diameter = std::max({(vb - va).norm(), (vc - vb).norm(), (va - vc).norm()});
  return e;
}

inline Element make_interval(const std::vector<Vec2> &verts, int a, int b) {
  Element e;
  e.vertex_ids = {a, b, -1};
  e.measure = verts[b].x - verts[a].x;
  if (e.measure <= 0.0)
    throw std::invalid_argument("mesh: non-positive interval");
  e.centroid = (verts[a] + verts[b]) / 2.0;
  e.diameter = e.measure;
  return e;
}

/// Builds the facet list from element connectivity. 2D only.
inline void build_facets_2d(Mesh &m) {
  std::map<std::pair<int, int>, std::vector<int>> edge_map;
  for (int k = 0; k < m.num_elements(); ++k) {
    const auto &v = m.elements[k].vertex_ids;
    for (auto [a, b] : {std::pair{v[0], v[1]}, {v[1], v[2]}, {v[2], v[0]}}) {
      auto key = std::minmax(a, b);
      edge_map[{key.first, key.second}].push_back(k);
    }
  }
  m.facets.clear();
  m.boundary_facet_ids.clear();
  for (const auto &[key, adj] : edge_map) {
    Facet f;
    f.vertex_ids = {key.first, key.second};
    const Vec2 &va = m.vertices[key.first];
    const Vec2 &vb = m.vertices[key.second];
    Vec2 t = vb - va;
    f.measure = t.norm();
    Vec2 n{t.y / f.measure, -t.x / f.measure};
    int first = *std::min_element(adj.begin(), adj.end());
    // orient out of the lower-indexed adjacent element
    Vec2 mid = (va + vb) / 2.0;
    if (n.dot(mid - m.elements[first].centroid) < 0.0)
      n = n * -1.0;
    f.unit_normal = n;
    if (adj.size() == 2) {
      f.kind = FacetKind::interior;
      int second = adj[0] == first ? adj[1] : adj[0];
      f.adjacent = {first, second};
    } else if (adj.size() == 1) {
      f.kind = FacetKind::boundary;
      f.adjacent = {first, -1};
    } else {
      throw std::runtime_error("mesh: facet shared by more than 2 elements");
    }
    int id = static_cast<int>(m.facets.size());
    if (f.is_boundary())
      m.boundary_facet_ids.push_back(id);
    m.facets.push_back(std::move(f));
  }
}

inline void build_facets_1d(Mesh &m) {
  // facet i sits at vertex i; elements are ordered left to right
  m.facets.clear();
  m.boundary_facet_ids.clear();
  int ne = m.num_elements();
  for (int i = 0; i <= ne; ++i) {
    Facet f;
    f.vertex_ids = {i};
    f.measure = 1.0;
    if (i == 0) {
      f.kind = FacetKind::boundary;
      f.adjacent = {0, -1};
      f.unit_normal = {-1.0, 0.0};
    } else if (i == ne) {
      f.kind = FacetKind::boundary;
      f.adjacent = {ne - 1, -1};
      f.unit_normal = {1.0, 0.0};
    } else {
      f.kind = FacetKind::interior;
      f.adjacent = {i - 1, i}; // normal +1 out of the left element
      f.unit_normal = {1.0, 0.0};
    }
    if (f.is_boundary())
      m.boundary_facet_ids.push_back(i);
    m.facets.push_back(std::move(f));
  }
}

} // namespace detail

/// Criss-cross triangulation of (0,1)^2: n x n squares, each split into two
/// triangles along the (lower-left, upper-right) diagonal. h_max = sqrt(2)/n.
inline Mesh unit_square_mesh(int n) {
  if (n < 1)
    throw std::invalid_argument("unit_square_mesh: n must be >= 1");
  Mesh m;
  m.dim = 2;
  auto vid = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      m.vertices.push_back({double(i) / n, double(j) / n});
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      int a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
      m.elements.push_back(detail::make_triangle(m.vertices, a, b, c));
      m.elements.push_back(detail::make_triangle(m.vertices, a, c, d));
    }
  detail::build_facets_2d(m);
  m.h_max = 0.0;
  for (const Element &e : m.elements)
    m.h_max = std::max(m.h_max, e.diameter);
  return m;
}

/// n equal elements on [a,b].
inline Mesh interval_mesh(double a, double b, int n) {
  if (!(a < b))
    throw std::invalid_argument("interval_mesh: requires a < b");
  if (n < 1)
    throw std::invalid_argument("interval_mesh: n must be >= 1");
  Mesh m;
  m.dim = 1;
  for (int i = 0; i <= n; ++i)
    m.vertices.push_back({a + (b - a) * double(i) / n, 0.0});
  for (int i = 0; i < n; ++i)
    m.elements.push_back(detail::make_interval(m.vertices, i, i + 1));
  detail::build_facets_1d(m);
  m.h_max = 0.0;
  for (const Element &e : m.elements)
    m.h_max = std::max(m.h_max, e.diameter);
  return m;
}

/// Red refinement: triangles split into 4 congruent children via edge
/// midpoints, intervals into 2. h_max halves exactly.
inline Mesh refine(const Mesh &mesh) {
  Mesh m;
  m.dim = mesh.dim;
  m.vertices = mesh.vertices;
  if (mesh.dim == 1) {
    // keep vertices sorted left to right so facet construction stays valid
    std::vector<Vec2> vs;
    for (const Element &e : mesh.elements) {
      vs.push_back(mesh.vertices[e.vertex_ids[0]]);
      vs.push_back((mesh.vertices[e.vertex_ids[0]] + mesh.vertices[e.vertex_ids[1]]) / 2.0);
    }
    vs.push_back(mesh.vertices[mesh.elements.back().vertex_ids[1]]);
    m.vertices = vs;
    for (int i = 0; i + 1 < static_cast<int>(vs.size()); ++i)
      m.elements.push_back(detail::make_interval(m.vertices, i, i + 1));
    detail::build_facets_1d(m);
  } else {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid_id = [&](int a, int b) {
      auto key = std::minmax(a, b);
      auto it = midpoint.find({key.first, key.second});
      if (it != midpoint.end())
        return it->second;
      int id = static_cast<int>(m.vertices.size());
      m.vertices.push_back((m.vertices[a] + m.vertices[b]) / 2.0);
      midpoint[{key.first, key.second}] = id;
      return id;
    };
    for (const Element &e : mesh.elements) {
      int v0 = e.vertex_ids[0], v1 = e.vertex_ids[1], v2 = e.vertex_ids[2];
      int m01 = mid_id(v0, v1), m12 = mid_id(v1, v2), m20 = mid_id(v2, v0);
      m.elements.push_back(detail::make_triangle(m.vertices, v0, m01, m20));
      m.elements.push_back(detail::make_triangle(m.vertices, v1, m12, m01));
      m.elements.push_back(detail::make_triangle(m.vertices, v2, m20, m12));
      m.elements.push_back(detail::make_triangle(m.vertices, m01, m12, m20));
    }
    detail::build_facets_2d(m);
  }
  m.h_max = mesh.h_max / 2.0;
  return m;
}

struct FacetTrace {
  int element_plus;   // first adjacent element; normal points out of it
  int element_minus;  // -1 on boundary facets
  Vec2 normal;
};

/// Adjacency and orientation for evaluating jumps and averages on a facet.
inline FacetTrace facet_trace_pair(int facet_id, const Mesh &mesh) {
  if (facet_id < 0 || facet_id >= mesh.num_facets())
    throw std::out_of_range("facet_trace_pair: unknown facet id");
  const Facet &f = mesh.facets[facet_id];
  return {f.adjacent[0], f.adjacent[1], f.unit_normal};
}

} // namespace trefftz
