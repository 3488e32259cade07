#include "cdm/mesh.hpp"

#include "cdm/predicates.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <unordered_map>

namespace cdm {

std::pair<Vec2, Vec2> facet_basis(Vec2 xi, Vec2 xj) {
  const Vec2 n = normalized(xj - xi);
  return {n, perp(n)};
}

GeneratorSet DualMesh::generators() const {
  GeneratorSet out;
  out.reserve(mech_nodes.size());
  for (const MechNode& m : mech_nodes) {
    Generator g;
    g.pos = m.pos;
    g.kind = m.kind;
    g.curve = m.curve;
    g.param = m.param;
    g.physical = m.physical;
    g.fixed = m.fixed;
    g.elastic = m.elastic;
    out.push_back(g);
  }
  return out;
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::uint64_t edge_key(int a, int b) {
  const auto lo = static_cast<std::uint32_t>(std::min(a, b));
  const auto hi = static_cast<std::uint32_t>(std::max(a, b));
  return (static_cast<std::uint64_t>(lo) << 32) | hi;
}

struct Chains {
  std::vector<BoundarySegment> segments;
};

// Boundary segments in domain orientation: the domain lies to the left of
// a -> b for outer segments and to the right for hole segments.
std::vector<BoundarySegment> boundary_segments(const GeneratorSet& g, const Domain& domain) {
  std::vector<BoundarySegment> segs;
  std::vector<int> outer;
  std::vector<std::vector<int>> holes(domain.holes.size());
  for (int i = 0; i < static_cast<int>(g.size()); ++i) {
    if (g[i].kind == PointKind::Outer) outer.push_back(i);
    if (g[i].kind == PointKind::Hole) holes.at(g[i].curve).push_back(i);
  }
  auto by_param = [&](int a, int b) { return g[a].param < g[b].param; };
  std::sort(outer.begin(), outer.end(), by_param);
  const double perimeter = domain.perimeter();
  for (std::size_t k = 0; k < outer.size(); ++k) {
    const int a = outer[k];
    const int b = outer[(k + 1) % outer.size()];
    double s0 = g[a].param;
    double s1 = g[b].param;
    if (s1 <= s0) s1 += perimeter;
    BoundarySegment s;
    s.a = a;
    s.b = b;
    s.kind = PointKind::Outer;
    s.curve = domain.outer_edge_at(0.5 * (s0 + s1));
    segs.push_back(s);
  }
  for (std::size_t h = 0; h < holes.size(); ++h) {
    auto& ids = holes[h];
    if (ids.size() < 3) {
      throw GeometryError("hole " + std::to_string(h) + " needs at least 3 generator points");
    }
    std::sort(ids.begin(), ids.end(), by_param);
    for (std::size_t k = 0; k < ids.size(); ++k) {
      BoundarySegment s;
      s.a = ids[k];
      s.b = ids[(k + 1) % ids.size()];
      s.kind = PointKind::Hole;
      s.curve = static_cast<int>(h);
      segs.push_back(s);
    }
  }
  return segs;
}

Generator split_point(const Generator& a, const Generator& b, const Domain& domain) {
  Generator g;
  g.kind = a.kind;
  g.curve = a.curve;
  g.physical = a.physical && b.physical;
  if (a.kind == PointKind::Outer) {
    const double perimeter = domain.perimeter();
    double s1 = b.param;
    if (s1 <= a.param) s1 += perimeter;
    g.param = std::fmod(0.5 * (a.param + s1), perimeter);
    g.pos = domain.outer_point(g.param);
  } else {
    const CircularHole& c = domain.holes.at(a.curve);
    double t1 = b.param;
    if (t1 <= a.param) t1 += kTwoPi;
    g.param = std::fmod(0.5 * (a.param + t1), kTwoPi);
    g.pos = {c.center.x + c.radius * std::cos(g.param), c.center.y + c.radius * std::sin(g.param)};
  }
  return g;
}

// Conservative containment of a circle in a union of disks: points of a
// slightly inflated circle are tested, together with its center.
bool circle_in_zones(Vec2 c, double r, const std::vector<SamplingRegion::Disk>& zones) {
  const auto covered = [&](Vec2 p) {
    return std::any_of(zones.begin(), zones.end(),
                       [&](const SamplingRegion::Disk& d) { return distance2(p, d.center) < d.radius * d.radius; });
  };
  if (!covered(c)) return false;
  constexpr int kSamples = 32;
  const double rr = 1.02 * r;
  for (int k = 0; k < kSamples; ++k) {
    const double a = kTwoPi * k / kSamples;
    if (!covered({c.x + rr * std::cos(a), c.y + rr * std::sin(a)})) return false;
  }
  return true;
}

struct DirectedEdgeMap {
  // directed edge (a, b) -> triangle index having it in CCW order
  std::unordered_map<std::uint64_t, int> tri_of;
  static std::uint64_t key(int a, int b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
  }
  void build(const std::vector<TriangleIndices>& tris) {
    tri_of.clear();
    tri_of.reserve(tris.size() * 3);
    for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
      for (int k = 0; k < 3; ++k) tri_of[key(tris[t][k], tris[t][(k + 1) % 3])] = t;
    }
  }
  int find(int a, int b) const {
    const auto it = tri_of.find(key(a, b));
    return it == tri_of.end() ? -1 : it->second;
  }
};

int apex(const TriangleIndices& t, int a, int b) {
  for (int v : t) {
    if (v != a && v != b) return v;
  }
  return -1;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) std::swap(a, b);
    parent[a] = b;
  }
};

}  // namespace

DualMesh build_dual_mesh(GeneratorSet gens, const Domain& domain, BuildOptions options) {
  domain.validate();
  if (gens.size() < 3) throw GeometryError("dual mesh needs at least 3 generator points");
  {
    bool turn = false;
    for (std::size_t i = 2; i < gens.size() && !turn; ++i) {
      turn = orient2d(gens[0].pos, gens[1].pos, gens[i].pos) != 0.0;
    }
    if (!turn) throw GeometryError("generator points are collinear");
  }
  for (const Generator& g : gens) {
    if (g.kind == PointKind::Interior && !domain.contains(g.pos)) {
      throw GeometryError("interior generator point lies outside the domain");
    }
  }
  const bool all_physical =
      std::all_of(gens.begin(), gens.end(), [](const Generator& g) { return g.physical; });
  {
    const std::vector<double> acc = domain.outer_arclengths();
    for (std::size_t i = 0; i < domain.outer.size(); ++i) {
      const Vec2 c = domain.outer[i];
      auto it = std::find_if(gens.begin(), gens.end(),
                             [&](const Generator& g) { return g.pos == c; });
      if (it == gens.end()) {
        Generator g;
        g.pos = c;
        g.kind = PointKind::Outer;
        g.param = acc[i];
        g.fixed = true;
        g.physical = all_physical;
        gens.push_back(g);
      } else {
        it->kind = PointKind::Outer;
        it->param = acc[i];
        it->fixed = true;
      }
    }
  }

  // Conformity: every boundary segment must be a Delaunay edge whose
  // domain-side apex sees it under an angle below 90 degrees.
  std::vector<TriangleIndices> tris;
  std::vector<BoundarySegment> segs;
  DirectedEdgeMap dmap;
  for (int round = 0;; ++round) {
    if (round >= options.max_conformity_rounds) {
      throw GeometryError("boundary conformity did not converge");
    }
    segs = boundary_segments(gens, domain);
    const std::vector<Vec2> pos = positions(gens);
    tris = DelaunayTriangulation(pos).triangles();
    dmap.build(tris);
    std::vector<Generator> added;
    for (const BoundarySegment& s : segs) {
      const bool hole = s.kind == PointKind::Hole;
      const int t = hole ? dmap.find(s.b, s.a) : dmap.find(s.a, s.b);
      bool split = t < 0;
      if (!split) {
        const int v = apex(tris[t], s.a, s.b);
        split = dot(pos[s.a] - pos[v], pos[s.b] - pos[v]) < 0.0;
      }
      if (split) added.push_back(split_point(gens[s.a], gens[s.b], domain));
    }
    if (added.empty()) break;
    gens.insert(gens.end(), added.begin(), added.end());
  }

  const int ng = static_cast<int>(gens.size());
  const std::vector<Vec2> X = positions(gens);

  // Flood fill the triangles inside the domain, bounded by the segments.
  std::vector<char> keep(tris.size(), 0);
  {
    std::unordered_map<std::uint64_t, int> seg_of;
    for (int k = 0; k < static_cast<int>(segs.size()); ++k) {
      seg_of[edge_key(segs[k].a, segs[k].b)] = k;
    }
    std::vector<int> stack;
    for (const BoundarySegment& s : segs) {
      const int t = s.kind == PointKind::Hole ? dmap.find(s.b, s.a) : dmap.find(s.a, s.b);
      if (t >= 0 && !keep[t]) {
        keep[t] = 1;
        stack.push_back(t);
      }
    }
    while (!stack.empty()) {
      const int t = stack.back();
      stack.pop_back();
      for (int k = 0; k < 3; ++k) {
        const int a = tris[t][k];
        const int b = tris[t][(k + 1) % 3];
        if (seg_of.count(edge_key(a, b))) continue;
        const int nb = dmap.find(b, a);
        if (nb >= 0 && !keep[nb]) {
          keep[nb] = 1;
          stack.push_back(nb);
        }
      }
    }
  }

  DualMesh mesh;
  mesh.domain = domain;
  const double thick = domain.thickness;

  std::vector<int> tri_node(tris.size(), -1);
  std::vector<TransportNode> raw_nodes;
  std::vector<Vec2> cc(tris.size());
  for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
    if (!keep[t]) continue;
    const auto& v = tris[t];
    mesh.triangles.push_back(v);
    cc[t] = circumcenter(X[v[0]], X[v[1]], X[v[2]]);
    const double area = 0.5 * cross(X[v[1]] - X[v[0]], X[v[2]] - X[v[0]]);
    mesh.discrete_area += area;
    tri_node[t] = static_cast<int>(raw_nodes.size());
    raw_nodes.push_back({cc[t], area * thick, PointKind::Interior, -1});
  }
  std::unordered_map<std::uint64_t, int> seg_node;
  for (BoundarySegment& s : segs) {
    s.transport_node = static_cast<int>(raw_nodes.size());
    seg_node[edge_key(s.a, s.b)] = s.transport_node;
    raw_nodes.push_back({0.5 * (X[s.a] + X[s.b]), 0.0, s.kind, s.curve});
  }

  // Undirected edges of kept triangles, in sorted order for determinism.
  std::map<std::uint64_t, std::pair<int, int>> edges;  // key -> (tri left of min->max, other)
  for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
    if (!keep[t]) continue;
    for (int k = 0; k < 3; ++k) {
      const int a = tris[t][k];
      const int b = tris[t][(k + 1) % 3];
      auto& slot = edges.try_emplace(edge_key(a, b), -1, -1).first->second;
      if (a < b) {
        slot.first = t;
      } else {
        slot.second = t;
      }
    }
  }

  UnionFind uf(raw_nodes.size());
  struct RawFacet {
    int i, j;
    int p, q;
    Vec2 fa, fb;
    int t1, t2;
  };
  std::vector<RawFacet> facets;
  facets.reserve(edges.size());
  for (const auto& [key, pair] : edges) {
    const int i = static_cast<int>(key >> 32);
    const int j = static_cast<int>(key & 0xffffffffu);
    RawFacet f{i, j, -1, -1, {}, {}, pair.first, pair.second};
    if (pair.first >= 0 && pair.second >= 0) {
      f.p = tri_node[pair.first];
      f.q = tri_node[pair.second];
      f.fa = cc[pair.first];
      f.fb = cc[pair.second];
    } else {
      const auto it = seg_node.find(key);
      if (it == seg_node.end()) {
        throw GeometryError("kept triangulation has an open edge that is not a boundary segment");
      }
      const int t = pair.first >= 0 ? pair.first : pair.second;
      f.p = tri_node[t];
      f.q = it->second;
      f.fa = cc[t];
      f.fb = raw_nodes[f.q].pos;
    }
    const double l = distance(X[i], X[j]);
    const double h = distance(f.fa, f.fb);
    if (h <= options.degenerate_facet_ratio * l || h * thick < 1e-300) {
      uf.unite(f.p, f.q);
      continue;
    }
    facets.push_back(f);
  }

  // Compact transport nodes after merging degenerate facets.
  std::vector<int> compact(raw_nodes.size(), -1);
  for (int k = 0; k < static_cast<int>(raw_nodes.size()); ++k) {
    const int r = uf.find(k);
    if (compact[r] < 0) {
      compact[r] = static_cast<int>(mesh.transport_nodes.size());
      mesh.transport_nodes.push_back(raw_nodes[r]);
      mesh.transport_nodes.back().volume = 0.0;
    }
    compact[k] = compact[r];
    TransportNode& node = mesh.transport_nodes[compact[k]];
    node.volume += raw_nodes[k].volume;
    if (raw_nodes[k].boundary != PointKind::Interior && node.boundary == PointKind::Interior) {
      node.boundary = raw_nodes[k].boundary;
      node.curve = raw_nodes[k].curve;
      node.pos = raw_nodes[k].pos;
    }
  }
  for (BoundarySegment& s : segs) s.transport_node = compact[s.transport_node];

  mesh.elements.reserve(facets.size());
  mesh.conduits.reserve(facets.size());
  for (const RawFacet& f : facets) {
    MechElement e;
    e.i = f.i;
    e.j = f.j;
    e.length = distance(X[f.i], X[f.j]);
    const auto [n, m] = facet_basis(X[f.i], X[f.j]);
    e.n = n;
    e.m = m;
    e.facet_a = f.fa;
    e.facet_b = f.fb;
    e.centroid = 0.5 * (f.fa + f.fb);
    e.area = distance(f.fa, f.fb) * thick;
    e.inelastic = gens[f.i].physical && gens[f.j].physical && !gens[f.i].elastic &&
                  !gens[f.j].elastic;
    if (e.inelastic && !options.stable_zones.empty()) {
      for (const int t : {f.t1, f.t2}) {
        if (t >= 0 && !circle_in_zones(cc[t], distance(cc[t], X[tris[t][0]]), options.stable_zones)) {
          e.inelastic = false;
        }
      }
    }
    e.conduit = static_cast<int>(mesh.conduits.size());

    Conduit c;
    c.p = compact[f.p];
    c.q = compact[f.q];
    c.length = distance(f.fa, f.fb);
    c.area = e.length * thick;
    c.element = static_cast<int>(mesh.elements.size());
    mesh.elements.push_back(e);
    mesh.conduits.push_back(c);
  }

  // Cells: walk the fan of kept triangles around each generator.
  struct FanEntry {
    int a, t, b;
  };
  std::vector<std::vector<FanEntry>> fans(ng);
  for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
    if (!keep[t]) continue;
    for (int k = 0; k < 3; ++k) {
      fans[tris[t][k]].push_back({tris[t][(k + 1) % 3], t, tris[t][(k + 2) % 3]});
    }
  }
  mesh.mech_nodes.resize(ng);
  for (int i = 0; i < ng; ++i) {
    MechNode& node = mesh.mech_nodes[i];
    node.pos = X[i];
    node.kind = gens[i].kind;
    node.curve = gens[i].curve;
    node.param = gens[i].param;
    node.physical = gens[i].physical;
    node.fixed = gens[i].fixed;
    node.elastic = gens[i].elastic;
    auto& fan = fans[i];
    if (fan.empty()) {
      throw GeometryError("generator point " + std::to_string(i) + " has no cell in the domain");
    }
    std::unordered_map<int, std::size_t> from_a;
    std::vector<char> is_b(ng, 0);
    for (std::size_t k = 0; k < fan.size(); ++k) {
      from_a[fan[k].a] = k;
    }
    std::size_t start = 0;
    bool open = false;
    {
      std::unordered_map<int, int> b_count;
      for (const FanEntry& f : fan) b_count[f.b]++;
      for (std::size_t k = 0; k < fan.size(); ++k) {
        if (!b_count.count(fan[k].a)) {
          start = k;
          open = true;
          break;
        }
      }
    }
    std::vector<Vec2> poly;
    if (open) {
      poly.push_back(X[i]);
      poly.push_back(0.5 * (X[i] + X[fan[start].a]));
    }
    std::size_t k = start;
    int last_b = -1;
    for (std::size_t steps = 0; steps < fan.size(); ++steps) {
      poly.push_back(cc[fan[k].t]);
      last_b = fan[k].b;
      const auto it = from_a.find(last_b);
      if (it == from_a.end()) break;
      k = it->second;
      if (k == start) break;
    }
    if (open) {
      poly.push_back(0.5 * (X[i] + X[last_b]));
      node.boundary_length = 0.5 * (distance(X[i], X[fan[start].a]) + distance(X[i], X[last_b]));
    }
    const double a = signed_area(poly);
    if (!(a > 0.0)) {
      throw GeometryError("cell of generator " + std::to_string(i) + " has non-positive area");
    }
    node.volume = a * thick;
    node.centroid = polygon_centroid(poly);
    node.cell = std::move(poly);
  }

  std::vector<int> counts(ng + 1, 0);
  for (const MechElement& e : mesh.elements) {
    counts[e.i + 1]++;
    counts[e.j + 1]++;
  }
  std::partial_sum(counts.begin(), counts.end(), counts.begin());
  mesh.node_element_offsets = counts;
  mesh.node_element_list.assign(counts.back(), -1);
  std::vector<int> fill(counts.begin(), counts.end() - 1);
  for (int e = 0; e < static_cast<int>(mesh.elements.size()); ++e) {
    mesh.node_element_list[fill[mesh.elements[e].i]++] = e;
    mesh.node_element_list[fill[mesh.elements[e].j]++] = e;
  }
  mesh.segments = std::move(segs);
  return mesh;
}

}  // namespace cdm
