#pragma once

#include "cdm/delaunay.hpp"
#include "cdm/domain.hpp"
#include "cdm/sampling.hpp"

#include <array>
#include <vector>

namespace cdm {

/// Rigid Voronoi cell carrying two translations and one rotation.
struct MechNode {
  Vec2 pos;
  PointKind kind = PointKind::Interior;
  int curve = -1;
  double param = 0.0;
  bool physical = false;
  bool fixed = false;
  bool elastic = false;
  /// Clipped cell area times thickness, m^3.
  double volume = 0.0;
  Vec2 centroid;
  /// Length of the cell boundary lying on the domain boundary, m.
  double boundary_length = 0.0;
  /// Clipped Voronoi cell, counter-clockwise.
  std::vector<Vec2> cell;
};

/// Contact between two cells across their shared Voronoi facet.
struct MechElement {
  int i = -1;
  int j = -1;
  /// Generator distance |x_j - x_i|, m.
  double length = 0.0;
  /// Facet length times thickness, m^2.
  double area = 0.0;
  /// Facet midpoint (integration point).
  Vec2 centroid;
  /// Unit normal from i to j and its +90 degree rotation.
  Vec2 n;
  Vec2 m;
  /// Facet end points; these are the conduit's transport nodes.
  Vec2 facet_a;
  Vec2 facet_b;
  int conduit = -1;
  /// Both cells belong to the physical discretization, so the damage law is
  /// active. Contacts touching a coarse cell stay linear elastic.
  bool inelastic = false;
};

/// Pressure node at a Voronoi vertex, or at the midpoint of a boundary
/// segment where a facet meets the domain boundary.
struct TransportNode {
  Vec2 pos;
  /// Delaunay triangle area times thickness, m^3; zero for boundary nodes.
  double volume = 0.0;
  PointKind boundary = PointKind::Interior;
  /// Outer edge index (Outer) or hole index (Hole).
  int curve = -1;
};

/// Flow channel along a Voronoi edge.
struct Conduit {
  int p = -1;
  int q = -1;
  /// Conduit length |x_q - x_p|, m.
  double length = 0.0;
  /// Dual Delaunay edge length times thickness, m^2.
  double area = 0.0;
  int element = -1;
};

/// Boundary segment between consecutive boundary generators.
struct BoundarySegment {
  int a = -1;
  int b = -1;
  PointKind kind = PointKind::Outer;
  int curve = -1;
  int transport_node = -1;
};

/// Voronoi/Delaunay dual discretization. Immutable once built; element k and
/// conduit k are dual to each other.
struct DualMesh {
  Domain domain;
  std::vector<MechNode> mech_nodes;
  std::vector<MechElement> elements;
  std::vector<TransportNode> transport_nodes;
  std::vector<Conduit> conduits;
  std::vector<BoundarySegment> segments;
  /// Kept Delaunay triangles (CCW generator indices).
  std::vector<TriangleIndices> triangles;
  /// Incident elements per mechanical node (CSR).
  std::vector<int> node_element_offsets;
  std::vector<int> node_element_list;
  /// Area of the polygon through the boundary generators, m^2.
  double discrete_area = 0.0;

  std::size_t dof_count() const { return 3 * mech_nodes.size() + transport_nodes.size(); }
  std::span<const int> node_elements(int node) const {
    return {node_element_list.data() + node_element_offsets[node],
            node_element_list.data() + node_element_offsets[node + 1]};
  }
  /// The generator set the mesh was built from, including any boundary
  /// points inserted for conformity.
  GeneratorSet generators() const;
};

struct BuildOptions {
  /// Facets shorter than this fraction of their element length are treated
  /// as cocircular degeneracies and merged away.
  double degenerate_facet_ratio = 1e-9;
  int max_conformity_rounds = 64;
  /// Regions whose point set never changes again. When given, a contact
  /// between physical points is inelastic only if the circumcircles of its
  /// Delaunay triangles lie inside these regions, so later insertions
  /// cannot remove it.
  std::vector<SamplingRegion::Disk> stable_zones;
};

/// Builds the dual mesh. Boundary segments are made Delaunay and
/// non-encroached by midpoint insertion before the cells are formed, which
/// keeps every Voronoi vertex inside the domain.
DualMesh build_dual_mesh(GeneratorSet points, const Domain& domain, BuildOptions options = {});

/// Orthonormal local basis of an element: n along x_j - x_i, m = rot90(n).
std::pair<Vec2, Vec2> facet_basis(Vec2 xi, Vec2 xj);

}  // namespace cdm
