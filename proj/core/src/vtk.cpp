#include "cdm/io.hpp"

#include <cstdio>
#include <fstream>

namespace cdm {

namespace {

std::ofstream open_vtk(const std::filesystem::path& file, const char* title) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET POLYDATA\n";
  return out;
}

void point(std::ofstream& out, Vec2 p) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.9g %.9g 0\n", p.x, p.y);
  out << buf;
}

}  // namespace

void write_cracks_vtk(const std::filesystem::path& file, const Model& model,
                      const SystemState& state) {
  const DualMesh& mesh = model.mesh();
  const std::vector<CrackEntry> cracks = crack_list(model, state);
  std::ofstream out = open_vtk(file, "crack openings");
  out << "POINTS " << 2 * cracks.size() << " double\n";
  for (const CrackEntry& c : cracks) {
    point(out, mesh.elements[c.element].facet_a);
    point(out, mesh.elements[c.element].facet_b);
  }
  out << "LINES " << cracks.size() << ' ' << 3 * cracks.size() << '\n';
  for (std::size_t k = 0; k < cracks.size(); ++k) out << "2 " << 2 * k << ' ' << 2 * k + 1 << '\n';
  out << "CELL_DATA " << cracks.size() << "\nSCALARS w_N double 1\nLOOKUP_TABLE default\n";
  char buf[64];
  for (const CrackEntry& c : cracks) {
    std::snprintf(buf, sizeof buf, "%.9g\n", c.w_N);
    out << buf;
  }
}

void write_mesh_vtk(const std::filesystem::path& file, const DualMesh& mesh) {
  std::ofstream out = open_vtk(file, "voronoi cells");
  std::size_t npts = 0;
  for (const MechNode& n : mesh.mech_nodes) npts += n.cell.size();
  out << "POINTS " << npts << " double\n";
  for (const MechNode& n : mesh.mech_nodes) {
    for (const Vec2 p : n.cell) point(out, p);
  }
  out << "POLYGONS " << mesh.mech_nodes.size() << ' ' << npts + mesh.mech_nodes.size() << '\n';
  std::size_t next = 0;
  for (const MechNode& n : mesh.mech_nodes) {
    out << n.cell.size();
    for (std::size_t k = 0; k < n.cell.size(); ++k) out << ' ' << next++;
    out << '\n';
  }
  out << "CELL_DATA " << mesh.mech_nodes.size() << "\nSCALARS phase int 1\nLOOKUP_TABLE default\n";
  for (const MechNode& n : mesh.mech_nodes) out << (n.physical ? 1 : 0) << '\n';
}

}  // namespace cdm
