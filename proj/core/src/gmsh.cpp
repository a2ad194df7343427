#include "kdg/gmsh.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "kdg/error.hpp"

namespace kdg {
namespace {

constexpr int kGmshTriangle = 2;
constexpr int kGmshTetrahedron = 4;
constexpr int kGmshTetrahedron10 = 11;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

class LineCursor {
 public:
  explicit LineCursor(std::istream& in) {
    std::string line;
    while (std::getline(in, line)) {
      line = trim(line);
      if (!line.empty()) lines_.push_back(std::move(line));
    }
  }

  bool done() const { return pos_ >= lines_.size(); }

  const std::string& peek() const { return lines_.at(pos_); }

  const std::string& next(const char* context) {
    if (done()) throw MeshError(std::string("unexpected end of file in ") + context);
    return lines_[pos_++];
  }

  std::istringstream tokens(const char* context) { return std::istringstream(next(context)); }

  void expect(const std::string& marker) {
    const std::string& line = next(marker.c_str());
    if (line != marker) throw MeshError("expected " + marker + " but found '" + line + "'");
  }

  void skip_section(const std::string& name) {
    const std::string end = "$End" + name;
    while (next(name.c_str()) != end) {
    }
  }

 private:
  std::vector<std::string> lines_;
  std::size_t pos_ = 0;
};

template <typename... T>
void read_fields(std::istringstream& ss, const char* context, T&... out) {
  if (!(ss >> ... >> out)) throw MeshError(std::string("malformed line in ") + context);
}

using EntityKey = std::pair<int, int>;  // (dimension, entity tag)

void parse_entities(LineCursor& cur, std::map<EntityKey, int>& physical) {
  auto head = cur.tokens("$Entities");
  std::size_t counts[4] = {0, 0, 0, 0};
  read_fields(head, "$Entities header", counts[0], counts[1], counts[2], counts[3]);
  for (int dim = 0; dim < 4; ++dim) {
    for (std::size_t i = 0; i < counts[dim]; ++i) {
      auto ss = cur.tokens("$Entities");
      int tag = 0;
      double box[6];
      read_fields(ss, "$Entities", tag);
      const int n_coords = dim == 0 ? 3 : 6;
      for (int c = 0; c < n_coords; ++c) read_fields(ss, "$Entities", box[c]);
      std::size_t n_phys = 0;
      read_fields(ss, "$Entities", n_phys);
      int first = 0;
      for (std::size_t p = 0; p < n_phys; ++p) {
        int t = 0;
        read_fields(ss, "$Entities", t);
        if (p == 0) first = t;
      }
      physical[{dim, tag}] = first;
    }
  }
  cur.expect("$EndEntities");
}

}  // namespace

Mesh parse_gmsh(std::istream& in) {
  LineCursor cur(in);
  bool have_format = false;
  bool have_nodes = false;
  bool have_elements = false;
  std::map<EntityKey, int> physical;
  std::vector<Vec3> vertices;
  std::unordered_map<long long, int> node_index;
  std::vector<std::array<int, 4>> tets;
  std::vector<int> tet_tags;
  std::vector<long long> tet_element_tags;
  std::vector<BoundaryTriangle> triangles;

  auto physical_tag = [&](int dim, int entity) {
    auto it = physical.find({dim, entity});
    return it == physical.end() ? 0 : it->second;
  };
  auto lookup_node = [&](long long tag) {
    auto it = node_index.find(tag);
    if (it == node_index.end()) throw MeshError("element references unknown node " + std::to_string(tag));
    return it->second;
  };

  while (!cur.done()) {
    const std::string header = cur.next("file");
    if (header.empty() || header[0] != '$') throw MeshError("malformed section header '" + header + "'");
    const std::string name = header.substr(1);

    if (name == "MeshFormat") {
      auto ss = cur.tokens("$MeshFormat");
      double version = 0;
      int file_type = -1;
      int data_size = 0;
      read_fields(ss, "$MeshFormat", version, file_type, data_size);
      if (version < 4.1 || version >= 5.0) {
        throw MeshError("unsupported MSH version " + std::to_string(version) + " (need 4.1)");
      }
      if (file_type != 0) throw MeshError("binary MSH files are not supported");
      cur.expect("$EndMeshFormat");
      have_format = true;
    } else if (name == "PhysicalNames") {
      auto ss = cur.tokens("$PhysicalNames");
      std::size_t n = 0;
      read_fields(ss, "$PhysicalNames", n);
      for (std::size_t i = 0; i < n; ++i) cur.next("$PhysicalNames");
      cur.expect("$EndPhysicalNames");
    } else if (name == "Entities") {
      parse_entities(cur, physical);
    } else if (name == "Nodes") {
      if (!have_format) throw MeshError("$Nodes before $MeshFormat");
      auto head = cur.tokens("$Nodes");
      std::size_t n_blocks = 0, n_nodes = 0;
      long long min_tag = 0, max_tag = 0;
      read_fields(head, "$Nodes header", n_blocks, n_nodes, min_tag, max_tag);
      vertices.reserve(n_nodes);
      for (std::size_t b = 0; b < n_blocks; ++b) {
        auto bh = cur.tokens("$Nodes block");
        int dim = 0, entity = 0, parametric = 0;
        std::size_t count = 0;
        read_fields(bh, "$Nodes block header", dim, entity, parametric, count);
        std::vector<long long> tags(count);
        for (auto& t : tags) {
          auto ts = cur.tokens("$Nodes tags");
          read_fields(ts, "$Nodes tags", t);
        }
        for (std::size_t i = 0; i < count; ++i) {
          auto cs = cur.tokens("$Nodes coordinates");
          Vec3 x;
          read_fields(cs, "$Nodes coordinates", x[0], x[1], x[2]);
          node_index[tags[i]] = static_cast<int>(vertices.size());
          vertices.push_back(x);
        }
      }
      if (vertices.size() != n_nodes) throw MeshError("$Nodes count does not match its header");
      cur.expect("$EndNodes");
      have_nodes = true;
    } else if (name == "Elements") {
      if (!have_nodes) throw MeshError("$Elements before $Nodes");
      auto head = cur.tokens("$Elements");
      std::size_t n_blocks = 0, n_elements = 0;
      long long min_tag = 0, max_tag = 0;
      read_fields(head, "$Elements header", n_blocks, n_elements, min_tag, max_tag);
      std::size_t seen = 0;
      for (std::size_t b = 0; b < n_blocks; ++b) {
        auto bh = cur.tokens("$Elements block");
        int dim = 0, entity = 0, type = 0;
        std::size_t count = 0;
        read_fields(bh, "$Elements block header", dim, entity, type, count);
        if (type == kGmshTetrahedron10) {
          throw MeshError("curved or second-order tetrahedra are not supported");
        }
        const int tag = physical_tag(dim, entity);
        for (std::size_t i = 0; i < count; ++i) {
          auto es = cur.tokens("$Elements");
          long long etag = 0;
          read_fields(es, "$Elements", etag);
          if (type == kGmshTetrahedron) {
            std::array<int, 4> ids{};
            for (auto& id : ids) {
              long long n = 0;
              read_fields(es, "$Elements tetrahedron", n);
              id = lookup_node(n);
            }
            tets.push_back(ids);
            tet_tags.push_back(tag);
            tet_element_tags.push_back(etag);
          } else if (type == kGmshTriangle) {
            BoundaryTriangle tri;
            for (auto& id : tri.vertex_ids) {
              long long n = 0;
              read_fields(es, "$Elements triangle", n);
              id = lookup_node(n);
            }
            tri.tag = tag;
            triangles.push_back(tri);
          }
        }
        seen += count;
      }
      if (seen != n_elements) throw MeshError("$Elements count does not match its header");
      cur.expect("$EndElements");
      have_elements = true;
    } else {
      cur.skip_section(name);
    }
  }
  if (!have_format) throw MeshError("missing $MeshFormat section");
  if (!have_nodes || !have_elements) throw MeshError("missing $Nodes or $Elements section");
  if (tets.empty()) throw MeshError("mesh contains no tetrahedra");
  // Cells are numbered by ascending element tag, independent of block order.
  std::vector<std::size_t> order(tets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return tet_element_tags[a] < tet_element_tags[b]; });
  std::vector<std::array<int, 4>> sorted_tets(tets.size());
  std::vector<int> sorted_tags(tets.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    sorted_tets[i] = tets[order[i]];
    sorted_tags[i] = tet_tags[order[i]];
  }
  return Mesh::build(std::move(vertices), std::move(sorted_tets), std::move(sorted_tags), triangles);
}

void write_gmsh(const Mesh& mesh, std::ostream& out) {
  // One volume entity per cell tag and one surface entity per boundary tag.
  std::map<int, int> volume_entity;
  for (const auto& c : mesh.cells()) volume_entity.emplace(c.physical_tag, 0);
  int next = 1;
  for (auto& [tag, entity] : volume_entity) entity = next++;
  std::map<int, std::vector<int>> surface_faces;
  for (int f = 0; f < mesh.num_faces(); ++f) {
    if (mesh.face(f).is_boundary()) surface_faces[mesh.face(f).boundary_tag].push_back(f);
  }
  std::map<int, int> surface_entity;
  next = 1;
  for (const auto& [tag, faces] : surface_faces) surface_entity[tag] = next++;

  const auto phys = [](int tag) { return tag == 0 ? std::string("0") : "1 " + std::to_string(tag); };

  out << std::setprecision(17);
  out << "$MeshFormat\n4.1 0 8\n$EndMeshFormat\n";
  out << "$Entities\n0 0 " << surface_entity.size() << ' ' << volume_entity.size() << '\n';
  const Vec3& lo = mesh.bbox_min();
  const Vec3& hi = mesh.bbox_max();
  const auto box = [&] {
    std::ostringstream ss;
    ss << std::setprecision(17) << lo[0] << ' ' << lo[1] << ' ' << lo[2] << ' ' << hi[0] << ' ' << hi[1]
       << ' ' << hi[2];
    return ss.str();
  }();
  for (const auto& [tag, entity] : surface_entity) out << entity << ' ' << box << ' ' << phys(tag) << " 0\n";
  for (const auto& [tag, entity] : volume_entity) out << entity << ' ' << box << ' ' << phys(tag) << " 0\n";
  out << "$EndEntities\n";

  const int nv = mesh.num_vertices();
  out << "$Nodes\n1 " << nv << " 1 " << nv << '\n';
  out << "3 " << volume_entity.begin()->second << " 0 " << nv << '\n';
  for (int v = 1; v <= nv; ++v) out << v << '\n';
  for (const auto& v : mesh.vertices()) out << v.coords[0] << ' ' << v.coords[1] << ' ' << v.coords[2] << '\n';
  out << "$EndNodes\n";

  std::size_t n_boundary = 0;
  for (const auto& [tag, faces] : surface_faces) n_boundary += faces.size();
  std::map<int, std::vector<int>> cells_by_tag;
  for (int c = 0; c < mesh.num_cells(); ++c) cells_by_tag[mesh.cell(c).physical_tag].push_back(c);

  const std::size_t n_elements = n_boundary + static_cast<std::size_t>(mesh.num_cells());
  out << "$Elements\n"
      << surface_faces.size() + cells_by_tag.size() << ' ' << n_elements << " 1 " << n_elements << '\n';
  std::size_t etag = 1;
  for (const auto& [tag, faces] : surface_faces) {
    out << "2 " << surface_entity[tag] << ' ' << kGmshTriangle << ' ' << faces.size() << '\n';
    for (int f : faces) {
      const auto& ids = mesh.face(f).vertex_ids;
      out << etag++ << ' ' << ids[0] + 1 << ' ' << ids[1] + 1 << ' ' << ids[2] + 1 << '\n';
    }
  }
  for (const auto& [tag, cells] : cells_by_tag) {
    out << "3 " << volume_entity[tag] << ' ' << kGmshTetrahedron << ' ' << cells.size() << '\n';
    for (int c : cells) {
      const auto& ids = mesh.cell(c).vertex_ids;
      out << n_boundary + static_cast<std::size_t>(c) + 1 << ' ' << ids[0] + 1 << ' ' << ids[1] + 1 << ' ' << ids[2] + 1 << ' ' << ids[3] + 1 << '\n';
    }
  }
  out << "$EndElements\n";
}

void write_mesh_dump(const Mesh& mesh, std::ostream& out) {
  out << std::setprecision(17);
  out << "kdg-mesh 1\n" << mesh.num_vertices() << ' ' << mesh.num_cells() << '\n';
  for (const auto& v : mesh.vertices()) out << v.coords[0] << ' ' << v.coords[1] << ' ' << v.coords[2] << '\n';
  for (const auto& c : mesh.cells()) {
    out << c.vertex_ids[0] << ' ' << c.vertex_ids[1] << ' ' << c.vertex_ids[2] << ' ' << c.vertex_ids[3] << ' '
        << c.physical_tag << '\n';
  }
}

Mesh read_mesh_dump(std::istream& in) {
  std::string magic;
  int version = 0;
  std::size_t nv = 0, nc = 0;
  if (!(in >> magic >> version >> nv >> nc) || magic != "kdg-mesh" || version != 1) {
    throw MeshError("not a kdg mesh dump");
  }
  std::vector<Vec3> vertices(nv);
  for (auto& x : vertices) {
    if (!(in >> x[0] >> x[1] >> x[2])) throw MeshError("truncated vertex list in mesh dump");
  }
  std::vector<std::array<int, 4>> cells(nc);
  std::vector<int> tags(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    auto& ids = cells[c];
    if (!(in >> ids[0] >> ids[1] >> ids[2] >> ids[3] >> tags[c])) throw MeshError("truncated cell list in mesh dump");
  }
  return Mesh::build(std::move(vertices), std::move(cells), std::move(tags));
}

Mesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open mesh file '" + path + "'");
  const bool is_dump = path.size() >= 5 && path.substr(path.size() - 5) == ".mesh";
  return is_dump ? read_mesh_dump(in) : parse_gmsh(in);
}

}  // namespace kdg
