#include "mobiman/geometry/mesh_io.hpp"

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace mobiman::geometry {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

// Merges exactly-equal vertices so STL soup becomes an indexed mesh.
class VertexPool {
 public:
  int add(const Eigen::Vector3d& v) {
    const auto key = std::make_tuple(v.x(), v.y(), v.z());
    const auto it = index_.find(key);
    if (it != index_.end()) return it->second;
    const int id = static_cast<int>(vertices_.size());
    vertices_.push_back(v);
    index_[key] = id;
    return id;
  }
  std::vector<Eigen::Vector3d> take() { return std::move(vertices_); }

 private:
  std::vector<Eigen::Vector3d> vertices_;
  std::map<std::tuple<double, double, double>, int> index_;
};

TriangleMesh load_stl_ascii(std::istream& in, const std::string& frame) {
  VertexPool pool;
  std::vector<Eigen::Vector3i> tris;
  std::string token;
  std::vector<int> face;
  while (in >> token) {
    if (token == "vertex") {
      Eigen::Vector3d v;
      if (!(in >> v.x() >> v.y() >> v.z())) throw std::runtime_error("stl: bad vertex");
      face.push_back(pool.add(v));
    } else if (token == "endfacet") {
      if (face.size() != 3) throw std::runtime_error("stl: facet without 3 vertices");
      tris.push_back(Eigen::Vector3i(face[0], face[1], face[2]));
      face.clear();
    }
  }
  return TriangleMesh::from_triangles(pool.take(), tris, frame);
}

TriangleMesh load_stl_binary(std::istream& in, const std::string& frame) {
  char header[80];
  in.read(header, 80);
  uint32_t count = 0;
  in.read(reinterpret_cast<char*>(&count), 4);
  if (!in) throw std::runtime_error("stl: truncated binary header");
  VertexPool pool;
  std::vector<Eigen::Vector3i> tris;
  tris.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    float data[12];
    uint16_t attr;
    in.read(reinterpret_cast<char*>(data), sizeof(data));
    in.read(reinterpret_cast<char*>(&attr), sizeof(attr));
    if (!in) throw std::runtime_error("stl: truncated facet record");
    int idx[3];
    for (int k = 0; k < 3; ++k) {
      const Eigen::Vector3d v(data[3 + 3 * k], data[4 + 3 * k], data[5 + 3 * k]);
      idx[k] = pool.add(v);
    }
    tris.push_back(Eigen::Vector3i(idx[0], idx[1], idx[2]));
  }
  return TriangleMesh::from_triangles(pool.take(), tris, frame);
}

TriangleMesh load_obj(std::istream& in, const std::string& frame) {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<Eigen::Vector3i> tris;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      Eigen::Vector3d v;
      if (!(ls >> v.x() >> v.y() >> v.z())) throw std::runtime_error("obj: bad vertex line");
      vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string word;
      while (ls >> word) {
        // "f 1", "f 1/2", "f 1/2/3", "f 1//3" all reference vertex 1
        const int v = std::stoi(word.substr(0, word.find('/')));
        if (v == 0) throw std::runtime_error("obj: zero face index");
        idx.push_back(v > 0 ? v - 1 : static_cast<int>(vertices.size()) + v);
      }
      if (idx.size() != 3) throw std::runtime_error("obj: only triangular faces supported");
      tris.push_back(Eigen::Vector3i(idx[0], idx[1], idx[2]));
    }
  }
  return TriangleMesh::from_triangles(std::move(vertices), tris, frame);
}

}  // namespace

TriangleMesh load_mesh(const std::string& path) {
  const std::filesystem::path p(path);
  const std::string frame = p.stem().string();
  const std::string ext = lower(p.extension().string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("mesh: cannot open " + path);

  if (ext == ".obj") return load_obj(in, frame);
  if (ext != ".stl") throw std::runtime_error("mesh: unsupported extension " + ext);

  // An STL is ASCII when it both starts with "solid" and contains "facet"
  // early on; binary files may also start with "solid".
  char head[512] = {0};
  in.read(head, sizeof(head) - 1);
  const std::string start(head, static_cast<size_t>(in.gcount()));
  in.clear();
  in.seekg(0);
  const bool ascii =
      start.rfind("solid", 0) == 0 && start.find("facet") != std::string::npos;
  return ascii ? load_stl_ascii(in, frame) : load_stl_binary(in, frame);
}

void save_stl_ascii(const TriangleMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("stl: cannot write " + path);
  out.precision(17);
  out << "solid " << mesh.frame << "\n";
  for (size_t i = 0; i < mesh.triangle_count(); ++i) {
    const auto& n = mesh.normals[i];
    out << "  facet normal " << n.x() << " " << n.y() << " " << n.z() << "\n";
    out << "    outer loop\n";
    for (int k = 0; k < 3; ++k) {
      const auto v = mesh.vertex_of(static_cast<int>(i), k);
      out << "      vertex " << v.x() << " " << v.y() << " " << v.z() << "\n";
    }
    out << "    endloop\n  endfacet\n";
  }
  out << "endsolid " << mesh.frame << "\n";
}

void save_stl_binary(const TriangleMesh& mesh, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("stl: cannot write " + path);
  char header[80] = {0};
  std::snprintf(header, sizeof(header), "binary stl");
  out.write(header, 80);
  const uint32_t count = static_cast<uint32_t>(mesh.triangle_count());
  out.write(reinterpret_cast<const char*>(&count), 4);
  for (size_t i = 0; i < mesh.triangle_count(); ++i) {
    float data[12];
    for (int k = 0; k < 3; ++k) data[k] = static_cast<float>(mesh.normals[i][k]);
    for (int k = 0; k < 3; ++k) {
      const auto v = mesh.vertex_of(static_cast<int>(i), k);
      for (int j = 0; j < 3; ++j) data[3 + 3 * k + j] = static_cast<float>(v[j]);
    }
    const uint16_t attr = 0;
    out.write(reinterpret_cast<const char*>(data), sizeof(data));
    out.write(reinterpret_cast<const char*>(&attr), sizeof(attr));
  }
}

void save_obj(const TriangleMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("obj: cannot write " + path);
  out.precision(17);
  for (const auto& v : mesh.vertices)
    out << "v " << v.x() << " " << v.y() << " " << v.z() << "\n";
  for (const auto& t : mesh.triangles)
    out << "f " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
}

}  // namespace mobiman::geometry
