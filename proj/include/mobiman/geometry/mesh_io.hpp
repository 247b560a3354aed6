#pragma once

#include <string>

#include "mobiman/geometry/mesh.hpp"

namespace mobiman::geometry {

// Loads ASCII/binary STL or OBJ (triangular faces only); the frame tag is
// the file stem. Throws std::runtime_error on malformed input.
TriangleMesh load_mesh(const std::string& path);

void save_stl_ascii(const TriangleMesh& mesh, const std::string& path);
void save_stl_binary(const TriangleMesh& mesh, const std::string& path);
void save_obj(const TriangleMesh& mesh, const std::string& path);

}  // namespace mobiman::geometry
