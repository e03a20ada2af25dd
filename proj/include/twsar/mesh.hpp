#pragma once

#include <string>

#include "twsar/types.hpp"

namespace twsar {

// Closed, outward-oriented triangulated surface. Triangle rows list vertex
// indices counter-clockwise when seen from outside.
struct SurfaceMesh {
  MatX3 vertices;
  MatX3i triangles;

  Eigen::Index vertex_count() const { return vertices.rows(); }
  Eigen::Index triangle_count() const { return triangles.rows(); }

  Vec3 triangle_vertex(Eigen::Index t, int corner) const {
    return vertices.row(triangles(t, corner)).transpose();
  }
};

// Nuisance-parameter vector describing the obscuring corner wall.
struct WallParams {
  double epsilon_r = 1.0;  // relative permittivity, >= 1
  double sigma = 0.0;      // conductivity, S/m
  double thickness = 0.1;  // m
  Vec2 origin_offset = Vec2::Zero();
  Vec2 lengths = Vec2(1.0, 1.0);  // arm along +x, arm along +y
  double height = 1.0;
};

void validate_params(const WallParams& params);

struct MeshReport {
  bool watertight = false;
  bool oriented = false;       // consistent winding and positive volume
  double min_triangle_area = 0.0;
  double max_edge_length = 0.0;
  double signed_volume = 0.0;
  bool pass() const { return watertight && oriented && min_triangle_area > 1e-12; }
};

// L-shaped footprint (two arms joined at a right angle) extruded symmetrically
// about z = 0, translated in-plane by origin_offset.
SurfaceMesh build_corner_wall(const WallParams& params, double target_edge);

SurfaceMesh build_sphere_mesh(double radius, const Vec3& center, double target_edge);

MeshReport mesh_validate(const SurfaceMesh& mesh);

double mesh_signed_volume(const SurfaceMesh& mesh);
double mesh_area(const SurfaceMesh& mesh);
double mesh_max_edge(const SurfaceMesh& mesh);

// Analytic volume of the extruded L footprint, for cross-checks.
double corner_wall_volume(const WallParams& params);

// Solid-angle winding test; true for points strictly inside the closed surface.
bool point_inside(const SurfaceMesh& mesh, const Vec3& p);

// Euclidean distance from p to the surface (exact per-triangle projection).
double distance_to_surface(const SurfaceMesh& mesh, const Vec3& p);

double point_triangle_distance(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& p);

// Concatenate meshes into one surface (vertex indices re-based).
SurfaceMesh merge_meshes(const std::vector<SurfaceMesh>& parts);

void write_off(const SurfaceMesh& mesh, const std::string& path);
SurfaceMesh read_off(const std::string& path);

}  // namespace twsar
