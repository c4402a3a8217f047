#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "sfo/errors.hpp"

namespace sfo {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline double deg2rad(double d) { return d * 3.14159265358979323846 / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / 3.14159265358979323846; }

// Indexed triangle mesh, millimetre coordinates.
struct TriMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;

    // Validates indices and drops zero-area faces so downstream area and
    // rasterization code never sees degenerate triangles.
    static TriMesh create(std::vector<Vec3> vertices, std::vector<std::array<int, 3>> faces);

    double surface_area() const;
    Vec3 centroid() const;  // mean of vertices
    bool empty() const { return faces.empty(); }
};

// Oriented plane through `point` with unit normal.
struct Plane {
    Vec3 point;
    Vec3 normal;

    double signed_distance(const Vec3& p) const { return normal.dot(p - point); }
};

// Calibrated pinhole camera. `rotation`/`translation` map world (mm) to
// camera coordinates; +z looks forward, image v grows downward.
struct Pinhole {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();
    double focal = 1.0;  // pixels, square pixels, zero skew
    Vec2 principal_point = Vec2::Zero();
    int width = 0;
    int height = 0;

    Vec3 center() const { return -(rotation.transpose() * translation); }
};

// Row-major binary raster, origin top-left.
struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> bits;  // 0 or 1 per pixel

    BinaryMask() = default;
    BinaryMask(int w, int h) : width(w), height(h), bits(static_cast<std::size_t>(w) * h, 0) {}

    uint8_t at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x]; }
    void set(int x, int y, uint8_t v = 1) { bits[static_cast<std::size_t>(y) * width + x] = v; }
    std::size_t count() const;
    bool operator==(const BinaryMask& o) const = default;
};

// Projects a world point; throws NonPositiveDepth when the point is at or
// behind the camera plane.
Vec2 project(const Pinhole& camera, const Vec3& p);

// Geodesic distance between two rotations in degrees, range [0, 180].
// Throws NotARotation when either input is not orthonormal within 1e-6.
double rotation_angle_deg(const Mat3& a, const Mat3& b);

// Sub-mesh lying between the two planes. Triangles straddling a boundary are
// clipped exactly at the plane. Coincident planes (zero-thickness slab) and
// an empty intersection raise EmptyResult.
TriMesh cut_mesh_between_planes(const TriMesh& mesh, const Plane& a, const Plane& b);

// Sub-mesh on the non-negative side of the plane, clipped at the boundary.
TriMesh clip_mesh_halfspace(const TriMesh& mesh, const Plane& keep_nonnegative);

// Binary silhouette: a pixel is set iff at least one projected triangle
// covers the pixel center (x + 0.5, y + 0.5). Geometry behind the camera is
// clipped away and contributes nothing.
BinaryMask rasterize_silhouette(const TriMesh& mesh, const Pinhole& camera);

// Perpendicular distance from point to the ray origin + s*dir, s >= 0 with
// dir unit length. For points "behind" the origin the perpendicular distance
// to the infinite line is still returned; callers pass rays through the
// scene so the distinction does not arise.
double point_to_ray_distance_mm(const Vec3& p, const Vec3& origin, const Vec3& dir);

// Ray through pixel (u, v): origin is the camera center, direction is unit
// length in world coordinates.
std::pair<Vec3, Vec3> backproject_ray(const Pinhole& camera, const Vec2& pixel);

// Rotation by angle_deg about a unit axis (Rodrigues).
Mat3 rotation_about_axis(const Vec3& axis, double angle_deg);

// World-to-camera rotation looking from eye toward target, image up aligned
// against `up` (v grows downward).
Mat3 look_at_rotation(const Vec3& eye, const Vec3& target, const Vec3& up);

// ZYX Tait-Bryan angles in degrees; recomposes as Rz(yaw)*Ry(pitch)*Rx(roll).
struct PoseAngles {
    double yaw_deg = 0.0;
    double pitch_deg = 0.0;
    double roll_deg = 0.0;
    bool gimbal_lock = false;
};

PoseAngles decompose_zyx(const Mat3& r);
Mat3 compose_zyx(const PoseAngles& a);

}  // namespace sfo
