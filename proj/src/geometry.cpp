#include "sfo/geometry.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <map>

namespace sfo {

namespace {

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
    return 0.5 * (b - a).cross(c - a).norm();
}

// Sutherland-Hodgman clip of a convex polygon against signed_distance >= 0.
std::vector<Vec3> clip_polygon(const std::vector<Vec3>& poly, const Plane& plane) {
    std::vector<Vec3> out;
    out.reserve(poly.size() + 1);
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3& v0 = poly[i];
        const Vec3& v1 = poly[(i + 1) % n];
        double d0 = plane.signed_distance(v0);
        double d1 = plane.signed_distance(v1);
        if (d0 >= 0.0) out.push_back(v0);
        if ((d0 >= 0.0) != (d1 >= 0.0)) {
            double t = d0 / (d0 - d1);  // denominator nonzero: signs differ
            out.push_back(v0 + t * (v1 - v0));
        }
    }
    return out;
}

// Rebuilds an indexed mesh from a triangle soup, deduplicating exactly
// identical vertices and dropping zero-area triangles.
TriMesh soup_to_mesh(const std::vector<std::array<Vec3, 3>>& soup) {
    std::map<std::array<double, 3>, int> index;
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;
    auto vid = [&](const Vec3& v) {
        std::array<double, 3> key{v.x(), v.y(), v.z()};
        auto it = index.find(key);
        if (it != index.end()) return it->second;
        int id = static_cast<int>(vertices.size());
        vertices.push_back(v);
        index.emplace(key, id);
        return id;
    };
    for (const auto& t : soup) {
        if (triangle_area(t[0], t[1], t[2]) <= 1e-12) continue;
        faces.push_back({vid(t[0]), vid(t[1]), vid(t[2])});
    }
    return TriMesh::create(std::move(vertices), std::move(faces));
}

void clip_soup(const TriMesh& mesh, const std::vector<Plane>& planes,
               std::vector<std::array<Vec3, 3>>& soup) {
    for (const auto& f : mesh.faces) {
        std::vector<Vec3> poly{mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]};
        for (const auto& pl : planes) {
            poly = clip_polygon(poly, pl);
            if (poly.size() < 3) break;
        }
        for (std::size_t i = 2; i < poly.size(); ++i)
            soup.push_back({poly[0], poly[i - 1], poly[i]});
    }
}

// Fills pixels of the triangle (a, b, c), coordinates in pixel units.
// Coverage rule: pixel center inside or on the boundary.
void raster_triangle(BinaryMask& mask, Vec2 a, Vec2 b, Vec2 c) {
    double area2 = (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
    if (area2 == 0.0) return;
    if (area2 < 0.0) std::swap(b, c);
    double min_x = std::min({a.x(), b.x(), c.x()});
    double max_x = std::max({a.x(), b.x(), c.x()});
    double min_y = std::min({a.y(), b.y(), c.y()});
    double max_y = std::max({a.y(), b.y(), c.y()});
    // Clamp in double before casting: clipped geometry can project to
    // coordinates far beyond int range.
    auto clamp_lo = [](double v, int hi) {
        return static_cast<int>(std::clamp(v, 0.0, static_cast<double>(hi) + 1.0));
    };
    auto clamp_hi = [](double v, int hi) {
        return static_cast<int>(std::clamp(v, -1.0, static_cast<double>(hi)));
    };
    int x0 = clamp_lo(std::ceil(min_x - 0.5), mask.width - 1);
    int x1 = clamp_hi(std::floor(max_x - 0.5), mask.width - 1);
    int y0 = clamp_lo(std::ceil(min_y - 0.5), mask.height - 1);
    int y1 = clamp_hi(std::floor(max_y - 0.5), mask.height - 1);
    for (int y = y0; y <= y1; ++y) {
        double py = y + 0.5;
        for (int x = x0; x <= x1; ++x) {
            double px = x + 0.5;
            double e0 = (b.x() - a.x()) * (py - a.y()) - (b.y() - a.y()) * (px - a.x());
            double e1 = (c.x() - b.x()) * (py - b.y()) - (c.y() - b.y()) * (px - b.x());
            double e2 = (a.x() - c.x()) * (py - c.y()) - (a.y() - c.y()) * (px - c.x());
            if (e0 >= 0.0 && e1 >= 0.0 && e2 >= 0.0) mask.set(x, y);
        }
    }
}

}  // namespace

TriMesh TriMesh::create(std::vector<Vec3> vertices, std::vector<std::array<int, 3>> faces) {
    TriMesh m;
    m.vertices = std::move(vertices);
    const int n = static_cast<int>(m.vertices.size());
    m.faces.reserve(faces.size());
    for (const auto& f : faces) {
        for (int k : f)
            if (k < 0 || k >= n) throw InvalidMesh("face index out of range");
        if (triangle_area(m.vertices[f[0]], m.vertices[f[1]], m.vertices[f[2]]) <= 0.0) continue;
        m.faces.push_back(f);
    }
    return m;
}

double TriMesh::surface_area() const {
    double s = 0.0;
    for (const auto& f : faces)
        s += triangle_area(vertices[f[0]], vertices[f[1]], vertices[f[2]]);
    return s;
}

Vec3 TriMesh::centroid() const {
    if (vertices.empty()) throw InvalidMesh("centroid of empty mesh");
    Vec3 c = Vec3::Zero();
    for (const auto& v : vertices) c += v;
    return c / static_cast<double>(vertices.size());
}

std::size_t BinaryMask::count() const {
    std::size_t n = 0;
    for (uint8_t b : bits) n += b;
    return n;
}

Vec2 project(const Pinhole& camera, const Vec3& p) {
    Vec3 pc = camera.rotation * p + camera.translation;
    if (pc.z() <= 0.0) throw NonPositiveDepth("point at or behind camera plane");
    return {camera.principal_point.x() + camera.focal * pc.x() / pc.z(),
            camera.principal_point.y() + camera.focal * pc.y() / pc.z()};
}

double rotation_angle_deg(const Mat3& a, const Mat3& b) {
    auto check = [](const Mat3& r) {
        if ((r * r.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-6 ||
            r.determinant() < 0.0)
            throw NotARotation("matrix is not a rotation");
    };
    check(a);
    check(b);
    double c = ((a.transpose() * b).trace() - 1.0) * 0.5;
    return rad2deg(std::acos(std::clamp(c, -1.0, 1.0)));
}

TriMesh clip_mesh_halfspace(const TriMesh& mesh, const Plane& keep_nonnegative) {
    std::vector<std::array<Vec3, 3>> soup;
    clip_soup(mesh, {keep_nonnegative}, soup);
    TriMesh out = soup_to_mesh(soup);
    if (out.empty()) throw EmptyResult("no geometry on requested side of plane");
    return out;
}

TriMesh cut_mesh_between_planes(const TriMesh& mesh, const Plane& a, const Plane& b) {
    // Orient both normals toward the interior of the slab.
    Vec3 na = a.normal.normalized();
    Vec3 nb = b.normal.normalized();
    double toward_b = na.dot(b.point - a.point);
    double toward_a = nb.dot(a.point - b.point);
    if (std::abs(toward_b) < 1e-12 && std::abs(toward_a) < 1e-12 &&
        na.cross(nb).norm() < 1e-9)
        throw EmptyResult("cut planes are coincident");
    if (toward_b < 0.0) na = -na;
    if (toward_a < 0.0) nb = -nb;

    std::vector<std::array<Vec3, 3>> soup;
    clip_soup(mesh, {Plane{a.point, na}, Plane{b.point, nb}}, soup);
    TriMesh out = soup_to_mesh(soup);
    if (out.empty()) throw EmptyResult("no geometry between planes");
    return out;
}

BinaryMask rasterize_silhouette(const TriMesh& mesh, const Pinhole& camera) {
    BinaryMask mask(camera.width, camera.height);
    const double z_near = 1e-6;
    const Plane near_plane{Vec3(0, 0, z_near), Vec3(0, 0, 1)};
    std::vector<Vec3> cam_pts(mesh.vertices.size());
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
        cam_pts[i] = camera.rotation * mesh.vertices[i] + camera.translation;
    auto to_px = [&](const Vec3& p) {
        return Vec2(camera.principal_point.x() + camera.focal * p.x() / p.z(),
                    camera.principal_point.y() + camera.focal * p.y() / p.z());
    };
    for (const auto& f : mesh.faces) {
        const Vec3& a = cam_pts[f[0]];
        const Vec3& b = cam_pts[f[1]];
        const Vec3& c = cam_pts[f[2]];
        if (a.z() >= z_near && b.z() >= z_near && c.z() >= z_near) {
            raster_triangle(mask, to_px(a), to_px(b), to_px(c));
            continue;
        }
        std::vector<Vec3> poly = clip_polygon({a, b, c}, near_plane);
        if (poly.size() < 3) continue;
        std::vector<Vec2> px(poly.size());
        for (std::size_t k = 0; k < poly.size(); ++k) px[k] = to_px(poly[k]);
        for (std::size_t k = 2; k < px.size(); ++k)
            raster_triangle(mask, px[0], px[k - 1], px[k]);
    }
    return mask;
}

double point_to_ray_distance_mm(const Vec3& p, const Vec3& origin, const Vec3& dir) {
    Vec3 r = p - origin;
    return (r - r.dot(dir) * dir).norm();
}

std::pair<Vec3, Vec3> backproject_ray(const Pinhole& camera, const Vec2& pixel) {
    Vec3 cam_dir((pixel.x() - camera.principal_point.x()) / camera.focal,
                 (pixel.y() - camera.principal_point.y()) / camera.focal, 1.0);
    Vec3 dir = camera.rotation.transpose() * cam_dir.normalized();
    return {camera.center(), dir.normalized()};
}

Mat3 rotation_about_axis(const Vec3& axis, double angle_deg) {
    return Eigen::AngleAxisd(deg2rad(angle_deg), axis.normalized()).toRotationMatrix();
}

Mat3 look_at_rotation(const Vec3& eye, const Vec3& target, const Vec3& up) {
    Vec3 forward = (target - eye).normalized();
    Vec3 xc = forward.cross(up).normalized();
    Vec3 yc = forward.cross(xc);  // completes a right-handed (x, y, z=forward) basis
    Mat3 r;
    r.row(0) = xc.transpose();
    r.row(1) = yc.transpose();
    r.row(2) = forward.transpose();
    return r;
}

PoseAngles decompose_zyx(const Mat3& r) {
    PoseAngles a;
    double sp = -r(2, 0);
    if (std::abs(std::abs(sp) - 1.0) < 1e-6) {
        // Gimbal lock: yaw and roll axes align; report roll = 0 by convention.
        a.gimbal_lock = true;
        a.pitch_deg = rad2deg(std::copysign(3.14159265358979323846 / 2.0, sp));
        a.roll_deg = 0.0;
        a.yaw_deg = rad2deg(std::atan2(-r(0, 1), r(1, 1)));
        return a;
    }
    a.pitch_deg = rad2deg(std::asin(std::clamp(sp, -1.0, 1.0)));
    a.yaw_deg = rad2deg(std::atan2(r(1, 0), r(0, 0)));
    a.roll_deg = rad2deg(std::atan2(r(2, 1), r(2, 2)));
    return a;
}

Mat3 compose_zyx(const PoseAngles& a) {
    return rotation_about_axis(Vec3::UnitZ(), a.yaw_deg) *
           rotation_about_axis(Vec3::UnitY(), a.pitch_deg) *
           rotation_about_axis(Vec3::UnitX(), a.roll_deg);
}

}  // namespace sfo
