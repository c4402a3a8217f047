#include <doctest.h>

#include <cmath>

#include "sfo/geometry.hpp"
#include "sfo/rng.hpp"

using namespace sfo;

namespace {

Mat3 random_rotation(Rng& rng) {
    Vec3 axis(rng.normal(), rng.normal(), rng.normal());
    while (axis.norm() < 1e-6) axis = Vec3(rng.normal(), rng.normal(), rng.normal());
    return rotation_about_axis(axis.normalized(), rng.uniform(0.0, 180.0));
}

TriMesh unit_cube() {
    std::vector<Vec3> v = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                           {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
    std::vector<std::array<int, 3>> f = {
        {0, 2, 1}, {0, 3, 2},  // bottom z=0
        {4, 5, 6}, {4, 6, 7},  // top z=1
        {0, 1, 5}, {0, 5, 4},  // y=0
        {3, 7, 6}, {3, 6, 2},  // y=1
        {0, 4, 7}, {0, 7, 3},  // x=0
        {1, 2, 6}, {1, 6, 5},  // x=1
    };
    return TriMesh::create(std::move(v), std::move(f));
}

}  // namespace

TEST_CASE("pinhole projection maps known points") {
    Pinhole cam;
    cam.translation = Vec3(0, 0, 1000);
    cam.focal = 1000;
    cam.principal_point = Vec2(500, 500);
    CHECK(project(cam, Vec3(0, 0, 0)).isApprox(Vec2(500, 500), 1e-12));
    CHECK(project(cam, Vec3(100, 0, 0)).isApprox(Vec2(600, 500), 1e-12));
    CHECK_THROWS_AS(project(cam, Vec3(0, 0, -2000)), NonPositiveDepth);
    CHECK_THROWS_AS(project(cam, Vec3(0, 0, -1000)), NonPositiveDepth);  // exactly at the plane
}

TEST_CASE("rotation distance is the geodesic angle") {
    Mat3 r30 = rotation_about_axis(Vec3(0, 0, 1), 30.0);
    CHECK(rotation_angle_deg(r30, r30) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(rotation_angle_deg(Mat3::Identity(), r30) == doctest::Approx(30.0).epsilon(1e-9));

    Rng rng(81);
    for (int i = 0; i < 200; ++i) {
        Mat3 a = random_rotation(rng);
        Mat3 b = random_rotation(rng);
        double tr = (a.transpose() * b).trace();
        double expect = rad2deg(std::acos(std::clamp((tr - 1.0) / 2.0, -1.0, 1.0)));
        CHECK(rotation_angle_deg(a, b) == doctest::Approx(expect).epsilon(1e-9));
    }

    Mat3 bad = Mat3::Identity();
    bad(0, 0) = 2.0;
    CHECK_THROWS_AS(rotation_angle_deg(bad, Mat3::Identity()), NotARotation);
}

TEST_CASE("slab cut of the unit cube keeps exactly the band") {
    TriMesh cube = unit_cube();
    Plane lo{Vec3(0, 0, 0.25), Vec3(0, 0, 1)};
    Plane hi{Vec3(0, 0, 0.75), Vec3(0, 0, 1)};
    TriMesh band = cut_mesh_between_planes(cube, lo, hi);
    // Four side walls of height 0.5; the z=0 and z=1 faces fall outside.
    CHECK(band.surface_area() == doctest::Approx(2.0).epsilon(1e-6));
    for (const Vec3& v : band.vertices) {
        CHECK(v.z() >= 0.25 - 1e-9);
        CHECK(v.z() <= 0.75 + 1e-9);
    }

    SUBCASE("planes above the mesh give no geometry") {
        Plane a{Vec3(0, 0, 5), Vec3(0, 0, 1)};
        Plane b{Vec3(0, 0, 6), Vec3(0, 0, 1)};
        CHECK_THROWS_AS(cut_mesh_between_planes(cube, a, b), EmptyResult);
    }
    SUBCASE("planes enclosing the mesh keep the whole surface") {
        Plane a{Vec3(0, 0, -5), Vec3(0, 0, 1)};
        Plane b{Vec3(0, 0, 5), Vec3(0, 0, 1)};
        TriMesh whole = cut_mesh_between_planes(cube, a, b);
        CHECK(whole.surface_area() == doctest::Approx(6.0).epsilon(1e-9));
    }
    SUBCASE("coincident planes are a degenerate slab") {
        CHECK_THROWS_AS(cut_mesh_between_planes(cube, lo, lo), EmptyResult);
    }
    SUBCASE("plane order does not matter") {
        TriMesh swapped = cut_mesh_between_planes(cube, hi, lo);
        CHECK(swapped.surface_area() == doctest::Approx(band.surface_area()).epsilon(1e-12));
    }
}

TEST_CASE("halfspace clip keeps the non-negative side") {
    TriMesh cube = unit_cube();
    TriMesh half = clip_mesh_halfspace(cube, Plane{Vec3(0, 0, 0.5), Vec3(0, 0, 1)});
    for (const Vec3& v : half.vertices) CHECK(v.z() >= 0.5 - 1e-9);
    // Four half walls (4 x 0.5) plus the full top face.
    CHECK(half.surface_area() == doctest::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("silhouette rasterization") {
    Pinhole cam;
    cam.focal = 100;
    cam.width = 64;
    cam.height = 64;
    cam.principal_point = Vec2(32, 32);

    SUBCASE("one huge triangle covers every pixel") {
        TriMesh tri = TriMesh::create(
            {Vec3(-1000, -1000, 100), Vec3(3000, -1000, 100), Vec3(-1000, 3000, 100)},
            {{0, 1, 2}});
        BinaryMask m = rasterize_silhouette(tri, cam);
        CHECK(m.count() == static_cast<std::size_t>(64 * 64));
    }
    SUBCASE("geometry behind the camera leaves the mask clear") {
        TriMesh tri = TriMesh::create(
            {Vec3(-1000, -1000, -100), Vec3(3000, -1000, -100), Vec3(-1000, 3000, -100)},
            {{0, 1, 2}});
        CHECK(rasterize_silhouette(tri, cam).count() == 0);
    }
    SUBCASE("projected square area matches the analytic value") {
        Pinhole big;
        big.focal = 512;
        big.width = 512;
        big.height = 512;
        big.principal_point = Vec2(256, 256);
        // 200 mm square at depth 1000 -> side 102.4 px, area 10485.76 px^2.
        TriMesh sq = TriMesh::create({Vec3(-100, -100, 1000), Vec3(100, -100, 1000),
                                      Vec3(100, 100, 1000), Vec3(-100, 100, 1000)},
                                     {{0, 1, 2}, {0, 2, 3}});
        double area = 512.0 * 200 / 1000 * 512.0 * 200 / 1000;
        double got = static_cast<double>(rasterize_silhouette(sq, big).count());
        CHECK(std::abs(got - area) / area < 0.02);
    }
    SUBCASE("triangle straddling the camera plane is clipped, not dropped") {
        TriMesh tri = TriMesh::create(
            {Vec3(-50, -20, 200), Vec3(50, -20, 200), Vec3(0, 30, -200)}, {{0, 1, 2}});
        CHECK(rasterize_silhouette(tri, cam).count() > 0);
    }
}

TEST_CASE("point-to-ray distance") {
    CHECK(point_to_ray_distance_mm(Vec3(5, 0, 0), Vec3(0, 0, 0), Vec3(1, 0, 0)) ==
          doctest::Approx(0.0).epsilon(1e-12));
    CHECK(point_to_ray_distance_mm(Vec3(0, 1, 0), Vec3(0, 0, 0), Vec3(1, 0, 0)) ==
          doctest::Approx(1.0).epsilon(1e-12));

    Rng rng(5117);
    for (int i = 0; i < 1000; ++i) {
        Vec3 p(rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(-50, 50));
        Vec3 o(rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(-50, 50));
        Vec3 d(rng.normal(), rng.normal(), rng.normal());
        if (d.norm() < 1e-6) continue;
        d.normalize();
        Vec3 r = p - o;
        double expect = (r - r.dot(d) * d).norm();
        CHECK(point_to_ray_distance_mm(p, o, d) == doctest::Approx(expect).epsilon(1e-9));
    }
}

TEST_CASE("back-projection inverts projection") {
    Rng rng(90210);
    for (int i = 0; i < 100; ++i) {
        Pinhole cam;
        cam.rotation = random_rotation(rng);
        cam.translation = Vec3(rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(500, 2000));
        cam.focal = rng.uniform(400, 2000);
        cam.principal_point = Vec2(320, 240);
        cam.width = 640;
        cam.height = 480;
        Vec3 p = cam.rotation.transpose() *
                     (Vec3(rng.uniform(-100, 100), rng.uniform(-100, 100),
                           rng.uniform(800, 1500)) -
                      cam.translation);
        Vec2 f = project(cam, p);
        auto [origin, dir] = backproject_ray(cam, f);
        CHECK(point_to_ray_distance_mm(p, origin, dir) < 1e-9);
        CHECK(origin.isApprox(cam.center(), 1e-9));
        // Round trip through a point on the ray reprojects to the pixel.
        Vec2 g = project(cam, origin + 1000.0 * dir);
        CHECK((g - f).norm() < 1e-6);
    }

    Pinhole axis_cam;
    axis_cam.focal = 800;
    axis_cam.principal_point = Vec2(100, 80);
    axis_cam.translation = Vec3(0, 0, 500);
    auto [o, d] = backproject_ray(axis_cam, Vec2(100, 80));
    CHECK(d.isApprox(Vec3(0, 0, 1), 1e-12));
    CHECK(o.isApprox(Vec3(0, 0, -500), 1e-9));
}

TEST_CASE("zyx pose angles recompose") {
    Rng rng(77);
    for (int i = 0; i < 500; ++i) {
        Mat3 r = random_rotation(rng);
        PoseAngles a = decompose_zyx(r);
        if (a.gimbal_lock) continue;
        CHECK((compose_zyx(a) - r).norm() < 1e-9);
    }
    PoseAngles yaw30 = decompose_zyx(rotation_about_axis(Vec3(0, 0, 1), 30.0));
    CHECK(yaw30.yaw_deg == doctest::Approx(30.0).epsilon(1e-9));
    CHECK(yaw30.pitch_deg == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(yaw30.roll_deg == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("look-at rotation points the optical axis at the target") {
    Vec3 eye(100, -400, 50);
    Vec3 target(0, 0, 0);
    Mat3 r = look_at_rotation(eye, target, Vec3(0, 0, 1));
    Vec3 forward = r.row(2).transpose();
    CHECK(forward.isApprox((target - eye).normalized(), 1e-9));
    CHECK((r * r.transpose() - Mat3::Identity()).norm() < 1e-9);
    CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("mesh create validates faces") {
    CHECK_THROWS_AS(TriMesh::create({Vec3(0, 0, 0)}, {{0, 0, 1}}), InvalidMesh);
    // Zero-area faces are dropped silently.
    TriMesh m = TriMesh::create({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0)}, {{0, 1, 2}});
    CHECK(m.empty());
}
