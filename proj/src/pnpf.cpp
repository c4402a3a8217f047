#include "sfo/pnpf.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>

namespace sfo {

namespace {

struct State {
    Mat3 r;
    Vec3 t;
    double f;
};

// Sum of squared residuals over centered image coordinates; infinity when a
// point falls at or behind the camera plane.
double cost(const State& s, const std::vector<Vec3>& world, const std::vector<Vec2>& centered) {
    double c = 0.0;
    for (std::size_t i = 0; i < world.size(); ++i) {
        Vec3 p = s.r * world[i] + s.t;
        if (p.z() <= 1e-9) return std::numeric_limits<double>::infinity();
        double du = s.f * p.x() / p.z() - centered[i].x();
        double dv = s.f * p.y() / p.z() - centered[i].y();
        c += du * du + dv * dv;
    }
    return c;
}

// Closest rotation in Frobenius norm, determinant forced positive.
Mat3 nearest_rotation(const Mat3& m) {
    Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 r = svd.matrixU() * svd.matrixV().transpose();
    if (r.determinant() < 0.0) {
        Mat3 d = Mat3::Identity();
        d(2, 2) = -1.0;
        r = svd.matrixU() * d * svd.matrixV().transpose();
    }
    return r;
}

// 12-parameter homogeneous DLT on centered image coordinates. 2D points are
// scaled (not translated: the principal point must stay at the origin) and
// 3D points get a full similarity normalization for conditioning.
State dlt_init(const std::vector<Vec3>& world, const std::vector<Vec2>& centered) {
    const std::size_t n = world.size();

    Vec3 c3 = Vec3::Zero();
    for (const auto& w : world) c3 += w;
    c3 /= static_cast<double>(n);
    double s3 = 0.0;
    for (const auto& w : world) s3 += (w - c3).norm();
    s3 = std::sqrt(3.0) * n / std::max(s3, 1e-12);

    double s2 = 0.0;
    for (const auto& q : centered) s2 += q.norm();
    s2 = std::sqrt(2.0) * n / std::max(s2, 1e-12);

    Eigen::MatrixXd a(2 * n, 12);
    for (std::size_t i = 0; i < n; ++i) {
        Vec3 w = (world[i] - c3) * s3;
        Vec2 q = centered[i] * s2;
        Eigen::Matrix<double, 1, 4> wh;
        wh << w.x(), w.y(), w.z(), 1.0;
        a.row(2 * i).setZero();
        a.row(2 * i).segment<4>(0) = wh;
        a.row(2 * i).segment<4>(8) = -q.x() * wh;
        a.row(2 * i + 1).setZero();
        a.row(2 * i + 1).segment<4>(4) = wh;
        a.row(2 * i + 1).segment<4>(8) = -q.y() * wh;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinV);
    Eigen::Matrix<double, 3, 4> p;
    Eigen::VectorXd v = svd.matrixV().col(11);
    p.row(0) = v.segment<4>(0).transpose();
    p.row(1) = v.segment<4>(4).transpose();
    p.row(2) = v.segment<4>(8).transpose();

    // Undo normalization: columns 0..2 scale by s3, image rows by 1/s2.
    p.block<2, 4>(0, 0) /= s2;
    Eigen::Matrix4d h = Eigen::Matrix4d::Identity();
    h.topLeftCorner<3, 3>() *= s3;
    h.topRightCorner<3, 1>() = -s3 * c3;
    p = p * h;

    // Majority of depths must be positive; flip the global sign otherwise.
    int positive = 0;
    for (const auto& w : world) {
        double z = p.row(2).head<3>().dot(w) + p(2, 3);
        if (z > 0.0) ++positive;
    }
    if (2 * positive < static_cast<int>(n)) p = -p;

    double norm3 = p.row(2).head<3>().norm();
    p /= std::max(norm3, 1e-300);

    State s;
    double f1 = p.row(0).head<3>().norm();
    double f2 = p.row(1).head<3>().norm();
    s.f = std::sqrt(std::max(f1 * f2, 1e-12));
    Mat3 rraw;
    rraw.row(0) = p.row(0).head<3>() / std::max(f1, 1e-300);
    rraw.row(1) = p.row(1).head<3>() / std::max(f2, 1e-300);
    rraw.row(2) = p.row(2).head<3>();
    s.r = nearest_rotation(rraw);
    s.t = Vec3(p(0, 3) / s.f, p(1, 3) / s.f, p(2, 3));
    return s;
}

// Levenberg-style damped Gauss-Newton over (rotation increment, translation,
// focal). Rotation updates are applied on the left as exp(w^) * R.
State refine(State s, const std::vector<Vec3>& world, const std::vector<Vec2>& centered,
             const SolveOptions& opts, bool& converged) {
    const std::size_t n = world.size();
    double lambda = 1e-6;
    double prev = cost(s, world, centered);
    converged = false;
    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        Eigen::Matrix<double, 7, 7> jtj = Eigen::Matrix<double, 7, 7>::Zero();
        Eigen::Matrix<double, 7, 1> jtr = Eigen::Matrix<double, 7, 1>::Zero();
        for (std::size_t i = 0; i < n; ++i) {
            Vec3 p = s.r * world[i] + s.t;
            double iz = 1.0 / p.z();
            double u = s.f * p.x() * iz;
            double v = s.f * p.y() * iz;
            Eigen::Matrix<double, 2, 3> dpix;
            dpix << s.f * iz, 0.0, -s.f * p.x() * iz * iz,
                    0.0, s.f * iz, -s.f * p.y() * iz * iz;
            Eigen::Matrix<double, 3, 3> dp_dw;
            // d(exp(w^) p)/dw at w=0 is -[p - t]^ applied to the rotated point
            Vec3 rp = p - s.t;
            dp_dw << 0.0, rp.z(), -rp.y(),
                     -rp.z(), 0.0, rp.x(),
                     rp.y(), -rp.x(), 0.0;
            Eigen::Matrix<double, 2, 7> j;
            j.block<2, 3>(0, 0) = dpix * dp_dw;
            j.block<2, 3>(0, 3) = dpix;
            j(0, 6) = p.x() * iz;
            j(1, 6) = p.y() * iz;
            Vec2 r(u - centered[i].x(), v - centered[i].y());
            jtj += j.transpose() * j;
            jtr += j.transpose() * r;
        }
        bool accepted = false;
        for (int attempt = 0; attempt < 12 && !accepted; ++attempt) {
            Eigen::Matrix<double, 7, 7> h = jtj;
            h.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-12);
            Eigen::Matrix<double, 7, 1> step = h.ldlt().solve(-jtr);
            State trial = s;
            Vec3 w = step.segment<3>(0);
            double angle = w.norm();
            if (angle > 0.0)
                trial.r = rotation_about_axis(w / angle, rad2deg(angle)) * s.r;
            trial.t += step.segment<3>(3);
            trial.f += step(6);
            double c = cost(trial, world, centered);
            if (c < prev) {
                double rel = (prev - c) / std::max(prev, 1e-300);
                s = trial;
                bool small_step = step.norm() < opts.step_tol;
                prev = c;
                lambda = std::max(lambda * 0.25, 1e-12);
                accepted = true;
                if (rel < opts.rel_tol || small_step) {
                    converged = true;
                    return s;
                }
            } else {
                lambda *= 10.0;
            }
        }
        if (!accepted) {
            // Stalled; accept the current state as a local minimum.
            converged = true;
            return s;
        }
    }
    converged = true;  // ran out of iterations while still improving
    return s;
}

}  // namespace

ProjectionSolution solve_pnpf(const std::vector<Correspondence>& corr, int width, int height,
                              const SolveOptions& opts) {
    const std::size_t n = corr.size();
    if (n < 6) throw DegenerateConfiguration("solver needs at least 6 correspondences");

    std::vector<Vec3> world(n);
    std::vector<Vec2> centered(n);
    const Vec2 pp(width * 0.5, height * 0.5);
    Vec3 centroid = Vec3::Zero();
    for (std::size_t i = 0; i < n; ++i) {
        world[i] = corr[i].world;
        centered[i] = corr[i].image - pp;
        centroid += world[i];
    }
    centroid /= static_cast<double>(n);

    // Coplanarity/collinearity check via the singular values of the centered
    // point cloud; the projective focal ambiguity is unresolvable on a plane.
    Eigen::MatrixXd pts(n, 3);
    for (std::size_t i = 0; i < n; ++i) pts.row(i) = (world[i] - centroid).transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(pts);
    double smax = svd.singularValues()(0);
    double smin = svd.singularValues()(2);
    if (smax <= 0.0 || smin / smax < 1e-6)
        throw DegenerateConfiguration("world landmarks are (near-)coplanar");

    State s = dlt_init(world, centered);
    bool converged = false;
    s = refine(s, world, centered, opts, converged);

    double ssd = cost(s, world, centered);
    bool chirality_ok = std::isfinite(ssd) && s.f > 0.0;

    ProjectionSolution sol;
    sol.camera.rotation = s.r;
    sol.camera.translation = s.t;
    sol.camera.focal = s.f;
    sol.camera.principal_point = pp;
    sol.camera.width = width;
    sol.camera.height = height;
    sol.reprojection_rms_px = chirality_ok ? std::sqrt(ssd / static_cast<double>(n))
                                           : std::numeric_limits<double>::infinity();
    sol.scd_mm = (sol.camera.center() - centroid).norm();
    sol.pose_angles = decompose_zyx(s.r);
    double diag = std::hypot(static_cast<double>(width), static_cast<double>(height));
    sol.converged = converged && chirality_ok &&
                    sol.reprojection_rms_px <= opts.rms_fail_fraction * diag;
    return sol;
}

PoseAngles camera_to_pose_angles(const Mat3& camera_rotation, const Mat3& head_frame) {
    return decompose_zyx(camera_rotation * head_frame.transpose());
}

}  // namespace sfo
