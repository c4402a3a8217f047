#pragma once

#include <string>
#include <vector>

#include "sfo/geometry.hpp"

namespace sfo {

struct Correspondence {
    std::string landmark_name;
    Vec3 world;  // mm
    Vec2 image;  // px
};

struct ProjectionSolution {
    Pinhole camera;
    double scd_mm = 0.0;  // camera center to centroid of the world landmarks
    PoseAngles pose_angles;
    double reprojection_rms_px = 0.0;
    bool converged = false;
};

struct SolveOptions {
    int max_iterations = 80;
    // Convergence declared when the residual stops improving by this
    // relative amount or the step norm falls below step_tol.
    double rel_tol = 1e-14;
    double step_tol = 1e-12;
    // A solution whose RMS exceeds this fraction of the image diagonal is
    // reported unconverged.
    double rms_fail_fraction = 0.25;
};

// Recovers extrinsics plus focal length from n >= 6 correspondences with the
// principal point fixed at the image center, square pixels, zero skew.
// Linear initialization folds the focal into a 12-parameter projective fit;
// damped Gauss-Newton then refines rotation, translation and focal jointly.
// Throws DegenerateConfiguration for n < 6 or (near-)coplanar world points.
ProjectionSolution solve_pnpf(const std::vector<Correspondence>& corr, int width, int height,
                              const SolveOptions& opts = {});

// ZYX Tait-Bryan angles of the head frame relative to the camera:
// decompose(camera_rotation * head_frame^T).
PoseAngles camera_to_pose_angles(const Mat3& camera_rotation, const Mat3& head_frame);

}  // namespace sfo
