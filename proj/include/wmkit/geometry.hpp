// Copyright 2026 The wmkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

// Double-precision 6-DoF pose algebra, camera frustum construction and
// Plücker ray encoding.
//
// Conventions (fixed here, adapters map engine data onto them):
//   * World frame is right-handed with +Y up.
//   * Camera-local axes: +X right, +Y up, +Z forward (optical axis).
//   * Ground-plane 2D coordinates of a world point are (x, -z); with this
//     embedding a yaw rotation about +Y by angle t (right-hand rule,
//     measured from +X) has ground heading (cos t, sin t), and the
//     forward/right basis below is literal:
//         f = (cos t, sin t),   r = (sin t, -cos t)
//     where r is the camera's physical right.
namespace wmkit::geom {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double norm() const { return std::hypot(x, y); }
};

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator-() const { return {-x, -y, -z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    Vec3 normalized() const;
    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }
inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

/// Unit quaternion in wxyz order, kept sign-canonical (w >= 0) so that
/// equality comparisons are well defined.
struct UnitQuaternion {
    double w = 1.0;
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    static UnitQuaternion identity() { return {1.0, 0.0, 0.0, 0.0}; }

    /// Builds from raw components, normalizing and sign-canonicalizing.
    /// Throws std::invalid_argument on a near-zero quaternion.
    static UnitQuaternion from_wxyz(double w, double x, double y, double z);

    /// Rotation of `angle` radians about `axis` (right-hand rule).
    static UnitQuaternion from_axis_angle(const Vec3& axis, double angle);

    double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

    /// Renormalized, w >= 0 copy. ||result|| = 1 within 1e-12.
    UnitQuaternion normalized() const;

    UnitQuaternion conjugate() const { return {w, -x, -y, -z}; }

    // Hamilton product; not renormalized (callers that chain compose poses
    // renormalize through Pose operations).
    UnitQuaternion operator*(const UnitQuaternion& o) const {
        return {w * o.w - x * o.x - y * o.y - z * o.z,
                w * o.x + x * o.w + y * o.z - z * o.y,
                w * o.y - x * o.z + y * o.w + z * o.x,
                w * o.z + x * o.y - y * o.x + z * o.w};
    }

    Vec3 rotate(const Vec3& v) const;

    /// Row-major 3x3 rotation matrix.
    std::array<double, 9> to_matrix() const;
};

/// Angle in radians of the relative rotation between a and b, in [0, pi].
double angular_distance(const UnitQuaternion& a, const UnitQuaternion& b);

struct Pose6DoF {
    Vec3 position;
    UnitQuaternion rotation;

    static Pose6DoF identity() { return {{}, UnitQuaternion::identity()}; }
};

/// Applies b then a, i.e. (a ∘ b)(v) = a(b(v)). Rotation renormalized.
Pose6DoF compose(const Pose6DoF& a, const Pose6DoF& b);

Pose6DoF inverse(const Pose6DoF& p);

/// b expressed in a's frame: compose(world_a, result) == world_b.
Pose6DoF relative_pose(const Pose6DoF& world_a, const Pose6DoF& world_b);

// ---------------------------------------------------------------------------
// Ground-plane yaw convention

struct YawBasis {
    Vec2 forward;
    Vec2 right;
};

/// f = (cos t, sin t), r = (sin t, -cos t).
inline YawBasis yaw_basis(double yaw) {
    const double c = std::cos(yaw);
    const double s = std::sin(yaw);
    return {{c, s}, {s, -c}};
}

inline Vec2 ground_xy(const Vec3& world) { return {world.x, -world.z}; }
inline Vec3 ground_to_world(const Vec2& ground, double height) {
    return {ground.x, height, -ground.y};
}

/// Ground-plane yaw of the camera's forward axis. Undefined (returns 0)
/// for a camera looking straight up or down.
double ground_yaw(const Pose6DoF& camera);

/// Rotation whose ground heading is `yaw` and whose pitch above the ground
/// plane is `pitch` (positive = looking up).
UnitQuaternion camera_rotation(double yaw, double pitch = 0.0);

// ---------------------------------------------------------------------------
// Camera frustums

struct CameraIntrinsics {
    double vertical_fov = 1.0;  // radians, in (0, pi)
    double aspect_ratio = 1.0;  // width / height, > 0
    double near_plane = 0.1;    // m, > 0
    double far_plane = 100.0;   // m, finite, > near

    /// Throws std::invalid_argument when any invariant is violated.
    void validate() const;
};

/// Half-space boundary with inward-facing unit normal: a point p is on the
/// inside iff signed_distance(p) >= 0.
struct Plane {
    Vec3 normal;
    double offset = 0.0;  // dot(normal, p) == offset on the plane

    double signed_distance(const Vec3& p) const { return dot(normal, p) - offset; }
};

/// Truncated-pyramid view volume. Planes are authoritative for containment,
/// corners for volume and clipping. Corner order: near quad then far quad,
/// each (-x,-y), (+x,-y), (+x,+y), (-x,+y) in camera-local axes.
struct Frustum {
    std::array<Plane, 6> planes;  // near, far, left, right, bottom, top
    std::array<Vec3, 8> corners;

    double volume() const;
};

/// Analytic volume (4/3) tan^2(fov/2) aspect (far^3 - near^3).
double frustum_volume_analytic(const CameraIntrinsics& intr);

Frustum frustum_from_pose(const Pose6DoF& pose, const CameraIntrinsics& intr);

/// True iff p satisfies all six half-spaces; boundary counts as inside.
bool point_in_frustum(const Frustum& f, const Vec3& p);

// ---------------------------------------------------------------------------
// Convex polytopes (frustum intersection support)

/// Closed convex polytope as a face soup. Faces are planar polygons whose
/// vertex order is counter-clockwise when seen from outside, so the signed
/// divergence-theorem volume is positive.
struct ConvexPolytope {
    std::vector<std::vector<Vec3>> faces;

    bool empty() const { return faces.empty(); }
    double volume() const;
};

ConvexPolytope polytope_from_frustum(const Frustum& f);

/// Clips the polytope against the half-space signed_distance >= 0, adding a
/// cap face where the plane cuts. `eps` is the on-plane tolerance. Returns
/// an empty polytope when nothing of positive volume remains.
ConvexPolytope clip_polytope(const ConvexPolytope& poly, const Plane& keep, double eps);

// ---------------------------------------------------------------------------
// Plücker rays

/// Line through `origin` with unit `direction`; moment = origin x direction,
/// so dot(moment, direction) == 0.
struct PluckerRay {
    Vec3 direction;
    Vec3 moment;
};

/// One ray per pixel center, row-major, rows top to bottom (row 0 maps to
/// +y in camera space), for the camera `rel` expressed in a reference frame.
std::vector<PluckerRay> plucker_map(const Pose6DoF& rel, const CameraIntrinsics& intr,
                                    std::size_t height, std::size_t width);

} // namespace wmkit::geom
