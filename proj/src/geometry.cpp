// Copyright 2026 The wmkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "wmkit/geometry.hpp"

#include <algorithm>
#include <cstddef>
#include <stdexcept>

namespace wmkit::geom {

Vec3 Vec3::normalized() const {
    const double n = norm();
    if (n < 1e-300) throw std::invalid_argument("Vec3::normalized: zero vector");
    return *this / n;
}

UnitQuaternion UnitQuaternion::from_wxyz(double w, double x, double y, double z) {
    UnitQuaternion q{w, x, y, z};
    const double n = q.norm();
    if (!(n > 1e-12)) throw std::invalid_argument("UnitQuaternion: near-zero norm");
    return q.normalized();
}

UnitQuaternion UnitQuaternion::from_axis_angle(const Vec3& axis, double angle) {
    const Vec3 u = axis.normalized();
    const double h = 0.5 * angle;
    const double s = std::sin(h);
    UnitQuaternion q{std::cos(h), u.x * s, u.y * s, u.z * s};
    return q.normalized();
}

UnitQuaternion UnitQuaternion::normalized() const {
    const double n = norm();
    if (!(n > 1e-12)) throw std::invalid_argument("UnitQuaternion: near-zero norm");
    UnitQuaternion q{w / n, x / n, y / n, z / n};
    if (q.w < 0.0) {
        q.w = -q.w;
        q.x = -q.x;
        q.y = -q.y;
        q.z = -q.z;
    }
    return q;
}

Vec3 UnitQuaternion::rotate(const Vec3& v) const {
    // v' = v + 2 u x (u x v + w v), u = (x, y, z).
    const Vec3 u{x, y, z};
    const Vec3 t = cross(u, Vec3{u.y * v.z - u.z * v.y + w * v.x,
                                 u.z * v.x - u.x * v.z + w * v.y,
                                 u.x * v.y - u.y * v.x + w * v.z});
    return {v.x + 2.0 * t.x, v.y + 2.0 * t.y, v.z + 2.0 * t.z};
}

std::array<double, 9> UnitQuaternion::to_matrix() const {
    const double xx = x * x, yy = y * y, zz = z * z;
    const double xy = x * y, xz = x * z, yz = y * z;
    const double wx = w * x, wy = w * y, wz = w * z;
    return {1.0 - 2.0 * (yy + zz), 2.0 * (xy - wz),       2.0 * (xz + wy),
            2.0 * (xy + wz),       1.0 - 2.0 * (xx + zz), 2.0 * (yz - wx),
            2.0 * (xz - wy),       2.0 * (yz + wx),       1.0 - 2.0 * (xx + yy)};
}

double angular_distance(const UnitQuaternion& a, const UnitQuaternion& b) {
    // atan2 form of the relative-rotation angle: exact for tiny angles where
    // the acos-of-dot formulation bottoms out near sqrt(machine epsilon).
    const UnitQuaternion r = a.conjugate() * b;
    const double v = std::sqrt(r.x * r.x + r.y * r.y + r.z * r.z);
    return 2.0 * std::atan2(v, std::abs(r.w));
}

Pose6DoF compose(const Pose6DoF& a, const Pose6DoF& b) {
    return {a.position + a.rotation.rotate(b.position), (a.rotation * b.rotation).normalized()};
}

Pose6DoF inverse(const Pose6DoF& p) {
    const UnitQuaternion inv = p.rotation.conjugate().normalized();
    return {inv.rotate(-p.position), inv};
}

Pose6DoF relative_pose(const Pose6DoF& world_a, const Pose6DoF& world_b) {
    return compose(inverse(world_a), world_b);
}

double ground_yaw(const Pose6DoF& camera) {
    const Vec3 f = camera.rotation.rotate(Vec3{0.0, 0.0, 1.0});
    const Vec2 g = ground_xy(f);  // (f.x, -f.z)
    if (g.norm() < 1e-12) return 0.0;
    return std::atan2(g.y, g.x);
}

UnitQuaternion camera_rotation(double yaw, double pitch) {
    // Identity rotation points the optical axis at local +Z, whose ground
    // heading is (0, -1), i.e. yaw -pi/2; offset so the result lands on yaw.
    const UnitQuaternion qy = UnitQuaternion::from_axis_angle({0.0, 1.0, 0.0}, yaw + M_PI_2);
    const UnitQuaternion qp = UnitQuaternion::from_axis_angle({1.0, 0.0, 0.0}, -pitch);
    return (qy * qp).normalized();
}

// ---------------------------------------------------------------------------

void CameraIntrinsics::validate() const {
    if (!(vertical_fov > 0.0) || !(vertical_fov < M_PI) || !std::isfinite(vertical_fov))
        throw std::invalid_argument("CameraIntrinsics: fov must be in (0, pi)");
    if (!(aspect_ratio > 0.0) || !std::isfinite(aspect_ratio))
        throw std::invalid_argument("CameraIntrinsics: aspect must be positive");
    if (!(near_plane > 0.0) || !std::isfinite(near_plane))
        throw std::invalid_argument("CameraIntrinsics: near must be positive");
    if (!(far_plane > near_plane) || !std::isfinite(far_plane))
        throw std::invalid_argument("CameraIntrinsics: far must exceed near");
}

double frustum_volume_analytic(const CameraIntrinsics& intr) {
    const double t = std::tan(0.5 * intr.vertical_fov);
    const double n = intr.near_plane, f = intr.far_plane;
    return (4.0 / 3.0) * t * t * intr.aspect_ratio * (f * f * f - n * n * n);
}

Frustum frustum_from_pose(const Pose6DoF& pose, const CameraIntrinsics& intr) {
    intr.validate();
    const double t = std::tan(0.5 * intr.vertical_fov);
    const double n = intr.near_plane, f = intr.far_plane;
    const double hn = n * t, wn = hn * intr.aspect_ratio;
    const double hf = f * t, wf = hf * intr.aspect_ratio;

    const std::array<Vec3, 8> local = {{{-wn, -hn, n},
                                        {wn, -hn, n},
                                        {wn, hn, n},
                                        {-wn, hn, n},
                                        {-wf, -hf, f},
                                        {wf, -hf, f},
                                        {wf, hf, f},
                                        {-wf, hf, f}}};

    // Side planes pass through the apex; their local normals tilt inward by
    // the half-angle of the corresponding fan.
    const double ch = 1.0 / std::sqrt(1.0 + t * t);                 // cos of vertical half-angle
    const double sh = t * ch;                                       // sin
    const double ta = t * intr.aspect_ratio;                        // horizontal half-tangent
    const double ca = 1.0 / std::sqrt(1.0 + ta * ta);
    const double sa = ta * ca;

    const std::array<Vec3, 6> local_normals = {{{0.0, 0.0, 1.0},    // near, inward = +z
                                                {0.0, 0.0, -1.0},   // far
                                                {ca, 0.0, sa},      // left
                                                {-ca, 0.0, sa},     // right
                                                {0.0, ch, sh},      // bottom
                                                {0.0, -ch, sh}}};   // top
    const std::array<Vec3, 6> local_points = {{{0.0, 0.0, n},
                                               {0.0, 0.0, f},
                                               {0.0, 0.0, 0.0},
                                               {0.0, 0.0, 0.0},
                                               {0.0, 0.0, 0.0},
                                               {0.0, 0.0, 0.0}}};

    Frustum out;
    for (std::size_t i = 0; i < 8; ++i)
        out.corners[i] = pose.position + pose.rotation.rotate(local[i]);
    for (std::size_t i = 0; i < 6; ++i) {
        const Vec3 nw = pose.rotation.rotate(local_normals[i]).normalized();
        const Vec3 pw = pose.position + pose.rotation.rotate(local_points[i]);
        out.planes[i] = Plane{nw, dot(nw, pw)};
    }
    return out;
}

bool point_in_frustum(const Frustum& f, const Vec3& p) {
    for (const Plane& pl : f.planes)
        if (pl.signed_distance(p) < 0.0) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Polytope machinery

namespace {

Vec3 newell_normal(const std::vector<Vec3>& poly) {
    Vec3 n;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec3& a = poly[i];
        const Vec3& b = poly[(i + 1) % poly.size()];
        n.x += (a.y - b.y) * (a.z + b.z);
        n.y += (a.z - b.z) * (a.x + b.x);
        n.z += (a.x - b.x) * (a.y + b.y);
    }
    return n;
}

double signed_volume(const std::vector<std::vector<Vec3>>& faces) {
    // Divergence theorem over a fan triangulation of each face; positive when
    // faces wind counter-clockwise seen from outside.
    double six_v = 0.0;
    for (const auto& face : faces) {
        if (face.size() < 3) continue;
        const Vec3& v0 = face[0];
        for (std::size_t i = 1; i + 1 < face.size(); ++i)
            six_v += dot(v0, cross(face[i], face[i + 1]));
    }
    return six_v / 6.0;
}

} // namespace

double ConvexPolytope::volume() const { return std::abs(signed_volume(faces)); }

double Frustum::volume() const { return polytope_from_frustum(*this).volume(); }

ConvexPolytope polytope_from_frustum(const Frustum& f) {
    const auto& c = f.corners;
    // Quads wound counter-clockwise seen from outside the solid.
    ConvexPolytope p;
    p.faces = {
        {c[0], c[3], c[2], c[1]},  // near (outside = -z side)
        {c[4], c[5], c[6], c[7]},  // far
        {c[0], c[4], c[7], c[3]},  // left
        {c[1], c[2], c[6], c[5]},  // right
        {c[0], c[1], c[5], c[4]},  // bottom
        {c[3], c[7], c[6], c[2]},  // top
    };
    return p;
}

ConvexPolytope clip_polytope(const ConvexPolytope& poly, const Plane& keep, double eps) {
    if (poly.empty()) return {};

    bool any_outside = false;
    bool any_inside = false;
    for (const auto& face : poly.faces) {
        for (const Vec3& v : face) {
            const double d = keep.signed_distance(v);
            if (d > eps) any_inside = true;
            if (d < -eps) any_outside = true;
        }
    }
    // Plane does not cut: either the whole solid survives (also when the
    // plane merely grazes a face, which must not spawn a duplicate cap) or
    // nothing of positive volume remains.
    if (!any_outside) return poly;
    if (!any_inside) return {};

    ConvexPolytope out;
    std::vector<Vec3> cap_points;

    for (const auto& face : poly.faces) {
        std::vector<Vec3> kept;
        kept.reserve(face.size() + 2);
        const std::size_t n = face.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Vec3& a = face[i];
            const Vec3& b = face[(i + 1) % n];
            const double da = keep.signed_distance(a);
            const double db = keep.signed_distance(b);
            const bool a_in = da >= -eps;
            const bool b_in = db >= -eps;
            if (a_in) {
                kept.push_back(a);
                if (std::abs(da) <= eps) cap_points.push_back(a);
            }
            // Strict crossing only; on-plane endpoints are handled above.
            if ((da > eps && db < -eps) || (da < -eps && db > eps)) {
                const double t = da / (da - db);
                const Vec3 p = a + (b - a) * t;
                kept.push_back(p);
                cap_points.push_back(p);
            }
            (void)b_in;
        }
        if (kept.size() >= 3) out.faces.push_back(std::move(kept));
    }

    if (out.faces.empty()) return {};

    // Deduplicate cap points, then ring-sort them around their centroid in
    // the cut plane so the cap is a simple polygon.
    std::vector<Vec3> cap;
    const double merge = std::max(eps * 16.0, 1e-12);
    for (const Vec3& p : cap_points) {
        bool dup = false;
        for (const Vec3& q : cap)
            if ((p - q).norm() <= merge) {
                dup = true;
                break;
            }
        if (!dup) cap.push_back(p);
    }

    if (cap.size() >= 3) {
        Vec3 centroid;
        for (const Vec3& p : cap) centroid = centroid + p;
        centroid = centroid / static_cast<double>(cap.size());

        // Plane basis.
        const Vec3 nrm = keep.normal;
        Vec3 u = std::abs(nrm.x) < 0.9 ? cross(nrm, Vec3{1, 0, 0}) : cross(nrm, Vec3{0, 1, 0});
        u = u.normalized();
        const Vec3 v = cross(nrm, u);

        std::sort(cap.begin(), cap.end(), [&](const Vec3& a, const Vec3& b) {
            const Vec3 da = a - centroid, db = b - centroid;
            return std::atan2(dot(da, v), dot(da, u)) < std::atan2(dot(db, v), dot(db, u));
        });

        // Cap is a boundary face of the kept half-space, so its outward
        // normal is -keep.normal.
        if (dot(newell_normal(cap), keep.normal) > 0.0) std::reverse(cap.begin(), cap.end());
        out.faces.push_back(std::move(cap));
    }

    // Degenerate slivers can survive the vertex test; treat near-zero volume
    // as empty so downstream ratios stay clean.
    if (out.volume() <= eps * eps * eps) return {};
    return out;
}

// ---------------------------------------------------------------------------

std::vector<PluckerRay> plucker_map(const Pose6DoF& rel, const CameraIntrinsics& intr,
                                    std::size_t height, std::size_t width) {
    intr.validate();
    if (height == 0 || width == 0)
        throw std::invalid_argument("plucker_map: empty image grid");

    const double t = std::tan(0.5 * intr.vertical_fov);
    const double ta = t * intr.aspect_ratio;

    std::vector<PluckerRay> rays;
    rays.reserve(height * width);
    for (std::size_t r = 0; r < height; ++r) {
        // Pixel centers; row 0 is the top of the image (+y in camera space).
        const double sy = 1.0 - 2.0 * (static_cast<double>(r) + 0.5) / static_cast<double>(height);
        for (std::size_t c = 0; c < width; ++c) {
            const double sx = 2.0 * (static_cast<double>(c) + 0.5) / static_cast<double>(width) - 1.0;
            const Vec3 local{sx * ta, sy * t, 1.0};
            const Vec3 d = rel.rotation.rotate(local).normalized();
            rays.push_back(PluckerRay{d, cross(rel.position, d)});
        }
    }
    return rays;
}

} // namespace wmkit::geom
