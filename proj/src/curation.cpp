// Copyright 2026 The wmkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "wmkit/curation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace wmkit::curation {

using geom::Pose6DoF;
using geom::Vec3;

namespace {

double median_of(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median of empty sample");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Nearest-rank percentile: the ceil(p/100 * n)-th smallest value.
double nearest_rank(std::vector<double> v, double p) {
    if (v.empty()) throw std::invalid_argument("percentile of empty sample");
    std::sort(v.begin(), v.end());
    const auto n = static_cast<double>(v.size());
    auto idx = static_cast<std::size_t>(std::ceil(p / 100.0 * n));
    idx = std::clamp<std::size_t>(idx, 1, v.size());
    return v[idx - 1];
}

double halton(std::uint64_t index, std::uint64_t base) {
    double f = 1.0, r = 0.0;
    for (std::uint64_t i = index + 1; i > 0; i /= base) {
        f /= static_cast<double>(base);
        r += f * static_cast<double>(i % base);
    }
    return r;
}

struct Pinhole {
    double tan_v, tan_h;
    double w, h;

    Pinhole(const geom::CameraIntrinsics& intr, const DepthMap& map)
        : tan_v(std::tan(0.5 * intr.vertical_fov)),
          tan_h(std::tan(0.5 * intr.vertical_fov) * intr.aspect_ratio),
          w(static_cast<double>(map.width)),
          h(static_cast<double>(map.height)) {}

    Vec3 unproject(double row, double col, double z) const {
        const double sx = 2.0 * (col + 0.5) / w - 1.0;
        const double sy = 1.0 - 2.0 * (row + 0.5) / h;
        return {sx * tan_h * z, sy * tan_v * z, z};
    }

    // Continuous pixel coordinates; callers bound-check.
    bool project(const Vec3& p, double& row, double& col) const {
        if (!(p.z > 1e-12)) return false;
        const double sx = p.x / (p.z * tan_h);
        const double sy = p.y / (p.z * tan_v);
        col = (sx + 1.0) * w / 2.0 - 0.5;
        row = (1.0 - sy) * h / 2.0 - 0.5;
        return true;
    }
};

bool depth_valid(double z) { return std::isfinite(z) && z > 0.0; }

/// Bilinear depth at continuous (row, col); false on holes or out of range.
bool bilinear_depth(const DepthMap& map, double row, double col, double& out) {
    if (row < 0.0 || col < 0.0 || row > static_cast<double>(map.height - 1) ||
        col > static_cast<double>(map.width - 1))
        return false;
    auto r0 = static_cast<std::size_t>(row);
    auto c0 = static_cast<std::size_t>(col);
    if (r0 >= map.height - 1 && map.height > 1) r0 = map.height - 2;
    if (c0 >= map.width - 1 && map.width > 1) c0 = map.width - 2;
    const std::size_t r1 = map.height > 1 ? r0 + 1 : r0;
    const std::size_t c1 = map.width > 1 ? c0 + 1 : c0;
    const double fr = row - static_cast<double>(r0);
    const double fc = col - static_cast<double>(c0);
    const double z00 = map.at(r0, c0), z01 = map.at(r0, c1);
    const double z10 = map.at(r1, c0), z11 = map.at(r1, c1);
    if (!depth_valid(z00) || !depth_valid(z01) || !depth_valid(z10) || !depth_valid(z11))
        return false;
    out = (1 - fr) * ((1 - fc) * z00 + fc * z01) + fr * ((1 - fc) * z10 + fc * z11);
    return true;
}

} // namespace

void ClipTrajectory::validate() const {
    if (poses.size() < 2) throw std::invalid_argument("ClipTrajectory: need >= 2 poses");
    if (timestamps.size() != poses.size())
        throw std::invalid_argument("ClipTrajectory: timestamps/poses length mismatch");
    for (std::size_t i = 1; i < timestamps.size(); ++i)
        if (!(timestamps[i] > timestamps[i - 1]))
            throw std::invalid_argument("ClipTrajectory: timestamps not strictly increasing");
    if (!depth.empty()) {
        if (depth.size() != poses.size())
            throw std::invalid_argument("ClipTrajectory: depth/poses length mismatch");
        for (const DepthMap& m : depth)
            if (m.height == 0 || m.width == 0 || m.data.size() != m.height * m.width ||
                m.height != depth[0].height || m.width != depth[0].width)
                throw std::invalid_argument("ClipTrajectory: inconsistent depth grids");
    }
    intrinsics.validate();
}

void CaptionRecord::validate() const {
    const double scores[5] = {quality.motion_smoothness, quality.background_dynamics,
                              quality.scene_complexity, quality.physics_plausibility,
                              quality.overall};
    for (double s : scores)
        if (!(s >= 0.0) || !(s <= 10.0))
            throw std::invalid_argument("CaptionRecord: quality score outside [0, 10]");
    for (std::size_t i = 0; i < dense_temporal.size(); ++i) {
        const TemporalSegment& seg = dense_temporal[i];
        if (!(seg.start_s < seg.end_s))
            throw std::invalid_argument("CaptionRecord: empty or inverted temporal segment");
        if (i > 0 && seg.start_s < dense_temporal[i - 1].end_s)
            throw std::invalid_argument("CaptionRecord: overlapping temporal segments");
    }
}

void FilterThresholds::validate() const {
    // v_lo == v_hi is allowed: calibration on a degenerate corpus produces a
    // zero-width band.
    if (std::isnan(max_reproj_err) || std::isnan(max_disp_ratio) || std::isnan(speed_band.v_lo) ||
        std::isnan(speed_band.v_hi))
        throw std::invalid_argument("FilterThresholds: NaN threshold");
    if (max_reproj_err < 0.0 || max_disp_ratio < 0.0 || speed_band.v_lo < 0.0 ||
        speed_band.v_hi < 0.0)
        throw std::invalid_argument("FilterThresholds: negative threshold");
    if (speed_band.v_lo > speed_band.v_hi)
        throw std::invalid_argument("FilterThresholds: inverted speed band");
}

double reprojection_error(const ClipTrajectory& clip, std::size_t sample_px,
                          std::size_t stride) {
    ReprojectionParams p;
    p.sample_px = sample_px;
    p.stride = stride;
    return reprojection_error(clip, p);
}

double reprojection_error(const ClipTrajectory& clip, const ReprojectionParams& params) {
    clip.validate();
    if (!clip.has_depth()) throw std::invalid_argument("reprojection_error: depth required");
    if (params.stride == 0) throw std::invalid_argument("reprojection_error: stride must be >= 1");
    if (params.sample_px == 0)
        throw std::invalid_argument("reprojection_error: sample_px must be >= 1");
    if (clip.poses.size() <= params.stride)
        throw std::invalid_argument("reprojection_error: stride leaves no frame pair");

    const Pinhole cam(clip.intrinsics, clip.depth[0]);
    const auto height = clip.depth[0].height;
    const auto width = clip.depth[0].width;

    double err_sum = 0.0;
    std::uint64_t valid = 0;

    for (std::size_t t = 0; t + params.stride < clip.poses.size(); ++t) {
        const std::size_t u = t + params.stride;
        const Pose6DoF to_target = geom::inverse(clip.poses[u]);
        const Pose6DoF to_source = geom::inverse(clip.poses[t]);
        const DepthMap& dsrc = clip.depth[t];
        const DepthMap& dtgt = clip.depth[u];

        for (std::size_t k = 0; k < params.sample_px; ++k) {
            const auto col = static_cast<std::size_t>(halton(k, 2) * static_cast<double>(width));
            const auto row = static_cast<std::size_t>(halton(k, 3) * static_cast<double>(height));
            const double z0 = dsrc.at(row, col);
            if (!depth_valid(z0)) continue;

            const Vec3 local0 =
                cam.unproject(static_cast<double>(row), static_cast<double>(col), z0);
            const Vec3 world = clip.poses[t].position + clip.poses[t].rotation.rotate(local0);
            const Vec3 in_tgt = to_target.rotation.rotate(world) + to_target.position;

            double prow, pcol;
            if (!cam.project(in_tgt, prow, pcol)) continue;
            double z_map;
            if (!bilinear_depth(dtgt, prow, pcol, z_map)) continue;
            if (std::abs(in_tgt.z - z_map) / z_map > params.z_test_rel) continue;  // occluded

            const Vec3 local1 = cam.unproject(prow, pcol, z_map);
            const Vec3 world1 = clip.poses[u].position + clip.poses[u].rotation.rotate(local1);
            const Vec3 back = to_source.rotation.rotate(world1) + to_source.position;
            double brow, bcol;
            if (!cam.project(back, brow, bcol)) continue;

            err_sum += std::hypot(brow - static_cast<double>(row), bcol - static_cast<double>(col));
            ++valid;
        }
    }
    return valid == 0 ? 0.0 : err_sum / static_cast<double>(valid);
}

double displacement_ratio(const ClipTrajectory& clip) {
    clip.validate();
    if (clip.poses.size() < 3)
        throw std::invalid_argument("displacement_ratio: need >= 3 poses");
    std::vector<double> disp(clip.poses.size() - 1);
    for (std::size_t t = 0; t + 1 < clip.poses.size(); ++t)
        disp[t] = (clip.poses[t + 1].position - clip.poses[t].position).norm();
    const double med = median_of(disp);
    if (med == 0.0) return 1.0;
    return *std::max_element(disp.begin(), disp.end()) / med;
}

double median_speed(const ClipTrajectory& clip) {
    clip.validate();
    std::vector<double> speeds(clip.poses.size() - 1);
    for (std::size_t t = 0; t + 1 < clip.poses.size(); ++t)
        speeds[t] = (clip.poses[t + 1].position - clip.poses[t].position).norm() /
                    (clip.timestamps[t + 1] - clip.timestamps[t]);
    return median_of(speeds);
}

FilterReport apply_filters(const ClipTrajectory& clip,
                           const std::optional<CaptionRecord>& captions,
                           const FilterThresholds& th, const ReprojectionParams& reproj) {
    clip.validate();
    th.validate();
    if (captions) captions->validate();

    FilterReport report;
    auto add = [&report](const char* name, bool evaluated, bool pass, double measured) {
        report.criteria.push_back({name, evaluated, pass, measured});
        if (evaluated && !pass) report.reasons.push_back(name);
    };

    if (clip.has_depth()) {
        const double err = reprojection_error(clip, reproj);
        add("reprojection", true, err <= th.max_reproj_err, err);
    } else {
        add("reprojection", false, false, 0.0);
        report.notes.push_back("reprojection skipped: no depth maps");
    }

    if (clip.poses.size() >= 3) {
        const double ratio = displacement_ratio(clip);
        add("displacement", true, ratio <= th.max_disp_ratio, ratio);
    } else {
        add("displacement", false, false, 0.0);
        report.notes.push_back("displacement skipped: fewer than 3 poses");
    }

    const double speed = median_speed(clip);
    add("speed", true, speed >= th.speed_band.v_lo && speed <= th.speed_band.v_hi, speed);

    if (captions) {
        const QualityScores& q = captions->quality;
        const QualityScores& m = th.min_quality;
        const bool pass = (m.motion_smoothness <= 0.0 || q.motion_smoothness >= m.motion_smoothness) &&
                          (m.background_dynamics <= 0.0 || q.background_dynamics >= m.background_dynamics) &&
                          (m.scene_complexity <= 0.0 || q.scene_complexity >= m.scene_complexity) &&
                          (m.physics_plausibility <= 0.0 || q.physics_plausibility >= m.physics_plausibility) &&
                          (m.overall <= 0.0 || q.overall >= m.overall);
        add("quality", true, pass, q.overall);
    } else {
        add("quality", false, false, 0.0);
        report.notes.push_back("quality skipped: no caption record");
    }

    report.keep = true;
    for (const CriterionResult& c : report.criteria)
        if (c.evaluated && !c.pass) report.keep = false;
    return report;
}

FilterThresholds calibrate_thresholds(const std::vector<ClipTrajectory>& ground_truth_clips,
                                      const CalibrationPercentiles& pct,
                                      const ReprojectionParams& reproj) {
    if (ground_truth_clips.size() < 20)
        throw std::invalid_argument("calibrate_thresholds: need >= 20 clips");

    std::vector<double> reprojs, ratios, speeds;
    for (const ClipTrajectory& clip : ground_truth_clips) {
        clip.validate();
        if (clip.has_depth()) reprojs.push_back(reprojection_error(clip, reproj));
        if (clip.poses.size() >= 3) ratios.push_back(displacement_ratio(clip));
        speeds.push_back(median_speed(clip));
    }

    FilterThresholds th;
    th.max_reproj_err = reprojs.empty() ? std::numeric_limits<double>::infinity()
                                        : nearest_rank(reprojs, pct.reproj);
    th.max_disp_ratio = ratios.empty() ? std::numeric_limits<double>::infinity()
                                       : nearest_rank(ratios, pct.ratio);
    th.speed_band = {nearest_rank(speeds, pct.speed_lo), nearest_rank(speeds, pct.speed_hi)};
    th.min_quality = {};
    return th;
}

QaReport qa_scan(const std::vector<std::uint64_t>& frame_digests, const ClipTrajectory& clip,
                 std::uint64_t manifest_expected, const QaParams& params) {
    QaReport report;

    // (a) frozen-recorder detection: maximal runs of identical digests.
    std::size_t run_start = 0;
    for (std::size_t i = 1; i <= frame_digests.size(); ++i) {
        if (i == frame_digests.size() || frame_digests[i] != frame_digests[run_start]) {
            const std::size_t len = i - run_start;
            if (len >= params.min_run_length && params.min_run_length > 0)
                report.identical_runs.push_back({run_start, len});
            run_start = i;
        }
    }

    // (b) isolated positional spikes against a rolling displacement median.
    const std::size_t n = clip.poses.size();
    report.repaired_positions.resize(n);
    for (std::size_t i = 0; i < n; ++i) report.repaired_positions[i] = clip.poses[i].position;
    if (n >= 3) {
        std::vector<double> disp(n - 1);
        for (std::size_t t = 0; t + 1 < n; ++t)
            disp[t] = (clip.poses[t + 1].position - clip.poses[t].position).norm();

        const std::size_t half = std::max<std::size_t>(params.median_window, 1) / 2;
        auto rolling = [&](std::size_t t) {
            const std::size_t lo = t > half ? t - half : 0;
            const std::size_t hi = std::min(disp.size() - 1, t + half);
            return median_of({disp.begin() + static_cast<std::ptrdiff_t>(lo),
                              disp.begin() + static_cast<std::ptrdiff_t>(hi) + 1});
        };
        constexpr double kTiny = 1e-12;
        for (std::size_t k = 1; k + 1 < n; ++k) {
            const double gate_in = params.outlier_factor * std::max(rolling(k - 1), kTiny);
            const double gate_out = params.outlier_factor * std::max(rolling(k), kTiny);
            if (disp[k - 1] > gate_in && disp[k] > gate_out) report.outlier_frames.push_back(k);
        }
        for (std::size_t k : report.outlier_frames)
            report.repaired_positions[k] =
                (clip.poses[k - 1].position + clip.poses[k + 1].position) * 0.5;
    }

    // (c) completeness against the manifest.
    const auto have = static_cast<std::uint64_t>(frame_digests.size());
    report.missing_frames = manifest_expected > have ? manifest_expected - have : 0;
    report.complete = manifest_expected == have;
    return report;
}

} // namespace wmkit::curation
