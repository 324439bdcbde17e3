// Copyright 2026 The wmkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wmkit/geometry.hpp"

// Trajectory and clip quality filtering: depth-reprojection consistency,
// motion-anomaly and speed statistics, threshold calibration on a reference
// corpus, caption/quality gating, and recording QA scans.
namespace wmkit::curation {

/// Per-frame depth grid in meters, row-major, row 0 at the top of the image.
/// Values are camera-space z (positive forward); non-finite or non-positive
/// cells are treated as holes.
struct DepthMap {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<double> data;

    bool empty() const { return data.empty(); }
    double at(std::size_t r, std::size_t c) const { return data[r * width + c]; }
};

struct ClipTrajectory {
    std::vector<geom::Pose6DoF> poses;      // camera pose per frame
    std::vector<double> timestamps;         // seconds, strictly increasing
    std::vector<DepthMap> depth;            // empty, or one map per frame
    geom::CameraIntrinsics intrinsics;

    bool has_depth() const { return !depth.empty(); }
    /// Throws std::invalid_argument on < 2 poses, length mismatches, or
    /// non-increasing timestamps.
    void validate() const;
};

struct QualityScores {
    double motion_smoothness = 0.0;
    double background_dynamics = 0.0;
    double scene_complexity = 0.0;
    double physics_plausibility = 0.0;
    double overall = 0.0;
};

struct TemporalSegment {
    double start_s = 0.0;
    double end_s = 0.0;
    std::string event;
    std::string camera_motion;
};

/// Four-tier clip annotation: narrative summary, static scene description,
/// dense temporal events, and quality scores on a 0..10 scale.
struct CaptionRecord {
    std::string narrative;
    std::string static_scene;
    std::vector<TemporalSegment> dense_temporal;  // sorted, non-overlapping
    QualityScores quality;

    /// Throws std::invalid_argument on out-of-range scores or overlapping or
    /// unsorted temporal segments.
    void validate() const;
};

struct SpeedBand {
    double v_lo = 0.0;  // m/s
    double v_hi = 0.0;
};

struct FilterThresholds {
    double max_reproj_err = 1.0;   // px, mean
    double max_disp_ratio = 10.0;  // unitless
    SpeedBand speed_band{0.0, 10.0};
    QualityScores min_quality;     // dimensions at 0 do not gate

    /// Throws std::invalid_argument unless v_lo < v_hi and all are >= 0.
    void validate() const;
};

struct CriterionResult {
    std::string name;       // reprojection | displacement | speed | quality
    bool evaluated = false; // false = skipped (e.g. no depth, no captions)
    bool pass = false;
    double measured = 0.0;  // statistic; quality uses the overall score
};

struct FilterReport {
    std::vector<CriterionResult> criteria;
    bool keep = false;                  // AND over evaluated criteria
    std::vector<std::string> reasons;   // names of failed criteria
    std::vector<std::string> notes;     // skipped criteria etc.
};

/// Pixel-sampling protocol for the reprojection check. Pixels are drawn from
/// a Halton (2,3) sequence, so runs are deterministic without an RNG seed.
struct ReprojectionParams {
    std::size_t sample_px = 512;  // samples per frame pair
    std::size_t stride = 3;       // compare frame t against t + stride
    double z_test_rel = 0.05;     // occlusion gate: |z_proj - z_map| / z_map
};

/// Mean forward-backward reprojection error in pixels. For each sampled
/// pixel of frame t: unproject via its depth, transform into frame
/// t + stride, project, bilinearly look up the target depth (discarding
/// occluded samples per the relative z-test), re-unproject with the looked-up
/// depth, transform back, and measure the pixel distance to the starting
/// pixel. Samples leaving the image or hitting depth holes are discarded;
/// the mean runs over all valid samples of all frame pairs. Throws
/// std::invalid_argument when depth is missing, stride is 0, or no frame
/// pair fits the clip.
double reprojection_error(const ClipTrajectory& clip, std::size_t sample_px = 512,
                          std::size_t stride = 3);
double reprojection_error(const ClipTrajectory& clip, const ReprojectionParams& params);

/// max ||dp_t|| / median ||dp_t|| over per-frame displacements; 1 when the
/// median is zero. Requires >= 3 poses.
double displacement_ratio(const ClipTrajectory& clip);

/// Median of per-step speed ||dp_t|| / dt_t in m/s. Requires >= 2 poses.
double median_speed(const ClipTrajectory& clip);

/// Evaluates reprojection (skipped without depth), displacement ratio, speed
/// band, and the quality gate (skipped without captions; only dimensions
/// with a positive minimum gate). keep is the conjunction of evaluated
/// criteria.
FilterReport apply_filters(const ClipTrajectory& clip,
                           const std::optional<CaptionRecord>& captions,
                           const FilterThresholds& th,
                           const ReprojectionParams& reproj = {});

struct CalibrationPercentiles {
    double reproj = 99.0;
    double ratio = 99.0;
    double speed_lo = 1.0;
    double speed_hi = 99.0;
};

/// Sets thresholds at nearest-rank percentiles of the per-clip statistics of
/// a trusted corpus. Clips without depth contribute no reprojection
/// statistic; if none have depth the reprojection threshold is +infinity.
/// min_quality is left all-zero (captions are not part of calibration).
/// Throws std::invalid_argument on fewer than 20 clips.
FilterThresholds calibrate_thresholds(const std::vector<ClipTrajectory>& ground_truth_clips,
                                      const CalibrationPercentiles& pct = {},
                                      const ReprojectionParams& reproj = {});

struct IdenticalRun {
    std::size_t start = 0;  // index of the first frame of the run
    std::size_t length = 0;
};

struct QaParams {
    std::size_t min_run_length = 3;   // identical-digest run worth reporting
    double outlier_factor = 8.0;      // displacement > factor x rolling median
    std::size_t median_window = 9;    // rolling window (odd), clamped at edges
};

struct QaReport {
    std::vector<IdenticalRun> identical_runs;
    std::vector<std::size_t> outlier_frames;    // repaired by interpolation
    std::vector<geom::Vec3> repaired_positions; // full trajectory, outliers fixed
    std::uint64_t missing_frames = 0;           // manifest count minus digests
    bool complete = false;                      // digest count == manifest
};

/// Scans a recording for frozen stretches (runs of identical consecutive
/// frame digests), isolated positional spikes (both incident displacements
/// exceed outlier_factor x the rolling median; repaired to the neighbor
/// midpoint), and missing frames against the manifest count. First and last
/// frames are never repaired.
QaReport qa_scan(const std::vector<std::uint64_t>& frame_digests, const ClipTrajectory& clip,
                 std::uint64_t manifest_expected, const QaParams& params = {});

} // namespace wmkit::curation
