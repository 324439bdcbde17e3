// Copyright 2026 The wmkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "wmkit/actions.hpp"
#include "wmkit/geometry.hpp"
#include "wmkit/retrieval.hpp"
#include "wmkit/trainkit.hpp"

// Multi-segment autoregressive rollout planning: segment scheduling, tail
// handoff of past frames, per-segment memory retrieval against a predicted
// camera viewpoint, sink initialization, and a deterministic stub generator
// standing in for the denoising model.
namespace wmkit::streaming {

struct Segment {
    std::size_t index = 0;
    std::size_t current_len = 0;
    std::uint64_t start_frame = 0;
    trainkit::ContextMode mode = trainkit::ContextMode::standard;
};

struct RolloutPlan {
    std::vector<Segment> segments;
    trainkit::ContextLayout layout;
    std::uint64_t seed = 0;
};

/// Segment 0 runs i2v with i2v_current_len frames from frame 0; segments
/// 1..k-1 run standard with current_len frames, each starting where the
/// previous ended. Throws std::invalid_argument when k is outside
/// [1, max_segments].
RolloutPlan plan_rollout(std::size_t k, const trainkit::ContextLayout& layout,
                         std::uint64_t seed, std::size_t max_segments = 6);

/// Total frames the plan will emit.
std::uint64_t planned_frames(const RolloutPlan& plan);

struct GeneratedFrame {
    trainkit::LatentFrame latent;
    geom::Pose6DoF camera_pose;
};

/// Everything a generator needs for one segment. `first_pose` is the
/// camera pose of the segment's first current frame, extrapolated
/// kinematically by the planner (it doubles as the retrieval query pose);
/// `actions[i]` commands the step from frame start_frame + i to its
/// successor, so the slice's last action is consumed by the next segment.
struct GeneratorRequest {
    const trainkit::AssembledContext& context;
    std::vector<actions::ActionVector> actions;
    geom::Pose6DoF first_pose;
    std::uint64_t start_frame = 0;
    std::uint64_t seed = 0;
};

/// Returns exactly current_len generated frames, deterministic per seed.
using Generator = std::function<std::vector<GeneratedFrame>(const GeneratorRequest&)>;

struct SegmentTrace {
    std::size_t segment_index = 0;
    std::vector<std::uint64_t> retrieved_indices;  // pool entries fed as memory
    std::vector<double> retrieved_scores;
    bool sink_retrieved = false;
    std::vector<std::uint64_t> past_indices;       // tail frames handed off
    std::vector<std::uint64_t> generated_indices;
    std::size_t pool_size = 0;                     // after the update
};

struct StreamTrace {
    std::vector<SegmentTrace> segments;
};

struct StreamConfig {
    geom::CameraIntrinsics intrinsics{1.0471975511965976, 16.0 / 9.0, 0.3, 12.0};
    double speed = 1.5;           // m/s commanded by movement actions
    double dt = 0.2;              // seconds per latent frame
    retrieval::Scorer scorer = retrieval::Scorer::exact;
    std::uint64_t n_samples = 4096;
    std::size_t latent_dim = 8;   // stub latent width
};

/// Ground-plane kinematic step: move speed*dt along the action's direction
/// in the camera's yaw frame (diagonals normalized); IDLE and rotation are
/// untouched.
geom::Pose6DoF advance_pose(const geom::Pose6DoF& pose, const actions::ActionVector& action,
                            double speed, double dt);

/// In-flight rollout state. `frames[i]` always holds global frame index i.
struct StreamState {
    RolloutPlan plan;
    StreamConfig config;
    GeneratedFrame reference;            // i2v conditioning frame (frame 0 viewpoint)
    std::vector<GeneratedFrame> frames;  // generated so far, contiguous from 0
    std::vector<actions::ActionVector> script;  // one action per planned frame
    std::size_t next_segment = 0;
};

/// Prepares a rollout: validates that the script covers every planned frame
/// (extra tail actions are ignored) and that the reference latent matches
/// config.latent_dim. Throws std::invalid_argument on violations.
StreamState make_stream(const RolloutPlan& plan, const StreamConfig& config,
                        const GeneratedFrame& reference,
                        const std::vector<actions::ActionVector>& script);

/// Runs the next planned segment: extrapolates the query viewpoint from the
/// last pose and the action script, retrieves memory_len entries from the
/// pool (plus the appended sink) for standard segments, assembles the
/// context window (inference settings: no masking, no error injection),
/// invokes the generator, appends its frames, and inserts their (index,
/// pose) records into the pool. Throws std::runtime_error when the plan is
/// exhausted or the generator returns a wrong-length segment.
SegmentTrace step_segment(StreamState& state, const Generator& generator,
                          retrieval::MemoryPool& pool);

/// Executes every segment in order against a fresh unbounded pool. Returns
/// the concatenated frames and the full trace.
std::pair<std::vector<GeneratedFrame>, StreamTrace> run_stream(
    const RolloutPlan& plan, const StreamConfig& config, const GeneratedFrame& reference,
    const std::vector<actions::ActionVector>& script, const Generator& generator);

/// Deterministic stand-in for the denoising model: latent values are a pure
/// function of (context digest, actions, seed); camera poses advance
/// kinematically from first_pose under the action script.
Generator make_stub_generator(const StreamConfig& config);

} // namespace wmkit::streaming
