// Copyright 2026 The wmkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "wmkit/streaming.hpp"

#include <cmath>
#include <stdexcept>

#include "wmkit/digest.hpp"
#include "wmkit/rng.hpp"

namespace wmkit::streaming {

RolloutPlan plan_rollout(std::size_t k, const trainkit::ContextLayout& layout,
                         std::uint64_t seed, std::size_t max_segments) {
    if (k < 1 || k > max_segments)
        throw std::invalid_argument("plan_rollout: segment count out of bounds");
    layout.validate();
    RolloutPlan plan;
    plan.layout = layout;
    plan.seed = seed;
    std::uint64_t start = 0;
    for (std::size_t i = 0; i < k; ++i) {
        Segment seg;
        seg.index = i;
        seg.mode = i == 0 ? trainkit::ContextMode::i2v : trainkit::ContextMode::standard;
        seg.current_len = i == 0 ? layout.i2v_current_len : layout.current_len;
        seg.start_frame = start;
        start += seg.current_len;
        plan.segments.push_back(seg);
    }
    return plan;
}

std::uint64_t planned_frames(const RolloutPlan& plan) {
    std::uint64_t total = 0;
    for (const auto& seg : plan.segments) total += seg.current_len;
    return total;
}

geom::Pose6DoF advance_pose(const geom::Pose6DoF& pose, const actions::ActionVector& action,
                            double speed, double dt) {
    const double n = (action.forward ? 1.0 : 0.0) - (action.backward ? 1.0 : 0.0);
    const double e = (action.right ? 1.0 : 0.0) - (action.left ? 1.0 : 0.0);
    if (n == 0.0 && e == 0.0) return pose;
    const auto basis = geom::yaw_basis(geom::ground_yaw(pose));
    geom::Vec2 dir{n * basis.forward.x + e * basis.right.x,
                   n * basis.forward.y + e * basis.right.y};
    const double len = std::hypot(dir.x, dir.y);
    const double scale = speed * dt / len;
    const geom::Vec2 ground = geom::ground_xy(pose.position);
    geom::Pose6DoF out = pose;
    out.position =
        geom::ground_to_world({ground.x + dir.x * scale, ground.y + dir.y * scale},
                              pose.position.y);
    return out;
}

StreamState make_stream(const RolloutPlan& plan, const StreamConfig& config,
                        const GeneratedFrame& reference,
                        const std::vector<actions::ActionVector>& script) {
    if (plan.segments.empty()) throw std::invalid_argument("make_stream: empty plan");
    config.intrinsics.validate();
    if (config.latent_dim == 0)
        throw std::invalid_argument("make_stream: latent_dim must be >= 1");
    if (!(config.speed > 0.0) || !(config.dt > 0.0))
        throw std::invalid_argument("make_stream: speed and dt must be positive");
    if (reference.latent.values.size() != config.latent_dim)
        throw std::invalid_argument("make_stream: reference latent dimension mismatch");
    if (plan.segments.size() > 1 && plan.layout.past_len > plan.layout.i2v_current_len)
        throw std::invalid_argument(
            "make_stream: past_len exceeds the first segment's frame count");
    const std::uint64_t total = planned_frames(plan);
    if (script.size() < total)
        throw std::invalid_argument("make_stream: action script does not cover all frames");
    StreamState state;
    state.plan = plan;
    state.config = config;
    state.reference = reference;
    state.script.assign(script.begin(), script.begin() + static_cast<std::ptrdiff_t>(total));
    return state;
}

namespace {

std::uint64_t context_digest(const trainkit::AssembledContext& ctx) {
    std::uint64_t h = digest::kFnvOffset;
    for (const auto& frame : ctx.sequence) {
        h = digest::mix_u64(frame.frame_index, h);
        h = digest::mix_u64(static_cast<std::uint64_t>(frame.role), h);
        for (const double v : frame.values) h = digest::mix_double(v, h);
    }
    return h;
}

std::uint64_t actions_digest(const std::vector<actions::ActionVector>& acts,
                             std::uint64_t h) {
    for (const auto& a : acts) {
        const std::uint64_t bits = (a.forward ? 1u : 0u) | (a.backward ? 2u : 0u) |
                                   (a.left ? 4u : 0u) | (a.right ? 8u : 0u) |
                                   (a.jump ? 16u : 0u) | (a.attack ? 32u : 0u);
        h = digest::mix_u64(bits, h);
    }
    return h;
}

} // namespace

SegmentTrace step_segment(StreamState& state, const Generator& generator,
                          retrieval::MemoryPool& pool) {
    if (state.next_segment >= state.plan.segments.size())
        throw std::runtime_error("step_segment: plan exhausted");
    const Segment& seg = state.plan.segments[state.next_segment];
    const auto& layout = state.plan.layout;
    const auto& cfg = state.config;

    // Predicted viewpoint of the first current frame: last generated pose
    // advanced by the action that commands the step into this segment.
    geom::Pose6DoF first_pose;
    if (seg.index == 0) {
        first_pose = state.reference.camera_pose;
    } else {
        const auto& prev_action = state.script[seg.start_frame - 1];
        first_pose = advance_pose(state.frames.back().camera_pose, prev_action, cfg.speed,
                                  cfg.dt);
    }

    SegmentTrace trace;
    trace.segment_index = seg.index;

    // Inference-time assembly: no conditioning dropout, no error injection.
    trainkit::ContextLayout effective = layout;
    effective.mask_prob = 0.0;

    std::vector<trainkit::LatentFrame> memory;
    std::vector<trainkit::LatentFrame> past;
    if (seg.mode == trainkit::ContextMode::i2v) {
        trainkit::LatentFrame ref = state.reference.latent;
        ref.role = trainkit::FrameRole::reference;
        past.push_back(std::move(ref));
    } else {
        const retrieval::CameraView query{first_pose, cfg.intrinsics};
        const auto result =
            retrieval::retrieve(query, seg.start_frame, pool, layout.memory_len, cfg.scorer,
                                cfg.n_samples, rng::derive_seed(state.plan.seed, 3 * seg.index + 2));
        for (const auto& scored : result.selected) {
            trace.retrieved_indices.push_back(scored.entry.frame_index);
            trace.retrieved_scores.push_back(scored.score);
            if (scored.entry.is_sink) trace.sink_retrieved = true;
            trainkit::LatentFrame mem = state.frames[scored.entry.frame_index].latent;
            mem.role = trainkit::FrameRole::memory;
            memory.push_back(std::move(mem));
        }
        // The sink arrives as an extra appended slot; size the window to
        // whatever retrieval produced.
        effective.memory_len = memory.size();

        for (std::uint64_t g = seg.start_frame - layout.past_len; g < seg.start_frame; ++g) {
            trace.past_indices.push_back(g);
            trainkit::LatentFrame pf = state.frames[g].latent;
            pf.role = trainkit::FrameRole::past;
            past.push_back(std::move(pf));
        }
    }

    std::vector<trainkit::LatentFrame> placeholders(seg.current_len);
    for (std::size_t i = 0; i < seg.current_len; ++i) {
        placeholders[i].values.assign(cfg.latent_dim, 0.0);
        placeholders[i].frame_index = seg.start_frame + i;
        placeholders[i].role = trainkit::FrameRole::current;
    }

    const auto context = trainkit::assemble_context(
        memory, past, placeholders, effective, seg.mode, nullptr, 0.0, 0.0,
        rng::derive_seed(state.plan.seed, 3 * seg.index), 1.0);

    GeneratorRequest request{context,
                             {state.script.begin() + static_cast<std::ptrdiff_t>(seg.start_frame),
                              state.script.begin() +
                                  static_cast<std::ptrdiff_t>(seg.start_frame + seg.current_len)},
                             first_pose,
                             seg.start_frame,
                             rng::derive_seed(state.plan.seed, 3 * seg.index + 1)};
    auto generated = generator(request);
    if (generated.size() != seg.current_len)
        throw std::runtime_error("step_segment: generator returned wrong frame count");

    std::vector<retrieval::MemoryEntry> batch;
    batch.reserve(generated.size());
    for (std::size_t i = 0; i < generated.size(); ++i) {
        const std::uint64_t g = seg.start_frame + i;
        generated[i].latent.frame_index = g;
        trace.generated_indices.push_back(g);
        retrieval::MemoryEntry entry;
        entry.frame_index = g;
        entry.pose = generated[i].camera_pose;
        entry.intrinsics = cfg.intrinsics;
        entry.payload_id = "frame-" + std::to_string(g);
        entry.is_sink = g == 0;  // the stream's first frame anchors appearance
        batch.push_back(std::move(entry));
        state.frames.push_back(std::move(generated[i]));
    }
    pool.update(batch);
    trace.pool_size = pool.size();
    ++state.next_segment;
    return trace;
}

std::pair<std::vector<GeneratedFrame>, StreamTrace> run_stream(
    const RolloutPlan& plan, const StreamConfig& config, const GeneratedFrame& reference,
    const std::vector<actions::ActionVector>& script, const Generator& generator) {
    StreamState state = make_stream(plan, config, reference, script);
    retrieval::MemoryPool pool(std::nullopt);
    StreamTrace trace;
    for (std::size_t i = 0; i < plan.segments.size(); ++i)
        trace.segments.push_back(step_segment(state, generator, pool));
    return {std::move(state.frames), std::move(trace)};
}

Generator make_stub_generator(const StreamConfig& config) {
    const double speed = config.speed;
    const double dt = config.dt;
    const std::size_t dim = config.latent_dim;
    return [speed, dt, dim](const GeneratorRequest& req) {
        std::uint64_t h = context_digest(req.context);
        h = actions_digest(req.actions, h);
        h = digest::mix_u64(req.seed, h);

        std::vector<GeneratedFrame> out(req.actions.size());
        geom::Pose6DoF pose = req.first_pose;
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (i > 0) pose = advance_pose(pose, req.actions[i - 1], speed, dt);
            auto engine = rng::make_engine(rng::derive_seed(h, i));
            out[i].latent.values.resize(dim);
            for (auto& v : out[i].latent.values) v = rng::normal(engine);
            out[i].latent.frame_index = req.start_frame + i;
            out[i].latent.role = trainkit::FrameRole::current;
            out[i].camera_pose = pose;
        }
        return out;
    };
}

} // namespace wmkit::streaming
