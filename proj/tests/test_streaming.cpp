// Copyright 2026 The wmkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "wmkit/actions.hpp"
#include "wmkit/geometry.hpp"
#include "wmkit/retrieval.hpp"
#include "wmkit/streaming.hpp"

using namespace wmkit;
using streaming::GeneratedFrame;
using streaming::RolloutPlan;
using streaming::StreamConfig;
using trainkit::ContextMode;

namespace {

actions::ActionVector act(actions::DirectionClass dir) {
    return actions::direction_to_action(dir, false, false);
}

GeneratedFrame make_reference(const StreamConfig& cfg, double ground_yaw = 0.0) {
    GeneratedFrame ref;
    ref.latent.values.assign(cfg.latent_dim, 0.5);
    ref.latent.frame_index = 0;
    ref.latent.role = trainkit::FrameRole::reference;
    ref.camera_pose.position = {0.0, 1.6, 0.0};
    ref.camera_pose.rotation = geom::camera_rotation(ground_yaw, 0.0);
    return ref;
}

std::vector<actions::ActionVector> uniform_script(std::size_t n, actions::DirectionClass dir) {
    return std::vector<actions::ActionVector>(n, act(dir));
}

} // namespace

TEST_CASE("plan_rollout schedules i2v first and standard afterwards") {
    trainkit::ContextLayout layout;

    CHECK_THROWS_AS(streaming::plan_rollout(0, layout, 1), std::invalid_argument);
    CHECK_THROWS_AS(streaming::plan_rollout(7, layout, 1), std::invalid_argument);
    CHECK_NOTHROW(streaming::plan_rollout(7, layout, 1, 8));  // configurable bound

    const auto single = streaming::plan_rollout(1, layout, 9);
    REQUIRE(single.segments.size() == 1);
    CHECK(single.segments[0].mode == ContextMode::i2v);
    CHECK(single.segments[0].current_len == 14);
    CHECK(single.segments[0].start_frame == 0);
    CHECK(streaming::planned_frames(single) == 14);

    const auto six = streaming::plan_rollout(6, layout, 9);
    REQUIRE(six.segments.size() == 6);
    CHECK(streaming::planned_frames(six) == 64);  // 14 + 5 * 10
    std::uint64_t expect_start = 0;
    for (std::size_t i = 0; i < 6; ++i) {
        const auto& seg = six.segments[i];
        CHECK(seg.index == i);
        CHECK(seg.start_frame == expect_start);
        CHECK(seg.mode == (i == 0 ? ContextMode::i2v : ContextMode::standard));
        CHECK(seg.current_len == (i == 0 ? 14u : 10u));
        expect_start += seg.current_len;
    }
}

TEST_CASE("advance_pose moves along the camera yaw frame") {
    geom::Pose6DoF pose;
    pose.position = {2.0, 1.6, -3.0};
    pose.rotation = geom::camera_rotation(0.0, -0.2);  // ground heading +x

    const double step = 1.5 * 0.2;
    const auto fwd = streaming::advance_pose(pose, act(actions::DirectionClass::N), 1.5, 0.2);
    CHECK(fwd.position.x == doctest::Approx(pose.position.x + step));
    CHECK(fwd.position.y == pose.position.y);
    CHECK(fwd.position.z == doctest::Approx(pose.position.z));
    CHECK(fwd.rotation.w == pose.rotation.w);
    CHECK(fwd.rotation.x == pose.rotation.x);
    CHECK(fwd.rotation.y == pose.rotation.y);
    CHECK(fwd.rotation.z == pose.rotation.z);

    const auto right = streaming::advance_pose(pose, act(actions::DirectionClass::E), 1.5, 0.2);
    const geom::Vec2 dr = geom::ground_xy(right.position - pose.position);
    CHECK(dr.x == doctest::Approx(0.0));
    CHECK(dr.y == doctest::Approx(-step));  // right of +x heading

    // Diagonals are normalized to the same speed.
    const auto ne = streaming::advance_pose(pose, act(actions::DirectionClass::NE), 1.5, 0.2);
    const geom::Vec2 dne = geom::ground_xy(ne.position - pose.position);
    CHECK(std::hypot(dne.x, dne.y) == doctest::Approx(step));
    CHECK(dne.x == doctest::Approx(step / std::sqrt(2.0)));

    const auto idle =
        streaming::advance_pose(pose, act(actions::DirectionClass::IDLE), 1.5, 0.2);
    CHECK(idle.position.x == pose.position.x);
    CHECK(idle.position.z == pose.position.z);

    // Forward then backward cancels exactly.
    auto p = pose;
    for (int i = 0; i < 5; ++i) p = streaming::advance_pose(p, act(actions::DirectionClass::N), 1.5, 0.2);
    for (int i = 0; i < 5; ++i) p = streaming::advance_pose(p, act(actions::DirectionClass::S), 1.5, 0.2);
    CHECK(std::abs(p.position.x - pose.position.x) < 1e-9);
    CHECK(std::abs(p.position.z - pose.position.z) < 1e-9);
}

TEST_CASE("stub generator is deterministic with kinematic poses") {
    StreamConfig cfg;
    const auto gen = streaming::make_stub_generator(cfg);
    const double step = cfg.speed * cfg.dt;

    trainkit::ContextLayout layout;
    layout.mask_prob = 0.0;
    std::vector<trainkit::LatentFrame> current(14);
    for (std::size_t i = 0; i < current.size(); ++i) {
        current[i].values.assign(cfg.latent_dim, 0.0);
        current[i].frame_index = i;
    }
    const auto ref = make_reference(cfg, 0.7);
    auto ctx = trainkit::assemble_context({}, {ref.latent}, current, layout, ContextMode::i2v,
                                          nullptr, 0.0, 0.0, 5);

    SUBCASE("all idle actions freeze the pose") {
        streaming::GeneratorRequest req{ctx, uniform_script(14, actions::DirectionClass::IDLE),
                                        ref.camera_pose, 0, 11};
        const auto frames = gen(req);
        REQUIRE(frames.size() == 14);
        for (const auto& f : frames) {
            CHECK(f.camera_pose.position.x == ref.camera_pose.position.x);
            CHECK(f.camera_pose.position.z == ref.camera_pose.position.z);
            CHECK(f.latent.values.size() == cfg.latent_dim);
        }
    }

    SUBCASE("all forward actions advance speed*dt along camera forward") {
        streaming::GeneratorRequest req{ctx, uniform_script(14, actions::DirectionClass::N),
                                        ref.camera_pose, 0, 11};
        const auto frames = gen(req);
        const auto basis = geom::yaw_basis(0.7);
        for (std::size_t i = 1; i < frames.size(); ++i) {
            const geom::Vec2 d = geom::ground_xy(frames[i].camera_pose.position -
                                                 frames[i - 1].camera_pose.position);
            CHECK(d.x == doctest::Approx(step * basis.forward.x));
            CHECK(d.y == doctest::Approx(step * basis.forward.y));
        }
        // First frame sits exactly at the requested pose.
        CHECK(frames[0].camera_pose.position.x == ref.camera_pose.position.x);
    }

    SUBCASE("same request twice is bit-identical; seeds matter") {
        streaming::GeneratorRequest req{ctx, uniform_script(14, actions::DirectionClass::N),
                                        ref.camera_pose, 0, 11};
        const auto a = gen(req);
        const auto b = gen(req);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i)
            CHECK(a[i].latent.values == b[i].latent.values);
        streaming::GeneratorRequest other = req;
        other.seed = 12;
        const auto c = gen(other);
        CHECK(c[0].latent.values != a[0].latent.values);
    }
}

TEST_CASE("make_stream validates script coverage and reference shape") {
    trainkit::ContextLayout layout;
    StreamConfig cfg;
    const auto plan = streaming::plan_rollout(2, layout, 3);
    const auto ref = make_reference(cfg);

    CHECK_THROWS_AS(
        streaming::make_stream(plan, cfg, ref, uniform_script(23, actions::DirectionClass::N)),
        std::invalid_argument);
    CHECK_NOTHROW(
        streaming::make_stream(plan, cfg, ref, uniform_script(24, actions::DirectionClass::N)));

    auto bad_ref = ref;
    bad_ref.latent.values.pop_back();
    CHECK_THROWS_AS(
        streaming::make_stream(plan, cfg, bad_ref, uniform_script(24, actions::DirectionClass::N)),
        std::invalid_argument);

    trainkit::ContextLayout tiny;
    tiny.i2v_current_len = 3;
    tiny.past_len = 4;
    const auto bad_plan = streaming::plan_rollout(2, tiny, 3);
    CHECK_THROWS_AS(
        streaming::make_stream(bad_plan, cfg, ref, uniform_script(24, actions::DirectionClass::N)),
        std::invalid_argument);
}

TEST_CASE("single-segment stream emits 14 frames with no retrieval") {
    trainkit::ContextLayout layout;
    StreamConfig cfg;
    const auto plan = streaming::plan_rollout(1, layout, 21);
    const auto ref = make_reference(cfg);
    const auto gen = streaming::make_stub_generator(cfg);

    const auto [frames, trace] =
        streaming::run_stream(plan, cfg, ref, uniform_script(14, actions::DirectionClass::N), gen);
    REQUIRE(frames.size() == 14);
    REQUIRE(trace.segments.size() == 1);
    CHECK(trace.segments[0].retrieved_indices.empty());
    CHECK(trace.segments[0].pool_size == 14);
    for (std::size_t i = 0; i < 14; ++i) {
        CHECK(frames[i].latent.frame_index == i);
        CHECK(trace.segments[0].generated_indices[i] == i);
    }
}

TEST_CASE("multi-segment stream hands off tails, keeps causality, carries the sink") {
    trainkit::ContextLayout layout;
    StreamConfig cfg;
    const auto ref = make_reference(cfg);
    const auto gen = streaming::make_stub_generator(cfg);

    for (std::size_t k = 1; k <= 6; ++k) {
        const auto plan = streaming::plan_rollout(k, layout, 100 + k);
        const std::size_t total = 14 + (k - 1) * 10;
        const auto [frames, trace] = streaming::run_stream(
            plan, cfg, ref, uniform_script(total, actions::DirectionClass::N), gen);

        // Conservation and contiguity.
        REQUIRE(frames.size() == total);
        for (std::size_t i = 0; i < total; ++i) CHECK(frames[i].latent.frame_index == i);

        REQUIRE(trace.segments.size() == k);
        for (std::size_t s = 0; s < k; ++s) {
            const auto& seg_trace = trace.segments[s];
            const auto& seg = plan.segments[s];
            if (s == 0) {
                CHECK(seg_trace.retrieved_indices.empty());
                CHECK(seg_trace.past_indices.empty());
                continue;
            }
            // Handoff: exactly the previous segment's last past_len frames.
            REQUIRE(seg_trace.past_indices.size() == layout.past_len);
            for (std::size_t i = 0; i < layout.past_len; ++i)
                CHECK(seg_trace.past_indices[i] == seg.start_frame - layout.past_len + i);
            // Causality on every retrieved entry.
            for (const auto idx : seg_trace.retrieved_indices)
                CHECK(idx < seg.start_frame);
            // Sink present from segment 1 onward.
            CHECK(seg_trace.sink_retrieved);
            // Scores stay non-increasing even with the appended sink.
            for (std::size_t i = 1; i < seg_trace.retrieved_scores.size(); ++i)
                CHECK(seg_trace.retrieved_scores[i] <= seg_trace.retrieved_scores[i - 1]);
        }
    }
}

TEST_CASE("forward-marching stream appends the sink as an extra slot") {
    trainkit::ContextLayout layout;
    StreamConfig cfg;
    const auto plan = streaming::plan_rollout(3, layout, 77);
    const auto ref = make_reference(cfg);
    const auto gen = streaming::make_stub_generator(cfg);

    const auto [frames, trace] =
        streaming::run_stream(plan, cfg, ref, uniform_script(34, actions::DirectionClass::N), gen);
    REQUIRE(frames.size() == 34);

    // After 14 forward steps the start frame is far behind: it cannot be in
    // the top-5, so it arrives as the appended sixth slot.
    const auto& seg1 = trace.segments[1];
    REQUIRE(seg1.retrieved_indices.size() == layout.memory_len + 1);
    CHECK(seg1.retrieved_indices.back() == 0);
    for (std::size_t i = 0; i + 1 < seg1.retrieved_indices.size(); ++i)
        CHECK(seg1.retrieved_indices[i] != 0);
}

TEST_CASE("identical plan and seed give bit-identical streams") {
    trainkit::ContextLayout layout;
    StreamConfig cfg;
    const auto plan = streaming::plan_rollout(3, layout, 5150);
    const auto ref = make_reference(cfg);
    const auto gen = streaming::make_stub_generator(cfg);
    const auto script = uniform_script(34, actions::DirectionClass::NE);

    const auto [fa, ta] = streaming::run_stream(plan, cfg, ref, script, gen);
    const auto [fb, tb] = streaming::run_stream(plan, cfg, ref, script, gen);
    REQUIRE(fa.size() == fb.size());
    for (std::size_t i = 0; i < fa.size(); ++i) {
        CHECK(fa[i].latent.values == fb[i].latent.values);
        CHECK(fa[i].camera_pose.position.x == fb[i].camera_pose.position.x);
    }
    REQUIRE(ta.segments.size() == tb.segments.size());
    for (std::size_t s = 0; s < ta.segments.size(); ++s) {
        CHECK(ta.segments[s].retrieved_indices == tb.segments[s].retrieved_indices);
        CHECK(ta.segments[s].retrieved_scores == tb.segments[s].retrieved_scores);
    }

    // A different plan seed changes the generated latents.
    const auto plan2 = streaming::plan_rollout(3, layout, 5151);
    const auto [fc, tc] = streaming::run_stream(plan2, cfg, ref, script, gen);
    CHECK(fc[0].latent.values != fa[0].latent.values);
}

TEST_CASE("generator output length mismatches are rejected") {
    trainkit::ContextLayout layout;
    StreamConfig cfg;
    const auto plan = streaming::plan_rollout(1, layout, 2);
    const auto ref = make_reference(cfg);
    const auto stub = streaming::make_stub_generator(cfg);
    const streaming::Generator broken = [&stub](const streaming::GeneratorRequest& req) {
        auto out = stub(req);
        out.pop_back();
        return out;
    };
    auto state = streaming::make_stream(plan, cfg, ref,
                                        uniform_script(14, actions::DirectionClass::N));
    retrieval::MemoryPool pool{std::nullopt};
    CHECK_THROWS_AS(streaming::step_segment(state, broken, pool), std::runtime_error);

    // Exhausting the plan also throws.
    auto ok = streaming::make_stream(plan, cfg, ref,
                                     uniform_script(14, actions::DirectionClass::N));
    retrieval::MemoryPool pool2{std::nullopt};
    streaming::step_segment(ok, stub, pool2);
    CHECK_THROWS_AS(streaming::step_segment(ok, stub, pool2), std::runtime_error);
}

TEST_CASE("returning to the start viewpoint retrieves the start frame as top-1") {
    // Out-and-back script: 17 forward steps, 17 backward steps, idle tail.
    // The final segment's query viewpoint coincides with frame 0's pose.
    trainkit::ContextLayout layout;
    StreamConfig cfg;
    const auto plan = streaming::plan_rollout(4, layout, 424242);
    const auto ref = make_reference(cfg, 0.3);

    std::vector<actions::ActionVector> script;
    for (int i = 0; i < 17; ++i) script.push_back(act(actions::DirectionClass::N));
    for (int i = 0; i < 17; ++i) script.push_back(act(actions::DirectionClass::S));
    for (int i = 0; i < 10; ++i) script.push_back(act(actions::DirectionClass::IDLE));
    REQUIRE(script.size() == streaming::planned_frames(plan));

    const auto gen = streaming::make_stub_generator(cfg);
    const auto [frames, trace] = streaming::run_stream(plan, cfg, ref, script, gen);
    REQUIRE(frames.size() == 44);

    // Kinematic sanity: the final segment starts back at the reference pose.
    const geom::Vec3 d34 = frames[34].camera_pose.position - ref.camera_pose.position;
    CHECK(std::abs(d34.x) < 1e-9);
    CHECK(std::abs(d34.z) < 1e-9);

    const auto& final_trace = trace.segments[3];
    REQUIRE(!final_trace.retrieved_indices.empty());
    // Top-1 is the start frame itself (exact overlap 1.0), a segment-0 frame.
    CHECK(final_trace.retrieved_indices[0] == 0);
    CHECK(final_trace.retrieved_scores[0] == doctest::Approx(1.0).epsilon(1e-9));

    // Its overlap strictly exceeds that of every immediately preceding
    // segment frame, recomputed directly against the query viewpoint.
    const retrieval::CameraView query{frames[34].camera_pose, cfg.intrinsics};
    double best_prev = 0.0;
    for (std::uint64_t g = 24; g < 34; ++g) {
        const retrieval::CameraView cand{frames[g].camera_pose, cfg.intrinsics};
        best_prev = std::max(best_prev, retrieval::overlap_exact(query, cand));
    }
    CHECK(final_trace.retrieved_scores[0] > best_prev);
}
