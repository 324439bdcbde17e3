// Copyright 2026 The wmkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wmkit/geometry.hpp"

// Physics-based inference of discrete action vectors from pose trajectories:
// per-step position deltas projected onto the camera's yaw frame and binned
// into eight movement directions plus idle.
namespace wmkit::actions {

/// Discrete per-frame controls. Construction through direction_to_action
/// guarantees the exclusivity invariants (never forward and backward, never
/// left and right).
struct ActionVector {
    bool forward = false;
    bool backward = false;
    bool left = false;
    bool right = false;
    bool jump = false;
    bool attack = false;

    bool operator==(const ActionVector&) const = default;
};

/// Movement direction relative to the camera (N = camera forward). Octants
/// are 45 degrees wide, centered on the compass directions.
enum class DirectionClass { N, NE, E, SE, S, SW, W, NW, IDLE };

const char* to_string(DirectionClass dir);

/// Per-frame simulator state as recorded by the capture pipeline.
struct FrameState {
    std::uint64_t frame_index = 0;  // strictly increasing within a sequence
    geom::Vec3 player_position;
    geom::UnitQuaternion player_rotation;
    geom::Pose6DoF camera_pose;
    bool nav_flag = false;
    bool jump_flag = false;
    bool attack_flag = false;
};

/// Octant of the ground-plane step `delta_p` relative to camera yaw.
///
/// Returns IDLE when ||delta_p|| < deadzone (an exactly zero step is IDLE
/// regardless of deadzone). Otherwise bins the angle
/// atan2(<delta_p, right>, <delta_p, forward>) into octants whose boundaries
/// sit at odd multiples of 22.5 degrees. A boundary angle belongs to the
/// bin it is the upper edge of, so every internal edge resolves to the lower
/// octant index in the order N, NE, E, SE, S, SW, W, NW; the single wrap
/// edge at -22.5 degrees belongs to NW. Throws std::invalid_argument for a
/// negative or non-finite deadzone.
DirectionClass classify_direction(const geom::Vec2& delta_p, double yaw, double deadzone);

/// N -> forward, S -> backward, E -> right, W -> left, diagonals set both
/// adjacent flags, IDLE clears all movement; jump/attack copied through.
ActionVector direction_to_action(DirectionClass dir, bool jump, bool attack);

/// Action at frame t from the forward difference p_{t+1} - p_t (ground
/// plane) and the camera yaw at t; jump/attack copied from frame t's flags.
/// The final frame repeats the penultimate action verbatim. When `deadzone`
/// is not given it defaults to 0.25 x the median per-step ground
/// displacement of the clip. Throws std::invalid_argument on fewer than two
/// frames or non-increasing frame_index.
std::vector<ActionVector> infer_trajectory_actions(const std::vector<FrameState>& states,
                                                   std::optional<double> deadzone = std::nullopt);

struct AlignmentReport {
    bool pass = false;
    bool warning = false;  // pass-with-warning for an empty clip
    std::uint64_t frames = 0;
    std::uint64_t states = 0;
    std::uint64_t actions = 0;
    std::string message;
};

/// Passes iff all three stream lengths are equal; an all-zero clip passes
/// with a warning. The message names the offending lengths on failure.
AlignmentReport check_alignment(std::uint64_t frames, std::uint64_t states,
                                std::uint64_t actions);

} // namespace wmkit::actions
