// Copyright 2026 The wmkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "wmkit/actions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wmkit::actions {

const char* to_string(DirectionClass dir) {
    switch (dir) {
        case DirectionClass::N: return "N";
        case DirectionClass::NE: return "NE";
        case DirectionClass::E: return "E";
        case DirectionClass::SE: return "SE";
        case DirectionClass::S: return "S";
        case DirectionClass::SW: return "SW";
        case DirectionClass::W: return "W";
        case DirectionClass::NW: return "NW";
        case DirectionClass::IDLE: return "IDLE";
    }
    return "IDLE";
}

DirectionClass classify_direction(const geom::Vec2& delta_p, double yaw, double deadzone) {
    if (!(deadzone >= 0.0) || !std::isfinite(deadzone))
        throw std::invalid_argument("classify_direction: deadzone must be finite and >= 0");
    if (!std::isfinite(delta_p.x) || !std::isfinite(delta_p.y) || !std::isfinite(yaw))
        throw std::invalid_argument("classify_direction: non-finite input");

    const double step = delta_p.norm();
    if (step == 0.0 || step < deadzone) return DirectionClass::IDLE;

    const geom::YawBasis basis = geom::yaw_basis(yaw);
    const double fc = dot(delta_p, basis.forward);
    const double rc = dot(delta_p, basis.right);
    const double angle = std::atan2(rc, fc);

    // Octant i covers ((i-0.5)*45deg, (i+0.5)*45deg]; ceil makes each
    // boundary angle land in the bin it is the upper edge of.
    constexpr double kOctant = M_PI / 4.0;
    int idx = static_cast<int>(std::ceil(angle / kOctant - 0.5));
    idx = ((idx % 8) + 8) % 8;
    static constexpr DirectionClass kRing[8] = {
        DirectionClass::N,  DirectionClass::NE, DirectionClass::E,  DirectionClass::SE,
        DirectionClass::S,  DirectionClass::SW, DirectionClass::W,  DirectionClass::NW};
    return kRing[idx];
}

ActionVector direction_to_action(DirectionClass dir, bool jump, bool attack) {
    ActionVector a;
    switch (dir) {
        case DirectionClass::N: a.forward = true; break;
        case DirectionClass::NE: a.forward = a.right = true; break;
        case DirectionClass::E: a.right = true; break;
        case DirectionClass::SE: a.backward = a.right = true; break;
        case DirectionClass::S: a.backward = true; break;
        case DirectionClass::SW: a.backward = a.left = true; break;
        case DirectionClass::W: a.left = true; break;
        case DirectionClass::NW: a.forward = a.left = true; break;
        case DirectionClass::IDLE: break;
    }
    a.jump = jump;
    a.attack = attack;
    return a;
}

std::vector<ActionVector> infer_trajectory_actions(const std::vector<FrameState>& states,
                                                   std::optional<double> deadzone) {
    if (states.size() < 2)
        throw std::invalid_argument("infer_trajectory_actions: need at least 2 frames");
    for (std::size_t i = 1; i < states.size(); ++i)
        if (states[i].frame_index <= states[i - 1].frame_index)
            throw std::invalid_argument("infer_trajectory_actions: frame_index not increasing");

    const std::size_t steps = states.size() - 1;
    std::vector<geom::Vec2> deltas(steps);
    for (std::size_t t = 0; t < steps; ++t)
        deltas[t] = geom::ground_xy(states[t + 1].player_position) -
                    geom::ground_xy(states[t].player_position);

    double dz;
    if (deadzone) {
        dz = *deadzone;
    } else {
        std::vector<double> mags(steps);
        for (std::size_t t = 0; t < steps; ++t) mags[t] = deltas[t].norm();
        std::sort(mags.begin(), mags.end());
        const double median = steps % 2 == 1
                                  ? mags[steps / 2]
                                  : 0.5 * (mags[steps / 2 - 1] + mags[steps / 2]);
        dz = 0.25 * median;
    }

    std::vector<ActionVector> out(states.size());
    for (std::size_t t = 0; t < steps; ++t) {
        const double yaw = geom::ground_yaw(states[t].camera_pose);
        const DirectionClass dir = classify_direction(deltas[t], yaw, dz);
        out[t] = direction_to_action(dir, states[t].jump_flag, states[t].attack_flag);
    }
    out[states.size() - 1] = out[states.size() - 2];
    return out;
}

AlignmentReport check_alignment(std::uint64_t frames, std::uint64_t states,
                                std::uint64_t actions) {
    AlignmentReport r;
    r.frames = frames;
    r.states = states;
    r.actions = actions;
    if (frames == states && states == actions) {
        r.pass = true;
        if (frames == 0) {
            r.warning = true;
            r.message = "empty clip";
        }
        return r;
    }
    r.message = "stream length mismatch: frames=" + std::to_string(frames) +
                " states=" + std::to_string(states) + " actions=" + std::to_string(actions);
    return r;
}

} // namespace wmkit::actions
