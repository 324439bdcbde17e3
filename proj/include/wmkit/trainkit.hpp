// Copyright 2026 The wmkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <mutex>
#include <vector>

#include "wmkit/rng.hpp"

// Model-free training utilities: the latent error buffer (residual
// collection and injection), flow-matching targets, temporal rotary phases
// with head-wise perturbed bases, and context assembly for the
// memory/past/current window layout.
namespace wmkit::trainkit {

enum class FrameRole { memory, past, current, reference };

const char* to_string(FrameRole role);

/// One latent frame. `frame_index` is the original temporal index of the
/// frame in its source sequence and survives windowing untouched.
struct LatentFrame {
    std::vector<double> values;
    std::uint64_t frame_index = 0;
    FrameRole role = FrameRole::current;
};

struct ResidualSample {
    std::vector<double> values;
};

/// Ring buffer of prediction residuals with uniform sampling. Appends are
/// serialized behind a mutex (single writer, many readers).
class ErrorBuffer {
public:
    explicit ErrorBuffer(std::size_t capacity = 1024);

    /// Appends a residual, evicting the oldest at capacity. Throws
    /// std::invalid_argument on non-finite values or (after the first push)
    /// a shape mismatch.
    void push(ResidualSample sample);

    std::size_t size() const;
    std::size_t capacity() const { return capacity_; }

    /// Element i in insertion order, oldest first.
    ResidualSample at(std::size_t i) const;

    /// Uniform draw over current contents, deterministic per seed. Throws
    /// std::out_of_range on an empty buffer.
    ResidualSample sample(std::uint64_t seed) const;

private:
    mutable std::mutex mu_;
    std::size_t capacity_;
    std::vector<ResidualSample> slots_;
    std::size_t next_ = 0;  // insertion cursor once the ring is full
    bool full_ = false;
};

/// Appends delta = predicted - ground_truth to the buffer. Throws
/// std::invalid_argument on shape mismatch.
void collect_residual(const LatentFrame& predicted, const LatentFrame& ground_truth,
                      ErrorBuffer& buffer);

/// Returns x + gamma * delta with delta drawn uniformly from the buffer.
/// gamma == 0 is the bit-exact identity regardless of buffer state; a
/// non-zero gamma with an empty buffer throws std::invalid_argument, as
/// does a shape mismatch between x and the drawn residual.
LatentFrame inject_error(const LatentFrame& x, const ErrorBuffer& buffer, double gamma,
                         std::uint64_t seed);

/// Per-frame regression target epsilon - x for the velocity head. Throws
/// std::invalid_argument on length or shape mismatches.
std::vector<std::vector<double>> flow_target(const std::vector<LatentFrame>& x_current,
                                             const std::vector<std::vector<double>>& epsilon);

/// Mean squared error between target and prediction over every element.
double flow_loss(const std::vector<std::vector<double>>& target,
                 const std::vector<std::vector<double>>& v_pred);

/// Temporal rotary configuration. epsilon_h holds the per-head base
/// perturbations, linearly spaced over [-1, 1] inclusive (a single head
/// sits at 0 so the mean base stays theta_base).
struct RopeConfig {
    double theta_base = 1.0e4;
    double sigma_theta = 0.8;
    std::size_t head_count = 16;
    std::size_t rotary_dim = 64;  // even
    std::vector<double> epsilon_h;
};

/// Config with epsilon_h filled by the linear spacing rule.
RopeConfig make_rope_config(double theta_base, double sigma_theta, std::size_t head_count,
                            std::size_t rotary_dim);

/// Effective base per head: theta_base * (1 + sigma_theta * epsilon_h).
/// Throws std::invalid_argument when the config is malformed or any
/// effective base is <= 1.
std::vector<double> rope_bases(const RopeConfig& cfg);

/// Rotary angles for one head at an absolute frame index:
/// angle_d = frame_index / base_h^(2d / rotary_dim), d in
/// [0, rotary_dim / 2). Uses the original frame index, never a
/// within-window offset. Throws std::invalid_argument when head is out of
/// range (and propagates rope_bases config errors).
std::vector<double> rope_phases(std::uint64_t frame_index, const RopeConfig& cfg,
                                std::size_t head);

/// Fraction of the given temporal offsets for which every head's
/// lowest-frequency phase lands within `tolerance` radians of a multiple of
/// 2 pi simultaneously. Throws std::invalid_argument on an empty set or a
/// negative tolerance.
double phase_collision_rate(const std::vector<std::uint64_t>& delta_t_set,
                            const RopeConfig& cfg, double tolerance);

/// Window composition used by training and rollout.
struct ContextLayout {
    std::size_t memory_len = 5;
    std::size_t past_len = 4;
    std::size_t current_len = 10;
    std::size_t i2v_current_len = 14;
    double past_mode_prob = 0.8;  // probability of scheduling standard mode
    double mask_prob = 0.2;       // per-conditioning-frame dropout

    void validate() const;  // throws std::invalid_argument
};

enum class ContextMode { standard, i2v };

/// Draws the training mode: standard with probability past_mode_prob.
ContextMode schedule_mode(const ContextLayout& layout, std::uint64_t seed);

/// assemble_context output. `sequence` holds conditioning frames followed
/// by the noisy current frames; positions [loss_begin, loss_end) are the
/// current frames, the only ones that receive loss. `noise` is the drawn
/// per-current-frame noise (the sequence stores noise_scale * noise as the
/// current values); `masked[i]` marks conditioning frames whose values were
/// zeroed by the dropout draw.
struct AssembledContext {
    std::vector<LatentFrame> sequence;
    std::vector<std::vector<double>> noise;
    std::vector<std::uint8_t> masked;
    std::size_t loss_begin = 0;
    std::size_t loss_end = 0;
};

/// standard mode: [memory(memory_len, injected with gamma_m), past(past_len,
/// injected with gamma_h), current(current_len, noised)]. i2v mode: memory
/// must be empty and past holds exactly one frame, which becomes the
/// reference: [reference, current(i2v_current_len, noised)]; the reference
/// is conditioning and is never error-injected. Every conditioning frame is
/// independently zeroed with probability mask_prob. Draw order per seed:
/// mask flags in sequence order, then noise per current frame, then one
/// injection draw per unmasked memory/past frame. Throws
/// std::invalid_argument on layout/length/shape violations; error injection
/// follows inject_error's preconditions.
AssembledContext assemble_context(const std::vector<LatentFrame>& memory,
                                  const std::vector<LatentFrame>& past,
                                  const std::vector<LatentFrame>& current_gt,
                                  const ContextLayout& layout, ContextMode mode,
                                  const ErrorBuffer* buffer, double gamma_h, double gamma_m,
                                  std::uint64_t seed, double noise_scale = 1.0);

} // namespace wmkit::trainkit
