// Copyright 2026 The wmkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "wmkit/trainkit.hpp"

#include <cmath>
#include <stdexcept>

namespace wmkit::trainkit {

const char* to_string(FrameRole role) {
    switch (role) {
    case FrameRole::memory: return "memory";
    case FrameRole::past: return "past";
    case FrameRole::current: return "current";
    case FrameRole::reference: return "reference";
    }
    return "unknown";
}

ErrorBuffer::ErrorBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw std::invalid_argument("ErrorBuffer: capacity must be >= 1");
    slots_.reserve(capacity_);
}

void ErrorBuffer::push(ResidualSample sample) {
    for (const double v : sample.values)
        if (!std::isfinite(v))
            throw std::invalid_argument("ErrorBuffer: residual has non-finite values");
    std::lock_guard<std::mutex> lock(mu_);
    if (!slots_.empty() && sample.values.size() != slots_[0].values.size())
        throw std::invalid_argument("ErrorBuffer: residual shape mismatch");
    if (!full_ && slots_.size() < capacity_) {
        slots_.push_back(std::move(sample));
        if (slots_.size() == capacity_) full_ = true;
        return;
    }
    slots_[next_] = std::move(sample);
    next_ = (next_ + 1) % capacity_;
}

std::size_t ErrorBuffer::size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return slots_.size();
}

ResidualSample ErrorBuffer::at(std::size_t i) const {
    std::lock_guard<std::mutex> lock(mu_);
    if (i >= slots_.size()) throw std::out_of_range("ErrorBuffer: index out of range");
    if (!full_) return slots_[i];
    return slots_[(next_ + i) % capacity_];
}

ResidualSample ErrorBuffer::sample(std::uint64_t seed) const {
    std::lock_guard<std::mutex> lock(mu_);
    if (slots_.empty()) throw std::out_of_range("ErrorBuffer: sample from empty buffer");
    auto engine = rng::make_engine(seed);
    std::size_t i = static_cast<std::size_t>(rng::uniform_index(engine, slots_.size()));
    if (full_) i = (next_ + i) % capacity_;
    return slots_[i];
}

void collect_residual(const LatentFrame& predicted, const LatentFrame& ground_truth,
                      ErrorBuffer& buffer) {
    if (predicted.values.size() != ground_truth.values.size())
        throw std::invalid_argument("collect_residual: shape mismatch");
    ResidualSample delta;
    delta.values.resize(predicted.values.size());
    for (std::size_t i = 0; i < delta.values.size(); ++i)
        delta.values[i] = predicted.values[i] - ground_truth.values[i];
    buffer.push(std::move(delta));
}

LatentFrame inject_error(const LatentFrame& x, const ErrorBuffer& buffer, double gamma,
                         std::uint64_t seed) {
    if (!std::isfinite(gamma)) throw std::invalid_argument("inject_error: non-finite gamma");
    if (gamma == 0.0) return x;  // bit-exact identity
    if (buffer.size() == 0)
        throw std::invalid_argument("inject_error: empty buffer with non-zero gamma");
    const ResidualSample delta = buffer.sample(seed);
    if (delta.values.size() != x.values.size())
        throw std::invalid_argument("inject_error: residual shape mismatch");
    LatentFrame out = x;
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] += gamma * delta.values[i];
    return out;
}

std::vector<std::vector<double>> flow_target(const std::vector<LatentFrame>& x_current,
                                             const std::vector<std::vector<double>>& epsilon) {
    if (x_current.size() != epsilon.size())
        throw std::invalid_argument("flow_target: sequence length mismatch");
    std::vector<std::vector<double>> target(x_current.size());
    for (std::size_t f = 0; f < x_current.size(); ++f) {
        if (x_current[f].values.size() != epsilon[f].size())
            throw std::invalid_argument("flow_target: frame shape mismatch");
        target[f].resize(epsilon[f].size());
        for (std::size_t i = 0; i < epsilon[f].size(); ++i)
            target[f][i] = epsilon[f][i] - x_current[f].values[i];
    }
    return target;
}

double flow_loss(const std::vector<std::vector<double>>& target,
                 const std::vector<std::vector<double>>& v_pred) {
    if (target.size() != v_pred.size())
        throw std::invalid_argument("flow_loss: sequence length mismatch");
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t f = 0; f < target.size(); ++f) {
        if (target[f].size() != v_pred[f].size())
            throw std::invalid_argument("flow_loss: frame shape mismatch");
        for (std::size_t i = 0; i < target[f].size(); ++i) {
            const double d = v_pred[f][i] - target[f][i];
            sum += d * d;
            ++count;
        }
    }
    if (count == 0) throw std::invalid_argument("flow_loss: empty sequences");
    return sum / static_cast<double>(count);
}

RopeConfig make_rope_config(double theta_base, double sigma_theta, std::size_t head_count,
                            std::size_t rotary_dim) {
    RopeConfig cfg;
    cfg.theta_base = theta_base;
    cfg.sigma_theta = sigma_theta;
    cfg.head_count = head_count;
    cfg.rotary_dim = rotary_dim;
    cfg.epsilon_h.resize(head_count);
    if (head_count == 1) {
        cfg.epsilon_h[0] = 0.0;  // degenerate spacing: keep the mean base
    } else {
        for (std::size_t h = 0; h < head_count; ++h)
            cfg.epsilon_h[h] =
                -1.0 + 2.0 * static_cast<double>(h) / static_cast<double>(head_count - 1);
    }
    rope_bases(cfg);  // validates
    return cfg;
}

std::vector<double> rope_bases(const RopeConfig& cfg) {
    if (!(cfg.theta_base > 1.0) || !std::isfinite(cfg.theta_base))
        throw std::invalid_argument("rope: theta_base must be > 1");
    if (!(cfg.sigma_theta >= 0.0) || !std::isfinite(cfg.sigma_theta))
        throw std::invalid_argument("rope: sigma_theta must be >= 0");
    if (cfg.head_count == 0 || cfg.epsilon_h.size() != cfg.head_count)
        throw std::invalid_argument("rope: epsilon_h must hold one value per head");
    if (cfg.rotary_dim == 0 || cfg.rotary_dim % 2 != 0)
        throw std::invalid_argument("rope: rotary_dim must be a positive even count");
    for (std::size_t h = 1; h < cfg.head_count; ++h)
        if (!(cfg.epsilon_h[h] > cfg.epsilon_h[h - 1]))
            throw std::invalid_argument("rope: epsilon_h must be strictly increasing");
    std::vector<double> bases(cfg.head_count);
    for (std::size_t h = 0; h < cfg.head_count; ++h) {
        bases[h] = cfg.theta_base * (1.0 + cfg.sigma_theta * cfg.epsilon_h[h]);
        if (!(bases[h] > 1.0))
            throw std::invalid_argument("rope: effective base <= 1 for a head");
    }
    return bases;
}

std::vector<double> rope_phases(std::uint64_t frame_index, const RopeConfig& cfg,
                                std::size_t head) {
    const auto bases = rope_bases(cfg);
    if (head >= cfg.head_count) throw std::invalid_argument("rope_phases: head out of range");
    const std::size_t half = cfg.rotary_dim / 2;
    std::vector<double> phases(half);
    const double t = static_cast<double>(frame_index);
    for (std::size_t d = 0; d < half; ++d) {
        const double exponent =
            2.0 * static_cast<double>(d) / static_cast<double>(cfg.rotary_dim);
        phases[d] = t / std::pow(bases[head], exponent);
    }
    return phases;
}

double phase_collision_rate(const std::vector<std::uint64_t>& delta_t_set,
                            const RopeConfig& cfg, double tolerance) {
    if (delta_t_set.empty())
        throw std::invalid_argument("phase_collision_rate: empty delta_t set");
    if (!(tolerance >= 0.0) || !std::isfinite(tolerance))
        throw std::invalid_argument("phase_collision_rate: tolerance must be >= 0");
    const auto bases = rope_bases(cfg);
    // Lowest frequency = last rotary pair, exponent (rotary_dim - 2) / rotary_dim.
    const double exponent = static_cast<double>(cfg.rotary_dim - 2) /
                            static_cast<double>(cfg.rotary_dim);
    std::vector<double> omega(bases.size());
    for (std::size_t h = 0; h < bases.size(); ++h)
        omega[h] = 1.0 / std::pow(bases[h], exponent);

    std::size_t collisions = 0;
    for (const std::uint64_t dt : delta_t_set) {
        bool all = true;
        for (std::size_t h = 0; h < omega.size() && all; ++h) {
            const double phase = static_cast<double>(dt) * omega[h];
            const double wrapped = std::remainder(phase, 2.0 * M_PI);
            if (std::abs(wrapped) > tolerance) all = false;
        }
        if (all) ++collisions;
    }
    return static_cast<double>(collisions) / static_cast<double>(delta_t_set.size());
}

void ContextLayout::validate() const {
    if (!(past_mode_prob >= 0.0 && past_mode_prob <= 1.0))
        throw std::invalid_argument("layout: past_mode_prob must be in [0, 1]");
    if (!(mask_prob >= 0.0 && mask_prob <= 1.0))
        throw std::invalid_argument("layout: mask_prob must be in [0, 1]");
}

ContextMode schedule_mode(const ContextLayout& layout, std::uint64_t seed) {
    layout.validate();
    auto engine = rng::make_engine(seed);
    return rng::uniform_double(engine) < layout.past_mode_prob ? ContextMode::standard
                                                               : ContextMode::i2v;
}

AssembledContext assemble_context(const std::vector<LatentFrame>& memory,
                                  const std::vector<LatentFrame>& past,
                                  const std::vector<LatentFrame>& current_gt,
                                  const ContextLayout& layout, ContextMode mode,
                                  const ErrorBuffer* buffer, double gamma_h, double gamma_m,
                                  std::uint64_t seed, double noise_scale) {
    layout.validate();
    if (!std::isfinite(noise_scale) || noise_scale < 0.0)
        throw std::invalid_argument("assemble_context: noise_scale must be >= 0");
    const std::size_t want_current =
        mode == ContextMode::standard ? layout.current_len : layout.i2v_current_len;
    if (mode == ContextMode::standard) {
        if (memory.size() != layout.memory_len)
            throw std::invalid_argument("assemble_context: memory length mismatch");
        if (past.size() != layout.past_len)
            throw std::invalid_argument("assemble_context: past length mismatch");
    } else {
        if (!memory.empty())
            throw std::invalid_argument("assemble_context: i2v mode takes no memory frames");
        if (past.size() != 1)
            throw std::invalid_argument("assemble_context: i2v mode takes exactly one reference");
    }
    if (current_gt.size() != want_current)
        throw std::invalid_argument("assemble_context: current length mismatch");

    // Uniform latent shape across every input frame.
    std::size_t dim = 0;
    bool have_dim = false;
    const auto check_dim = [&](const std::vector<LatentFrame>& frames) {
        for (const auto& f : frames) {
            if (!have_dim) {
                dim = f.values.size();
                have_dim = true;
            } else if (f.values.size() != dim) {
                throw std::invalid_argument("assemble_context: latent shape mismatch");
            }
        }
    };
    check_dim(memory);
    check_dim(past);
    check_dim(current_gt);

    AssembledContext out;
    const std::size_t cond_count = memory.size() + past.size();
    out.sequence.reserve(cond_count + want_current);
    for (const auto& f : memory) {
        out.sequence.push_back(f);
        out.sequence.back().role = FrameRole::memory;
    }
    for (const auto& f : past) {
        out.sequence.push_back(f);
        out.sequence.back().role =
            mode == ContextMode::standard ? FrameRole::past : FrameRole::reference;
    }
    out.loss_begin = cond_count;
    out.loss_end = cond_count + want_current;

    auto engine = rng::make_engine(seed);
    // 1) conditioning dropout flags in sequence order
    out.masked.assign(cond_count, 0);
    for (std::size_t i = 0; i < cond_count; ++i)
        out.masked[i] = rng::uniform_double(engine) < layout.mask_prob ? 1 : 0;
    // 2) noise per current frame
    out.noise.resize(want_current);
    for (std::size_t f = 0; f < want_current; ++f) {
        out.noise[f].resize(dim);
        for (std::size_t i = 0; i < dim; ++i) out.noise[f][i] = rng::normal(engine);
    }
    // 3) error injection on unmasked memory/past frames, one draw each
    static const ErrorBuffer kNoResiduals{1};
    const ErrorBuffer& residuals = buffer ? *buffer : kNoResiduals;
    for (std::size_t i = 0; i < cond_count; ++i) {
        auto& frame = out.sequence[i];
        if (out.masked[i]) {
            std::fill(frame.values.begin(), frame.values.end(), 0.0);
            continue;
        }
        if (frame.role == FrameRole::memory)
            frame = inject_error(frame, residuals, gamma_m, engine());
        else if (frame.role == FrameRole::past)
            frame = inject_error(frame, residuals, gamma_h, engine());
        // reference frames stay clean conditioning
    }

    for (std::size_t f = 0; f < want_current; ++f) {
        LatentFrame noisy = current_gt[f];
        noisy.role = FrameRole::current;
        for (std::size_t i = 0; i < dim; ++i) noisy.values[i] = noise_scale * out.noise[f][i];
        out.sequence.push_back(std::move(noisy));
    }
    return out;
}

} // namespace wmkit::trainkit
