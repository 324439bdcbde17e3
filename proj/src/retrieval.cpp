// Copyright 2026 The wmkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "wmkit/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wmkit/parallel.hpp"
#include "wmkit/rng.hpp"

namespace wmkit::retrieval {

using geom::Frustum;
using geom::Vec3;

namespace {

struct Aabb {
    Vec3 lo;
    Vec3 hi;
};

Aabb frustum_aabb(const Frustum& f) {
    Aabb box{f.corners[0], f.corners[0]};
    for (const Vec3& c : f.corners) {
        box.lo.x = std::min(box.lo.x, c.x);
        box.lo.y = std::min(box.lo.y, c.y);
        box.lo.z = std::min(box.lo.z, c.z);
        box.hi.x = std::max(box.hi.x, c.x);
        box.hi.y = std::max(box.hi.y, c.y);
        box.hi.z = std::max(box.hi.z, c.z);
    }
    return box;
}

double clip_eps(const CameraView& a, const CameraView& b) {
    const double scale = std::max({a.intrinsics.far_plane, b.intrinsics.far_plane,
                                   (a.pose.position - b.pose.position).norm(), 1.0});
    return 1e-9 * scale;
}

} // namespace

double overlap_exact(const CameraView& query, const CameraView& cand) {
    const Frustum fq = geom::frustum_from_pose(query.pose, query.intrinsics);
    const Frustum fc = geom::frustum_from_pose(cand.pose, cand.intrinsics);

    const double vq = geom::frustum_volume_analytic(query.intrinsics);
    if (!(vq > 0.0) || !std::isfinite(vq))
        throw std::invalid_argument("overlap_exact: degenerate query frustum");

    const double eps = clip_eps(query, cand);
    geom::ConvexPolytope poly = geom::polytope_from_frustum(fq);
    for (const geom::Plane& pl : fc.planes) {
        poly = geom::clip_polytope(poly, pl, eps);
        if (poly.empty()) return 0.0;
    }
    return std::clamp(poly.volume() / vq, 0.0, 1.0);
}

double overlap_sampled(const CameraView& query, const CameraView& cand,
                       std::uint64_t n_samples, std::uint64_t seed) {
    if (n_samples == 0) throw std::invalid_argument("overlap_sampled: n_samples must be >= 1");
    const Frustum fq = geom::frustum_from_pose(query.pose, query.intrinsics);
    const Frustum fc = geom::frustum_from_pose(cand.pose, cand.intrinsics);
    const Aabb box = frustum_aabb(fq);
    const Vec3 extent = box.hi - box.lo;

    auto rng = rng::make_engine(seed);
    std::uint64_t accepted = 0;
    std::uint64_t hits = 0;
    // A frustum fills a decent fraction of its AABB for any valid intrinsics;
    // the attempt cap only guards against a broken geometry kernel.
    const std::uint64_t max_attempts = 10000 * n_samples + 1000000;
    for (std::uint64_t attempt = 0; accepted < n_samples; ++attempt) {
        if (attempt >= max_attempts)
            throw std::runtime_error("overlap_sampled: rejection sampling stalled");
        const Vec3 p{box.lo.x + extent.x * rng::uniform_double(rng),
                     box.lo.y + extent.y * rng::uniform_double(rng),
                     box.lo.z + extent.z * rng::uniform_double(rng)};
        if (!geom::point_in_frustum(fq, p)) continue;
        ++accepted;
        if (geom::point_in_frustum(fc, p)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(n_samples);
}

std::vector<double> batch_overlap(const CameraView& query,
                                  const std::vector<CameraView>& candidates, Scorer scorer,
                                  std::uint64_t n_samples, std::uint64_t seed, unsigned jobs) {
    if (candidates.empty()) throw std::invalid_argument("batch_overlap: empty candidate list");
    std::vector<double> out(candidates.size(), 0.0);
    parallel::parallel_for(candidates.size(), jobs, [&](std::size_t i) {
        if (scorer == Scorer::exact) {
            out[i] = overlap_exact(query, candidates[i]);
        } else {
            out[i] = overlap_sampled(query, candidates[i], n_samples,
                                     rng::derive_seed(seed, static_cast<std::uint64_t>(i)));
        }
    });
    return out;
}

bool MemoryPool::has_sink() const {
    for (const MemoryEntry& e : entries_)
        if (e.is_sink) return true;
    return false;
}

void MemoryPool::update(const std::vector<MemoryEntry>& new_entries) {
    bool sink_present = has_sink();
    std::uint64_t last_index = entries_.empty() ? 0 : entries_.back().frame_index;
    bool have_any = !entries_.empty();

    for (const MemoryEntry& e : new_entries) {
        if (have_any && e.frame_index <= last_index)
            throw std::invalid_argument("MemoryPool::update: frame_index not increasing");
        if (e.is_sink && sink_present)
            throw std::invalid_argument("MemoryPool::update: second sink entry");
        entries_.push_back(e);
        last_index = e.frame_index;
        have_any = true;
        sink_present = sink_present || e.is_sink;
    }

    if (!capacity_) return;
    std::size_t non_sink = 0;
    for (const MemoryEntry& e : entries_)
        if (!e.is_sink) ++non_sink;
    // Evict oldest non-sink entries first; the sink is pinned.
    for (auto it = entries_.begin(); non_sink > *capacity_ && it != entries_.end();) {
        if (it->is_sink) {
            ++it;
            continue;
        }
        it = entries_.erase(it);
        --non_sink;
    }
}

RetrievalResult retrieve(const CameraView& query, std::uint64_t query_frame_index,
                         const MemoryPool& pool, std::size_t k, Scorer scorer,
                         std::uint64_t n_samples, std::uint64_t seed) {
    if (k == 0) throw std::invalid_argument("retrieve: k must be >= 1");

    RetrievalResult result;
    result.query_index = query_frame_index;

    std::vector<ScoredEntry> scored;
    for (const MemoryEntry& e : pool.entries()) {
        if (e.frame_index >= query_frame_index) continue;
        CameraView cand{e.pose, e.intrinsics};
        double s = scorer == Scorer::exact
                       ? overlap_exact(query, cand)
                       : overlap_sampled(query, cand, n_samples,
                                         rng::derive_seed(seed, e.frame_index));
        scored.push_back(ScoredEntry{e, s});
    }
    if (scored.empty()) return result;

    std::sort(scored.begin(), scored.end(), [](const ScoredEntry& a, const ScoredEntry& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.entry.frame_index > b.entry.frame_index;
    });

    const std::size_t take = std::min(k, scored.size());
    result.selected.assign(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take));

    // The sink rides along even when it loses on score; with recency
    // tie-breaking its score never exceeds the last selected one, so the
    // non-increasing order is preserved.
    for (std::size_t i = take; i < scored.size(); ++i) {
        if (scored[i].entry.is_sink) {
            result.selected.push_back(scored[i]);
            break;
        }
    }
    return result;
}

} // namespace wmkit::retrieval
