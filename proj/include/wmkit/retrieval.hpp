// Copyright 2026 The wmkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wmkit/geometry.hpp"

// Camera-aware memory retrieval: exact and sampled frustum-overlap scores,
// top-k selection over a growing candidate set, and the online memory pool
// with sink retention.
namespace wmkit::retrieval {

struct CameraView {
    geom::Pose6DoF pose;
    geom::CameraIntrinsics intrinsics;
};

/// Fraction of the query frustum's volume covered by the candidate frustum,
/// in [0, 1]. Computed by clipping the query polytope against the candidate's
/// six half-spaces and taking the exact divergence-theorem volume.
/// Throws std::invalid_argument on invalid intrinsics.
double overlap_exact(const CameraView& query, const CameraView& cand);

/// Monte-Carlo estimate of overlap_exact: draws points uniformly inside the
/// query frustum (rejection sampling within its axis-aligned bounding box)
/// until `n_samples` are accepted, then returns the fraction that also lie in
/// the candidate frustum. Unbiased, variance s(1-s)/N, deterministic per seed.
double overlap_sampled(const CameraView& query, const CameraView& cand,
                       std::uint64_t n_samples, std::uint64_t seed);

enum class Scorer { exact, sampled };

/// Element-wise overlap of `query` against each candidate. For the sampled
/// scorer, candidate i uses seed derive_seed(seed, i), so results are
/// independent of evaluation order; `jobs` > 1 splits candidates across
/// threads without changing any value.
std::vector<double> batch_overlap(const CameraView& query,
                                  const std::vector<CameraView>& candidates, Scorer scorer,
                                  std::uint64_t n_samples, std::uint64_t seed,
                                  unsigned jobs = 1);

struct MemoryEntry {
    std::uint64_t frame_index = 0;  // original temporal index, unique in a pool
    geom::Pose6DoF pose;
    geom::CameraIntrinsics intrinsics;
    std::string payload_id;  // opaque handle to the stored latent/frame
    bool is_sink = false;
};

/// Ordered store of memory entries. At most one sink entry; the sink is
/// never evicted and does not count against capacity. Eviction is FIFO by
/// frame_index over the non-sink entries.
class MemoryPool {
public:
    MemoryPool() = default;
    explicit MemoryPool(std::optional<std::size_t> capacity) : capacity_(capacity) {}

    /// Appends entries (frame_index must exceed every existing index; at most
    /// one sink across the pool's lifetime), then evicts oldest non-sink
    /// entries down to capacity. Throws std::invalid_argument on duplicate or
    /// non-increasing frame_index or on a second sink.
    void update(const std::vector<MemoryEntry>& new_entries);

    const std::vector<MemoryEntry>& entries() const { return entries_; }
    std::optional<std::size_t> capacity() const { return capacity_; }
    bool has_sink() const;
    std::size_t size() const { return entries_.size(); }

private:
    std::vector<MemoryEntry> entries_;  // ordered by frame_index
    std::optional<std::size_t> capacity_;  // max non-sink entries; nullopt = unbounded
};

struct ScoredEntry {
    MemoryEntry entry;
    double score = 0.0;
};

struct RetrievalResult {
    std::vector<ScoredEntry> selected;  // scores non-increasing
    std::uint64_t query_index = 0;
};

/// Top-k entries of the pool by overlap with the query view, ties broken by
/// larger frame_index (most recent). Only entries with frame_index strictly
/// below `query_frame_index` are eligible. The sink entry, when eligible and
/// not already selected, is appended after the top-k. For the sampled scorer
/// each entry uses seed derive_seed(seed, entry.frame_index). An empty or
/// fully ineligible pool yields an empty result. Throws std::invalid_argument
/// when k == 0.
RetrievalResult retrieve(const CameraView& query, std::uint64_t query_frame_index,
                         const MemoryPool& pool, std::size_t k = 5,
                         Scorer scorer = Scorer::exact, std::uint64_t n_samples = 65536,
                         std::uint64_t seed = 0);

} // namespace wmkit::retrieval
