// Copyright 2026 The wmkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>

#include "wmkit/curation.hpp"
#include "wmkit/explorer.hpp"
#include "wmkit/retrieval.hpp"
#include "wmkit/trainkit.hpp"

// Declarative run configuration for the command-line tool. A config file is
// a single versioned JSON object; every key is optional except
// config_version, unknown keys are rejected at any nesting level, and the
// defaults below are the documented defaults.
namespace wmkit::cli {

inline constexpr std::int64_t kConfigVersion = 1;

struct RopeParams {
    double theta_base = 1.0e4;
    double sigma_theta = 0.8;
    std::size_t head_count = 16;
    std::size_t rotary_dim = 64;

    bool operator==(const RopeParams&) const = default;

    /// Materializes the head-wise base table. Throws on invalid parameters.
    trainkit::RopeConfig build() const;
};

struct ExplorerParams {
    std::size_t width = 25;
    std::size_t height = 25;
    double wall_fraction = 0.0;  // 0 = open arena
    std::uint64_t ticks = 300;
    explorer::CameraMode camera_mode = explorer::CameraMode::sweep360;

    bool operator==(const ExplorerParams&) const = default;
};

struct RetrievalParams {
    std::size_t k = 5;
    std::uint64_t n_samples = 65536;
    retrieval::Scorer scorer = retrieval::Scorer::exact;

    bool operator==(const RetrievalParams&) const = default;
};

struct RunConfig {
    std::uint64_t seed = 0;
    unsigned jobs = 1;
    curation::FilterThresholds filter;   // see curation defaults
    trainkit::ContextLayout layout;      // see trainkit defaults
    RopeParams rope;
    ExplorerParams explorer;
    RetrievalParams retrieval;
};

/// Strict parse of a config file. Requires config_version ==
/// kConfigVersion; rejects unknown keys in the root and every section;
/// validates each section with its module's rules. Throws dataio::ParseError.
RunConfig parse_run_config(const std::string& json_text);

/// Serializes every field (two-space indented JSON, trailing newline).
/// write -> parse is the identity; the default-constructed output doubles
/// as the reference for documented defaults.
std::string write_run_config(const RunConfig& config);

const char* to_string(explorer::CameraMode mode);
const char* to_string(retrieval::Scorer scorer);
explorer::CameraMode camera_mode_from_string(const std::string& text);
retrieval::Scorer scorer_from_string(const std::string& text);

} // namespace wmkit::cli
