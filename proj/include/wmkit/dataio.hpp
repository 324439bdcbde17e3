// Copyright 2026 The wmkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "wmkit/actions.hpp"
#include "wmkit/curation.hpp"
#include "wmkit/geometry.hpp"

// Bit-exact readers and writers for the dataset artifacts: per-frame CSV
// records, agent-state JSON files, segment and clip manifests, caption
// records, and filter reports. Readers reject malformed input with named
// errors and never coerce; writers are byte-deterministic. Byte-level format
// documentation lives in docs/FORMATS.md.
namespace wmkit::dataio {

/// Reader failure with a 1-based source location. For CSV input line 1 is
/// the header and `column` is the field ordinal within the row; JSON readers
/// report 0/0 when no position is meaningful.
class ParseError : public std::runtime_error {
  public:
    explicit ParseError(const std::string& message, std::size_t line = 0,
                        std::size_t column = 0)
        : std::runtime_error(message), line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

  private:
    std::size_t line_;
    std::size_t column_;
};

/// Thrown when a state file's write counter moves backwards relative to a
/// previously observed value.
class StaleReadError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Per-frame CSV records

/// One row of the per-frame capture CSV: pose for player and camera
/// (quaternions in wxyz order), the six binary action flags, and the capture
/// timestamp. The trailing intrinsics columns are an extension to the
/// recorded camera parameters; see docs/FORMATS.md.
struct FrameRecord {
    std::uint64_t frame_index = 0;
    geom::Vec3 player_position;
    geom::UnitQuaternion player_rotation;
    geom::Vec3 camera_position;
    geom::UnitQuaternion camera_rotation;
    actions::ActionVector action;
    double timestamp = 0.0;  // seconds
    geom::CameraIntrinsics intrinsics;

    bool operator==(const FrameRecord&) const = default;
};

/// The fixed 26-column header row, without a trailing newline.
std::string frame_csv_header();

/// Serializes records under the fixed header, one row per record, "\n" line
/// endings. Floating-point fields use 17 significant digits so that
/// read_frame_csv(write_frame_csv(x)) == x bit-exact, and output bytes are
/// identical for identical input. Throws std::invalid_argument on
/// non-finite fields, quaternions off unit norm by more than 1e-6, or
/// invalid intrinsics.
std::string write_frame_csv(const std::vector<FrameRecord>& records);

/// Parses write_frame_csv output. Throws ParseError naming line and column
/// on a wrong header, wrong field count, an unparsable cell, an action flag
/// outside {0,1}, a non-finite float, a quaternion off unit norm by more
/// than 1e-6, or invalid intrinsics. A missing final newline is accepted.
std::vector<FrameRecord> read_frame_csv(std::string_view text);

// ---------------------------------------------------------------------------
// Agent state files (single writer, many readers)

/// Snapshot of the per-frame simulator state exported for pollers, plus a
/// counter that strictly increases across writes so a reader can detect
/// stale or torn files.
struct AgentStateFile {
    std::uint64_t counter = 0;
    actions::FrameState state;

    bool operator==(const AgentStateFile&) const = default;
};

/// Single-line JSON with canonical key order (counter, frame_index,
/// player_position, player_rotation, camera_position, camera_rotation, nav,
/// jump, attack) and shortest round-trip doubles. Throws
/// std::invalid_argument on non-finite fields or a rotation off unit norm
/// by more than 1e-6.
std::string write_state_json(const AgentStateFile& file);

/// Strict reader: unknown keys, missing keys, wrong types, and non-unit
/// rotations are ParseErrors (a torn write surfaces as a JSON parse error).
/// When `last_seen_counter` is given, a counter below it throws
/// StaleReadError; an equal counter is the same write observed again and is
/// allowed.
AgentStateFile read_state_json(std::string_view text,
                               std::optional<std::uint64_t> last_seen_counter = std::nullopt);

// ---------------------------------------------------------------------------
// Manifests

/// One recorded segment file. duration_s is nominally 60 s; the recorder
/// may cut the final segment of a session short.
struct SegmentEntry {
    std::string file_id;
    double start_s = 0.0;
    double duration_s = 60.0;
    std::uint64_t frame_count = 0;

    bool operator==(const SegmentEntry&) const = default;
};

struct SegmentManifest {
    std::vector<SegmentEntry> segments;

    bool operator==(const SegmentManifest&) const = default;
};

std::string write_segment_manifest(const SegmentManifest& manifest);
SegmentManifest read_segment_manifest(std::string_view text);

enum class SourceKind { unreal, aaa, real };

const char* to_string(SourceKind source);
/// Throws ParseError for anything but "unreal", "aaa", "real".
SourceKind source_from_string(std::string_view name);

/// Description of one clip: identity, provenance, expected frame count,
/// artifact paths (state/caption may be empty when the artifact is absent),
/// FNV-1a 64 checksum of the CSV bytes, and the segment layout.
struct ClipManifest {
    std::string clip_id;
    SourceKind source = SourceKind::unreal;
    std::uint64_t frame_count = 0;
    std::string csv_path;
    std::string state_path;
    std::string caption_path;
    std::uint64_t checksum = 0;
    SegmentManifest segments;

    bool operator==(const ClipManifest&) const = default;
};

std::string write_clip_manifest(const ClipManifest& manifest);
ClipManifest read_clip_manifest(std::string_view text);

struct ManifestCheck {
    std::string name;  // files | contiguity | frame_count | checksum
    bool pass = false;
    std::string detail;
};

struct ManifestReport {
    std::vector<ManifestCheck> checks;
    bool pass = false;  // AND over checks
};

/// Validates a manifest against the filesystem: referenced files exist
/// (state/caption only when non-empty), consecutive segments are contiguous
/// in time within one frame duration of the earlier segment, the CSV parses
/// to exactly frame_count records (segment counts, when present, must also
/// sum to it), and the checksum matches the CSV bytes. Relative paths
/// resolve against base_dir. Failures go into the report; nothing throws.
ManifestReport validate_manifest(const ClipManifest& manifest,
                                 const std::filesystem::path& base_dir = ".");

// ---------------------------------------------------------------------------
// Caption records and filter reports

/// Canonical key order: narrative, static_scene, dense_temporal, quality.
/// Validates the record before writing.
std::string write_caption_json(const curation::CaptionRecord& record);
curation::CaptionRecord read_caption_json(std::string_view text);

/// Canonical key order: keep, criteria, reasons, notes.
std::string write_filter_report_json(const curation::FilterReport& report);
curation::FilterReport read_filter_report_json(std::string_view text);

} // namespace wmkit::dataio
