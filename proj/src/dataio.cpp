// Copyright 2026 The wmkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "wmkit/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "wmkit/digest.hpp"

namespace wmkit::dataio {
namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::size_t kFrameColumns = 26;

const char* const kFrameHeader =
    "frame_index,"
    "player_pos_x,player_pos_y,player_pos_z,"
    "player_rot_w,player_rot_x,player_rot_y,player_rot_z,"
    "camera_pos_x,camera_pos_y,camera_pos_z,"
    "camera_rot_w,camera_rot_x,camera_rot_y,camera_rot_z,"
    "forward,backward,left,right,jump,attack,"
    "timestamp,"
    "fov_y,aspect,near,far";

// ---------------------------------------------------------------------------
// CSV primitives

void append_double(std::string& out, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

[[noreturn]] void fail(std::size_t line, std::size_t column, const std::string& what) {
    std::ostringstream msg;
    msg << "frame csv: line " << line << ", column " << column << ": " << what;
    throw ParseError(msg.str(), line, column);
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

double parse_double(std::string_view cell, std::size_t line, std::size_t column) {
    double v = 0.0;
    const char* last = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(cell.data(), last, v);
    if (ec != std::errc() || ptr != last)
        fail(line, column, "expected a decimal number, got \"" + std::string(cell) + "\"");
    if (!std::isfinite(v))
        fail(line, column, "non-finite value \"" + std::string(cell) + "\"");
    return v;
}

std::uint64_t parse_u64(std::string_view cell, std::size_t line, std::size_t column) {
    std::uint64_t v = 0;
    const char* last = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(cell.data(), last, v);
    if (ec != std::errc() || ptr != last)
        fail(line, column, "expected an unsigned integer, got \"" + std::string(cell) + "\"");
    return v;
}

bool parse_flag(std::string_view cell, std::size_t line, std::size_t column) {
    if (cell == "0") return false;
    if (cell == "1") return true;
    fail(line, column, "action flag must be 0 or 1, got \"" + std::string(cell) + "\"");
}

double quat_norm(const geom::UnitQuaternion& q) {
    return std::sqrt(q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z);
}

FrameRecord parse_row(std::string_view line, std::size_t lineno) {
    const auto cells = split_fields(line);
    if (cells.size() != kFrameColumns) {
        std::ostringstream msg;
        msg << "expected " << kFrameColumns << " fields, got " << cells.size();
        fail(lineno, 1, msg.str());
    }
    std::size_t col = 1;
    auto d = [&]() {
        const std::size_t c = col++;
        return parse_double(cells[c - 1], lineno, c);
    };
    auto u = [&]() {
        const std::size_t c = col++;
        return parse_u64(cells[c - 1], lineno, c);
    };
    auto f = [&]() {
        const std::size_t c = col++;
        return parse_flag(cells[c - 1], lineno, c);
    };
    auto quat = [&](const char* what) {
        const std::size_t c0 = col;
        geom::UnitQuaternion q;
        q.w = d();
        q.x = d();
        q.y = d();
        q.z = d();
        if (!(std::abs(quat_norm(q) - 1.0) <= 1e-6))
            fail(lineno, c0,
                 std::string(what) + " rotation off unit norm by more than 1e-6");
        return q;
    };

    FrameRecord r;
    r.frame_index = u();
    r.player_position = {d(), d(), d()};
    r.player_rotation = quat("player");
    r.camera_position = {d(), d(), d()};
    r.camera_rotation = quat("camera");
    r.action.forward = f();
    r.action.backward = f();
    r.action.left = f();
    r.action.right = f();
    r.action.jump = f();
    r.action.attack = f();
    r.timestamp = d();
    const std::size_t ic = col;
    r.intrinsics.vertical_fov = d();
    r.intrinsics.aspect_ratio = d();
    r.intrinsics.near_plane = d();
    r.intrinsics.far_plane = d();
    try {
        r.intrinsics.validate();
    } catch (const std::invalid_argument& e) {
        fail(lineno, ic, std::string("intrinsics: ") + e.what());
    }
    return r;
}

void check_header(std::string_view line) {
    if (line == kFrameHeader) return;
    const auto expected = split_fields(kFrameHeader);
    const auto got = split_fields(line);
    for (std::size_t i = 0; i < std::min(expected.size(), got.size()); ++i) {
        if (expected[i] != got[i])
            fail(1, i + 1,
                 "header mismatch: expected \"" + std::string(expected[i]) + "\", got \"" +
                     std::string(got[i]) + "\"");
    }
    std::ostringstream msg;
    msg << "header has " << got.size() << " fields, expected " << expected.size();
    fail(1, std::min(expected.size(), got.size()) + 1, msg.str());
}

void require_finite(double v, const char* what) {
    if (!std::isfinite(v))
        throw std::invalid_argument(std::string("frame csv: non-finite ") + what);
}

void require_unit(const geom::UnitQuaternion& q, const char* what) {
    if (!(std::abs(quat_norm(q) - 1.0) <= 1e-6))
        throw std::invalid_argument(std::string("frame csv: ") + what +
                                    " rotation off unit norm by more than 1e-6");
}

// ---------------------------------------------------------------------------
// JSON primitives

[[noreturn]] void jfail(const char* what, const std::string& msg) {
    throw ParseError(std::string(what) + ": " + msg);
}

ordered_json parse_json(std::string_view text, const char* what) {
    try {
        return ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string(what) + ": " + e.what());
    }
}

void check_object_keys(const ordered_json& j, std::initializer_list<const char*> keys,
                       const char* what) {
    if (!j.is_object()) jfail(what, "expected a JSON object");
    for (const auto& item : j.items()) {
        const bool known = std::any_of(keys.begin(), keys.end(),
                                       [&](const char* k) { return item.key() == k; });
        if (!known) jfail(what, "unknown key \"" + item.key() + "\"");
    }
    for (const char* k : keys)
        if (!j.contains(k)) jfail(what, std::string("missing key \"") + k + "\"");
}

double jnum(const ordered_json& v, const char* where, const char* what) {
    if (!v.is_number()) jfail(what, std::string(where) + ": expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) jfail(what, std::string(where) + ": non-finite number");
    return d;
}

std::uint64_t juint(const ordered_json& v, const char* where, const char* what) {
    if (!v.is_number_unsigned())
        jfail(what, std::string(where) + ": expected a non-negative integer");
    return v.get<std::uint64_t>();
}

bool jbool(const ordered_json& v, const char* where, const char* what) {
    if (!v.is_boolean()) jfail(what, std::string(where) + ": expected a boolean");
    return v.get<bool>();
}

std::string jstring(const ordered_json& v, const char* where, const char* what) {
    if (!v.is_string()) jfail(what, std::string(where) + ": expected a string");
    return v.get<std::string>();
}

geom::Vec3 jvec3(const ordered_json& v, const char* where, const char* what) {
    if (!v.is_array() || v.size() != 3)
        jfail(what, std::string(where) + ": expected an array of 3 numbers");
    return {jnum(v[0], where, what), jnum(v[1], where, what), jnum(v[2], where, what)};
}

geom::UnitQuaternion jquat(const ordered_json& v, const char* where, const char* what) {
    if (!v.is_array() || v.size() != 4)
        jfail(what, std::string(where) + ": expected an array of 4 numbers (wxyz)");
    geom::UnitQuaternion q;
    q.w = jnum(v[0], where, what);
    q.x = jnum(v[1], where, what);
    q.y = jnum(v[2], where, what);
    q.z = jnum(v[3], where, what);
    if (!(std::abs(quat_norm(q) - 1.0) <= 1e-6))
        jfail(what, std::string(where) + ": rotation off unit norm by more than 1e-6");
    return q;
}

ordered_json vec3_json(const geom::Vec3& v) { return ordered_json::array({v.x, v.y, v.z}); }

ordered_json quat_json(const geom::UnitQuaternion& q) {
    return ordered_json::array({q.w, q.x, q.y, q.z});
}

void require_finite_json(double v, const char* what, const char* format) {
    if (!std::isfinite(v))
        throw std::invalid_argument(std::string(format) + ": non-finite " + what);
}

// ---------------------------------------------------------------------------
// Segment entries (shared by both manifest formats)

ordered_json segment_json(const SegmentEntry& s) {
    ordered_json j;
    j["file_id"] = s.file_id;
    j["start_s"] = s.start_s;
    j["duration_s"] = s.duration_s;
    j["frame_count"] = s.frame_count;
    return j;
}

SegmentEntry segment_from_json(const ordered_json& v, const char* what) {
    check_object_keys(v, {"file_id", "start_s", "duration_s", "frame_count"}, what);
    SegmentEntry s;
    s.file_id = jstring(v.at("file_id"), "file_id", what);
    s.start_s = jnum(v.at("start_s"), "start_s", what);
    s.duration_s = jnum(v.at("duration_s"), "duration_s", what);
    if (s.duration_s < 0.0) jfail(what, "duration_s: negative duration");
    s.frame_count = juint(v.at("frame_count"), "frame_count", what);
    return s;
}

void require_segment_writable(const SegmentEntry& s, const char* format) {
    require_finite_json(s.start_s, "start_s", format);
    require_finite_json(s.duration_s, "duration_s", format);
    if (s.duration_s < 0.0)
        throw std::invalid_argument(std::string(format) + ": negative duration_s");
}

} // namespace

// ---------------------------------------------------------------------------
// Per-frame CSV

std::string frame_csv_header() { return kFrameHeader; }

std::string write_frame_csv(const std::vector<FrameRecord>& records) {
    for (const auto& r : records) {
        require_finite(r.player_position.x, "player position");
        require_finite(r.player_position.y, "player position");
        require_finite(r.player_position.z, "player position");
        require_finite(r.camera_position.x, "camera position");
        require_finite(r.camera_position.y, "camera position");
        require_finite(r.camera_position.z, "camera position");
        require_finite(r.timestamp, "timestamp");
        require_unit(r.player_rotation, "player");
        require_unit(r.camera_rotation, "camera");
        try {
            r.intrinsics.validate();
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(std::string("frame csv: intrinsics: ") + e.what());
        }
    }

    std::string out;
    out.reserve(64 + records.size() * 512);
    out += kFrameHeader;
    out += '\n';
    for (const auto& r : records) {
        out += std::to_string(r.frame_index);
        const double doubles[] = {r.player_position.x, r.player_position.y,
                                  r.player_position.z, r.player_rotation.w,
                                  r.player_rotation.x, r.player_rotation.y,
                                  r.player_rotation.z, r.camera_position.x,
                                  r.camera_position.y, r.camera_position.z,
                                  r.camera_rotation.w, r.camera_rotation.x,
                                  r.camera_rotation.y, r.camera_rotation.z};
        for (const double v : doubles) {
            out += ',';
            append_double(out, v);
        }
        const bool flags[] = {r.action.forward, r.action.backward, r.action.left,
                              r.action.right,   r.action.jump,     r.action.attack};
        for (const bool b : flags) {
            out += ',';
            out += b ? '1' : '0';
        }
        out += ',';
        append_double(out, r.timestamp);
        const double intr[] = {r.intrinsics.vertical_fov, r.intrinsics.aspect_ratio,
                               r.intrinsics.near_plane, r.intrinsics.far_plane};
        for (const double v : intr) {
            out += ',';
            append_double(out, v);
        }
        out += '\n';
    }
    return out;
}

std::vector<FrameRecord> read_frame_csv(std::string_view text) {
    if (text.empty()) throw ParseError("frame csv: line 1, column 1: empty input", 1, 1);
    std::vector<FrameRecord> out;
    std::size_t lineno = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t nl = text.find('\n', pos);
        const std::string_view line =
            nl == std::string_view::npos ? text.substr(pos) : text.substr(pos, nl - pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        ++lineno;
        if (lineno == 1) {
            check_header(line);
            continue;
        }
        out.push_back(parse_row(line, lineno));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Agent state files

std::string write_state_json(const AgentStateFile& file) {
    const auto& s = file.state;
    auto finite = [](double v, const char* what) {
        if (!std::isfinite(v))
            throw std::invalid_argument(std::string("state json: non-finite ") + what);
    };
    finite(s.player_position.x, "player_position");
    finite(s.player_position.y, "player_position");
    finite(s.player_position.z, "player_position");
    finite(s.camera_pose.position.x, "camera_position");
    finite(s.camera_pose.position.y, "camera_position");
    finite(s.camera_pose.position.z, "camera_position");
    if (!(std::abs(quat_norm(s.player_rotation) - 1.0) <= 1e-6))
        throw std::invalid_argument(
            "state json: player rotation off unit norm by more than 1e-6");
    if (!(std::abs(quat_norm(s.camera_pose.rotation) - 1.0) <= 1e-6))
        throw std::invalid_argument(
            "state json: camera rotation off unit norm by more than 1e-6");

    ordered_json j;
    j["counter"] = file.counter;
    j["frame_index"] = s.frame_index;
    j["player_position"] = vec3_json(s.player_position);
    j["player_rotation"] = quat_json(s.player_rotation);
    j["camera_position"] = vec3_json(s.camera_pose.position);
    j["camera_rotation"] = quat_json(s.camera_pose.rotation);
    j["nav"] = s.nav_flag;
    j["jump"] = s.jump_flag;
    j["attack"] = s.attack_flag;
    return j.dump();
}

AgentStateFile read_state_json(std::string_view text,
                               std::optional<std::uint64_t> last_seen_counter) {
    const char* what = "state json";
    const auto j = parse_json(text, what);
    check_object_keys(j,
                      {"counter", "frame_index", "player_position", "player_rotation",
                       "camera_position", "camera_rotation", "nav", "jump", "attack"},
                      what);
    AgentStateFile f;
    f.counter = juint(j.at("counter"), "counter", what);
    f.state.frame_index = juint(j.at("frame_index"), "frame_index", what);
    f.state.player_position = jvec3(j.at("player_position"), "player_position", what);
    f.state.player_rotation = jquat(j.at("player_rotation"), "player_rotation", what);
    f.state.camera_pose.position = jvec3(j.at("camera_position"), "camera_position", what);
    f.state.camera_pose.rotation = jquat(j.at("camera_rotation"), "camera_rotation", what);
    f.state.nav_flag = jbool(j.at("nav"), "nav", what);
    f.state.jump_flag = jbool(j.at("jump"), "jump", what);
    f.state.attack_flag = jbool(j.at("attack"), "attack", what);
    if (last_seen_counter && f.counter < *last_seen_counter) {
        std::ostringstream msg;
        msg << "stale or torn read: counter went from " << *last_seen_counter << " to "
            << f.counter;
        throw StaleReadError(msg.str());
    }
    return f;
}

// ---------------------------------------------------------------------------
// Manifests

std::string write_segment_manifest(const SegmentManifest& manifest) {
    for (const auto& s : manifest.segments) require_segment_writable(s, "segment manifest");
    ordered_json j;
    auto arr = ordered_json::array();
    for (const auto& s : manifest.segments) arr.push_back(segment_json(s));
    j["segments"] = std::move(arr);
    return j.dump(2) + "\n";
}

SegmentManifest read_segment_manifest(std::string_view text) {
    const char* what = "segment manifest";
    const auto j = parse_json(text, what);
    check_object_keys(j, {"segments"}, what);
    const auto& arr = j.at("segments");
    if (!arr.is_array()) jfail(what, "segments: expected an array");
    SegmentManifest m;
    m.segments.reserve(arr.size());
    for (const auto& v : arr) m.segments.push_back(segment_from_json(v, what));
    return m;
}

const char* to_string(SourceKind source) {
    switch (source) {
        case SourceKind::unreal: return "unreal";
        case SourceKind::aaa: return "aaa";
        case SourceKind::real: return "real";
    }
    return "unreal";
}

SourceKind source_from_string(std::string_view name) {
    if (name == "unreal") return SourceKind::unreal;
    if (name == "aaa") return SourceKind::aaa;
    if (name == "real") return SourceKind::real;
    throw ParseError("clip manifest: unknown source \"" + std::string(name) +
                     "\" (expected unreal, aaa, or real)");
}

std::string write_clip_manifest(const ClipManifest& manifest) {
    for (const auto& s : manifest.segments.segments)
        require_segment_writable(s, "clip manifest");
    ordered_json j;
    j["clip_id"] = manifest.clip_id;
    j["source"] = to_string(manifest.source);
    j["frame_count"] = manifest.frame_count;
    j["csv_path"] = manifest.csv_path;
    j["state_path"] = manifest.state_path;
    j["caption_path"] = manifest.caption_path;
    j["checksum"] = manifest.checksum;
    auto arr = ordered_json::array();
    for (const auto& s : manifest.segments.segments) arr.push_back(segment_json(s));
    j["segments"] = std::move(arr);
    return j.dump(2) + "\n";
}

ClipManifest read_clip_manifest(std::string_view text) {
    const char* what = "clip manifest";
    const auto j = parse_json(text, what);
    check_object_keys(j,
                      {"clip_id", "source", "frame_count", "csv_path", "state_path",
                       "caption_path", "checksum", "segments"},
                      what);
    ClipManifest m;
    m.clip_id = jstring(j.at("clip_id"), "clip_id", what);
    m.source = source_from_string(jstring(j.at("source"), "source", what));
    m.frame_count = juint(j.at("frame_count"), "frame_count", what);
    m.csv_path = jstring(j.at("csv_path"), "csv_path", what);
    m.state_path = jstring(j.at("state_path"), "state_path", what);
    m.caption_path = jstring(j.at("caption_path"), "caption_path", what);
    m.checksum = juint(j.at("checksum"), "checksum", what);
    const auto& arr = j.at("segments");
    if (!arr.is_array()) jfail(what, "segments: expected an array");
    m.segments.segments.reserve(arr.size());
    for (const auto& v : arr) m.segments.segments.push_back(segment_from_json(v, what));
    return m;
}

ManifestReport validate_manifest(const ClipManifest& manifest,
                                 const std::filesystem::path& base_dir) {
    namespace fs = std::filesystem;
    ManifestReport rep;
    auto add = [&rep](const char* name, bool pass, std::string detail) {
        rep.checks.push_back({name, pass, std::move(detail)});
    };
    auto resolve = [&](const std::string& p) {
        const fs::path q(p);
        return q.is_absolute() ? q : base_dir / q;
    };

    std::string missing;
    auto probe = [&](const std::string& p, const char* label) {
        std::error_code ec;
        if (!fs::is_regular_file(resolve(p), ec)) {
            if (!missing.empty()) missing += ", ";
            missing += std::string(label) + " \"" + p + "\"";
        }
    };
    if (manifest.csv_path.empty())
        missing = "csv path empty";
    else
        probe(manifest.csv_path, "csv");
    if (!manifest.state_path.empty()) probe(manifest.state_path, "state");
    if (!manifest.caption_path.empty()) probe(manifest.caption_path, "caption");
    add("files", missing.empty(),
        missing.empty() ? "all referenced files present" : "missing: " + missing);

    const auto& segs = manifest.segments.segments;
    bool contig = true;
    std::string cdetail = segs.size() < 2
                              ? "fewer than two segments, trivially contiguous"
                              : "all boundaries within one frame duration";
    for (std::size_t i = 1; i < segs.size() && contig; ++i) {
        const auto& prev = segs[i - 1];
        const auto& next = segs[i];
        const double frame_dur =
            prev.frame_count > 0 ? prev.duration_s / static_cast<double>(prev.frame_count)
                                 : 0.0;
        const double gap = std::abs(next.start_s - (prev.start_s + prev.duration_s));
        if (gap > frame_dur + 1e-12) {
            contig = false;
            std::ostringstream msg;
            msg << "gap of " << gap << " s between \"" << prev.file_id << "\" and \""
                << next.file_id << "\" exceeds one frame duration (" << frame_dur << " s)";
            cdetail = msg.str();
        }
    }
    add("contiguity", contig, cdetail);

    std::string bytes;
    bool have_bytes = false;
    if (!manifest.csv_path.empty()) {
        std::ifstream in(resolve(manifest.csv_path), std::ios::binary);
        if (in) {
            std::ostringstream ss;
            ss << in.rdbuf();
            bytes = ss.str();
            have_bytes = true;
        }
    }

    if (!have_bytes) {
        add("frame_count", false, "csv unreadable");
        add("checksum", false, "csv unreadable");
    } else {
        bool fc_ok = true;
        std::ostringstream fdetail;
        try {
            const auto records = read_frame_csv(bytes);
            fc_ok = records.size() == manifest.frame_count;
            fdetail << "csv has " << records.size() << " records, manifest expects "
                    << manifest.frame_count;
            if (!segs.empty()) {
                std::uint64_t sum = 0;
                for (const auto& s : segs) sum += s.frame_count;
                fdetail << "; segments sum to " << sum;
                fc_ok = fc_ok && sum == manifest.frame_count;
            }
        } catch (const ParseError& e) {
            fc_ok = false;
            fdetail << "csv parse failed: " << e.what();
        }
        add("frame_count", fc_ok, fdetail.str());

        const std::uint64_t sum = digest::fnv1a64(bytes.data(), bytes.size());
        std::ostringstream sdetail;
        sdetail << "csv fnv1a64 " << sum << ", manifest " << manifest.checksum;
        add("checksum", sum == manifest.checksum, sdetail.str());
    }

    rep.pass = std::all_of(rep.checks.begin(), rep.checks.end(),
                           [](const ManifestCheck& c) { return c.pass; });
    return rep;
}

// ---------------------------------------------------------------------------
// Caption records and filter reports

std::string write_caption_json(const curation::CaptionRecord& record) {
    record.validate();
    for (const auto& t : record.dense_temporal) {
        require_finite_json(t.start_s, "start_s", "caption json");
        require_finite_json(t.end_s, "end_s", "caption json");
    }
    ordered_json j;
    j["narrative"] = record.narrative;
    j["static_scene"] = record.static_scene;
    auto arr = ordered_json::array();
    for (const auto& t : record.dense_temporal) {
        ordered_json s;
        s["start_s"] = t.start_s;
        s["end_s"] = t.end_s;
        s["event"] = t.event;
        s["camera_motion"] = t.camera_motion;
        arr.push_back(std::move(s));
    }
    j["dense_temporal"] = std::move(arr);
    ordered_json q;
    q["motion_smoothness"] = record.quality.motion_smoothness;
    q["background_dynamics"] = record.quality.background_dynamics;
    q["scene_complexity"] = record.quality.scene_complexity;
    q["physics_plausibility"] = record.quality.physics_plausibility;
    q["overall"] = record.quality.overall;
    j["quality"] = std::move(q);
    return j.dump(2) + "\n";
}

curation::CaptionRecord read_caption_json(std::string_view text) {
    const char* what = "caption json";
    const auto j = parse_json(text, what);
    check_object_keys(j, {"narrative", "static_scene", "dense_temporal", "quality"}, what);
    curation::CaptionRecord r;
    r.narrative = jstring(j.at("narrative"), "narrative", what);
    r.static_scene = jstring(j.at("static_scene"), "static_scene", what);
    const auto& arr = j.at("dense_temporal");
    if (!arr.is_array()) jfail(what, "dense_temporal: expected an array");
    for (const auto& v : arr) {
        check_object_keys(v, {"start_s", "end_s", "event", "camera_motion"}, what);
        curation::TemporalSegment t;
        t.start_s = jnum(v.at("start_s"), "start_s", what);
        t.end_s = jnum(v.at("end_s"), "end_s", what);
        t.event = jstring(v.at("event"), "event", what);
        t.camera_motion = jstring(v.at("camera_motion"), "camera_motion", what);
        r.dense_temporal.push_back(std::move(t));
    }
    const auto& q = j.at("quality");
    check_object_keys(q,
                      {"motion_smoothness", "background_dynamics", "scene_complexity",
                       "physics_plausibility", "overall"},
                      what);
    r.quality.motion_smoothness = jnum(q.at("motion_smoothness"), "motion_smoothness", what);
    r.quality.background_dynamics =
        jnum(q.at("background_dynamics"), "background_dynamics", what);
    r.quality.scene_complexity = jnum(q.at("scene_complexity"), "scene_complexity", what);
    r.quality.physics_plausibility =
        jnum(q.at("physics_plausibility"), "physics_plausibility", what);
    r.quality.overall = jnum(q.at("overall"), "overall", what);
    try {
        r.validate();
    } catch (const std::invalid_argument& e) {
        jfail(what, e.what());
    }
    return r;
}

std::string write_filter_report_json(const curation::FilterReport& report) {
    for (const auto& c : report.criteria)
        require_finite_json(c.measured, "measured", "filter report json");
    ordered_json j;
    j["keep"] = report.keep;
    auto arr = ordered_json::array();
    for (const auto& c : report.criteria) {
        ordered_json v;
        v["name"] = c.name;
        v["evaluated"] = c.evaluated;
        v["pass"] = c.pass;
        v["measured"] = c.measured;
        arr.push_back(std::move(v));
    }
    j["criteria"] = std::move(arr);
    j["reasons"] = report.reasons;
    j["notes"] = report.notes;
    return j.dump(2) + "\n";
}

curation::FilterReport read_filter_report_json(std::string_view text) {
    const char* what = "filter report json";
    const auto j = parse_json(text, what);
    check_object_keys(j, {"keep", "criteria", "reasons", "notes"}, what);
    curation::FilterReport r;
    r.keep = jbool(j.at("keep"), "keep", what);
    const auto& arr = j.at("criteria");
    if (!arr.is_array()) jfail(what, "criteria: expected an array");
    for (const auto& v : arr) {
        check_object_keys(v, {"name", "evaluated", "pass", "measured"}, what);
        curation::CriterionResult c;
        c.name = jstring(v.at("name"), "name", what);
        c.evaluated = jbool(v.at("evaluated"), "evaluated", what);
        c.pass = jbool(v.at("pass"), "pass", what);
        c.measured = jnum(v.at("measured"), "measured", what);
        r.criteria.push_back(std::move(c));
    }
    auto strings = [&](const char* key) {
        const auto& a = j.at(key);
        if (!a.is_array()) jfail(what, std::string(key) + ": expected an array");
        std::vector<std::string> out;
        out.reserve(a.size());
        for (const auto& v : a) out.push_back(jstring(v, key, what));
        return out;
    };
    r.reasons = strings("reasons");
    r.notes = strings("notes");
    return r;
}

} // namespace wmkit::dataio
