// Copyright 2026 The wmkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <unistd.h>
#include <vector>

#include <doctest.h>

#include "wmkit/dataio.hpp"
#include "wmkit/digest.hpp"
#include "wmkit/rng.hpp"

using namespace wmkit;
using dataio::AgentStateFile;
using dataio::ClipManifest;
using dataio::FrameRecord;
using dataio::ParseError;
using dataio::SegmentEntry;
using dataio::SegmentManifest;
using dataio::SourceKind;
using dataio::StaleReadError;

namespace {

bool bits_equal(double a, double b) {
    return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

bool bits_equal(const geom::Vec3& a, const geom::Vec3& b) {
    return bits_equal(a.x, b.x) && bits_equal(a.y, b.y) && bits_equal(a.z, b.z);
}

bool bits_equal(const geom::UnitQuaternion& a, const geom::UnitQuaternion& b) {
    return bits_equal(a.w, b.w) && bits_equal(a.x, b.x) && bits_equal(a.y, b.y) &&
           bits_equal(a.z, b.z);
}

bool bits_equal(const FrameRecord& a, const FrameRecord& b) {
    return a.frame_index == b.frame_index && bits_equal(a.player_position, b.player_position) &&
           bits_equal(a.player_rotation, b.player_rotation) &&
           bits_equal(a.camera_position, b.camera_position) &&
           bits_equal(a.camera_rotation, b.camera_rotation) && a.action == b.action &&
           bits_equal(a.timestamp, b.timestamp) &&
           bits_equal(a.intrinsics.vertical_fov, b.intrinsics.vertical_fov) &&
           bits_equal(a.intrinsics.aspect_ratio, b.intrinsics.aspect_ratio) &&
           bits_equal(a.intrinsics.near_plane, b.intrinsics.near_plane) &&
           bits_equal(a.intrinsics.far_plane, b.intrinsics.far_plane);
}

bool bits_equal(const AgentStateFile& a, const AgentStateFile& b) {
    return a.counter == b.counter && a.state.frame_index == b.state.frame_index &&
           bits_equal(a.state.player_position, b.state.player_position) &&
           bits_equal(a.state.player_rotation, b.state.player_rotation) &&
           bits_equal(a.state.camera_pose.position, b.state.camera_pose.position) &&
           bits_equal(a.state.camera_pose.rotation, b.state.camera_pose.rotation) &&
           a.state.nav_flag == b.state.nav_flag && a.state.jump_flag == b.state.jump_flag &&
           a.state.attack_flag == b.state.attack_flag;
}

// Mixed-magnitude finite double: |v| spans roughly 1e-12 .. 1e12, with exact
// integers, negative zero, and plain unit-scale values all represented.
double random_double(std::mt19937_64& eng) {
    switch (rng::uniform_index(eng, 6)) {
        case 0: return 0.0;
        case 1: return -0.0;
        case 2: return std::floor(rng::uniform_range(eng, -1e6, 1e6));
        case 3: return rng::uniform_range(eng, -1.0, 1.0);
        case 4:
            return rng::uniform_range(eng, -1.0, 1.0) *
                   std::pow(10.0, rng::uniform_range(eng, -12.0, 12.0));
        default: return rng::normal(eng);
    }
}

geom::UnitQuaternion random_unit_quat(std::mt19937_64& eng) {
    geom::UnitQuaternion q;
    double n = 0.0;
    do {
        q.w = rng::normal(eng);
        q.x = rng::normal(eng);
        q.y = rng::normal(eng);
        q.z = rng::normal(eng);
        n = std::sqrt(q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z);
    } while (n < 1e-3);
    q.w /= n;
    q.x /= n;
    q.y /= n;
    q.z /= n;
    return q;
}

geom::Vec3 random_vec3(std::mt19937_64& eng) {
    return {random_double(eng), random_double(eng), random_double(eng)};
}

FrameRecord random_record(std::mt19937_64& eng, std::uint64_t index) {
    FrameRecord r;
    r.frame_index = index;
    r.player_position = random_vec3(eng);
    r.player_rotation = random_unit_quat(eng);
    r.camera_position = random_vec3(eng);
    r.camera_rotation = random_unit_quat(eng);
    r.action.forward = rng::uniform_index(eng, 2) == 1;
    r.action.backward = rng::uniform_index(eng, 2) == 1;
    r.action.left = rng::uniform_index(eng, 2) == 1;
    r.action.right = rng::uniform_index(eng, 2) == 1;
    r.action.jump = rng::uniform_index(eng, 2) == 1;
    r.action.attack = rng::uniform_index(eng, 2) == 1;
    r.timestamp = rng::uniform_range(eng, 0.0, 1e5);
    r.intrinsics.vertical_fov = rng::uniform_range(eng, 0.1, 3.0);
    r.intrinsics.aspect_ratio = rng::uniform_range(eng, 0.5, 3.0);
    r.intrinsics.near_plane = rng::uniform_range(eng, 0.01, 1.0);
    r.intrinsics.far_plane = r.intrinsics.near_plane + rng::uniform_range(eng, 0.1, 1000.0);
    return r;
}

AgentStateFile random_state(std::mt19937_64& eng, std::uint64_t counter) {
    AgentStateFile f;
    f.counter = counter;
    f.state.frame_index = rng::uniform_index(eng, 100000);
    f.state.player_position = random_vec3(eng);
    f.state.player_rotation = random_unit_quat(eng);
    f.state.camera_pose.position = random_vec3(eng);
    f.state.camera_pose.rotation = random_unit_quat(eng);
    f.state.nav_flag = rng::uniform_index(eng, 2) == 1;
    f.state.jump_flag = rng::uniform_index(eng, 2) == 1;
    f.state.attack_flag = rng::uniform_index(eng, 2) == 1;
    return f;
}

// Replaces field `column` (1-based) of line `lineno` (1-based) in a CSV blob.
std::string patch_cell(const std::string& text, std::size_t lineno, std::size_t column,
                       const std::string& value) {
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t nl = text.find('\n', pos);
        lines.push_back(text.substr(pos, nl - pos));
        pos = nl == std::string::npos ? text.size() : nl + 1;
    }
    std::string& line = lines.at(lineno - 1);
    std::vector<std::string> cells;
    pos = 0;
    while (true) {
        const std::size_t c = line.find(',', pos);
        if (c == std::string::npos) {
            cells.push_back(line.substr(pos));
            break;
        }
        cells.push_back(line.substr(pos, c - pos));
        pos = c + 1;
    }
    cells.at(column - 1) = value;
    line.clear();
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) line += ',';
        line += cells[i];
    }
    std::string out;
    for (const auto& l : lines) {
        out += l;
        out += '\n';
    }
    return out;
}

struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               ("wmkit_dataio_" + tag + "_" + std::to_string(::getpid()));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }

    void write(const std::string& name, const std::string& bytes) const {
        std::ofstream out(path / name, std::ios::binary);
        out << bytes;
    }
};

} // namespace

TEST_CASE("frame csv header is fixed and a header-only file round-trips") {
    const std::string header = dataio::frame_csv_header();
    CHECK(header.substr(0, 12) == "frame_index,");
    CHECK(header.find("player_rot_w") != std::string::npos);
    CHECK(header.find("fov_y") != std::string::npos);
    CHECK(header.find('\n') == std::string::npos);

    const std::string empty = dataio::write_frame_csv({});
    CHECK(empty == header + "\n");
    CHECK(dataio::read_frame_csv(empty).empty());
}

TEST_CASE("frame csv round-trips random records bit-exactly") {
    // 10^4 randomized records across several files.
    std::size_t total = 0;
    for (std::uint64_t file = 0; file < 20; ++file) {
        auto eng = rng::make_engine(rng::derive_seed(8841, file));
        std::vector<FrameRecord> records;
        for (std::uint64_t i = 0; i < 500; ++i) records.push_back(random_record(eng, i));

        const std::string text = dataio::write_frame_csv(records);
        const auto back = dataio::read_frame_csv(text);
        REQUIRE(back.size() == records.size());
        for (std::size_t i = 0; i < records.size(); ++i) {
            REQUIRE(bits_equal(back[i], records[i]));
            ++total;
        }

        // Byte determinism and write∘read stability.
        CHECK(dataio::write_frame_csv(records) == text);
        CHECK(dataio::write_frame_csv(back) == text);
    }
    CHECK(total == 10000);
}

TEST_CASE("frame csv reader accepts a missing final newline") {
    auto eng = rng::make_engine(7);
    const std::vector<FrameRecord> records{random_record(eng, 0), random_record(eng, 1)};
    std::string text = dataio::write_frame_csv(records);
    text.pop_back();
    const auto back = dataio::read_frame_csv(text);
    REQUIRE(back.size() == 2);
    CHECK(bits_equal(back[1], records[1]));
}

TEST_CASE("frame csv errors name line and column") {
    auto eng = rng::make_engine(99);
    const std::vector<FrameRecord> records{random_record(eng, 4), random_record(eng, 5)};
    const std::string good = dataio::write_frame_csv(records);

    auto expect_error = [](const std::string& text, std::size_t line, std::size_t column) {
        try {
            dataio::read_frame_csv(text);
            FAIL_CHECK("expected ParseError for " << text.substr(0, 60));
        } catch (const ParseError& e) {
            CHECK(e.line() == line);
            CHECK(e.column() == column);
            CHECK(std::string(e.what()).find("line") != std::string::npos);
        }
    };

    // Action flag out of domain: flags are columns 16..21, first record is line 2.
    expect_error(patch_cell(good, 2, 16, "2"), 2, 16);
    expect_error(patch_cell(good, 3, 21, "01"), 3, 21);
    expect_error(patch_cell(good, 2, 18, "true"), 2, 18);

    // Unparsable and non-finite numerics.
    expect_error(patch_cell(good, 2, 2, "abc"), 2, 2);
    expect_error(patch_cell(good, 2, 22, "1.5x"), 2, 22);
    expect_error(patch_cell(good, 3, 9, "inf"), 3, 9);
    expect_error(patch_cell(good, 2, 1, "-3"), 2, 1);
    expect_error(patch_cell(good, 2, 1, "1.0"), 2, 1);

    // Quaternion norm violations point at the first quaternion column.
    expect_error(patch_cell(good, 2, 5, "0.5"), 2, 5);
    expect_error(patch_cell(good, 3, 12, "1.1"), 3, 12);

    // Intrinsics domain violations point at the first intrinsics column.
    expect_error(patch_cell(good, 2, 23, "0"), 2, 23);
    expect_error(patch_cell(good, 2, 26, "0.0001"), 2, 23);  // far <= near

    // Structural failures.
    expect_error("", 1, 1);
    expect_error("frame_index,oops\n", 1, 2);
    const std::string ripped = good.substr(0, good.rfind(',')) + "\n";
    expect_error(ripped, 3, 1);  // final row lost its last field
    std::string short_row = good;
    short_row += "1,2,3\n";
    expect_error(short_row, 4, 1);
}

TEST_CASE("frame csv writer rejects invalid records") {
    auto eng = rng::make_engine(123);
    FrameRecord r = random_record(eng, 0);

    FrameRecord bad_quat = r;
    bad_quat.player_rotation.w *= 1.01;
    CHECK_THROWS_AS((void)dataio::write_frame_csv({bad_quat}), std::invalid_argument);

    FrameRecord bad_pos = r;
    bad_pos.camera_position.y = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS((void)dataio::write_frame_csv({bad_pos}), std::invalid_argument);

    FrameRecord bad_intr = r;
    bad_intr.intrinsics.far_plane = bad_intr.intrinsics.near_plane / 2;
    CHECK_THROWS_AS((void)dataio::write_frame_csv({bad_intr}), std::invalid_argument);
}

TEST_CASE("state json round-trips with canonical key order") {
    auto eng = rng::make_engine(5005);
    const AgentStateFile file = random_state(eng, 42);
    const std::string text = dataio::write_state_json(file);

    // Canonical order: each key appears after the previous one.
    const char* keys[] = {"\"counter\"",         "\"frame_index\"",     "\"player_position\"",
                          "\"player_rotation\"", "\"camera_position\"", "\"camera_rotation\"",
                          "\"nav\"",             "\"jump\"",            "\"attack\""};
    std::size_t prev = 0;
    for (const char* k : keys) {
        const std::size_t at = text.find(k);
        REQUIRE(at != std::string::npos);
        CHECK(at >= prev);
        prev = at;
    }

    const AgentStateFile back = dataio::read_state_json(text);
    CHECK(bits_equal(back, file));
    CHECK(dataio::write_state_json(back) == text);

    // 10^4 randomized round-trips.
    for (std::uint64_t i = 0; i < 10000; ++i) {
        const AgentStateFile f = random_state(eng, i);
        const AgentStateFile b = dataio::read_state_json(dataio::write_state_json(f));
        REQUIRE(bits_equal(b, f));
    }
}

TEST_CASE("state json detects stale and torn reads") {
    auto eng = rng::make_engine(31);
    const AgentStateFile file = random_state(eng, 5);
    const std::string text = dataio::write_state_json(file);

    // Regression against a later counter is stale.
    CHECK_THROWS_AS((void)dataio::read_state_json(text, 7), StaleReadError);
    try {
        (void)dataio::read_state_json(text, 7);
    } catch (const StaleReadError& e) {
        CHECK(std::string(e.what()).find("stale or torn read") != std::string::npos);
    }
    // Same counter = same write observed again; later counters fine.
    CHECK(dataio::read_state_json(text, 5).counter == 5);
    CHECK(dataio::read_state_json(text, 3).counter == 5);

    // A torn write (truncated JSON) is a parse error, not a silent accept.
    CHECK_THROWS_AS((void)dataio::read_state_json(text.substr(0, text.size() / 2)),
                    ParseError);
}

TEST_CASE("state json reader is strict about schema") {
    auto eng = rng::make_engine(32);
    const std::string text = dataio::write_state_json(random_state(eng, 1));

    // Unknown key.
    std::string extra = text;
    extra.insert(extra.size() - 1, ",\"extra\":1");
    CHECK_THROWS_AS((void)dataio::read_state_json(extra), ParseError);
    try {
        (void)dataio::read_state_json(extra);
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("extra") != std::string::npos);
    }

    // Missing key.
    const std::size_t nav = text.find("\"nav\"");
    std::string missing = text;
    missing.erase(nav, text.find("\"jump\"") - nav);
    CHECK_THROWS_AS((void)dataio::read_state_json(missing), ParseError);

    // Wrong type and domain violations.
    CHECK_THROWS_AS((void)dataio::read_state_json("[1,2,3]"), ParseError);
    std::string counter_str = text;
    counter_str.replace(counter_str.find("\"counter\":1"), 11, "\"counter\":\"x");
    CHECK_THROWS_AS((void)dataio::read_state_json(counter_str), ParseError);

    AgentStateFile denorm = random_state(eng, 2);
    std::string dtext = dataio::write_state_json(denorm);
    const std::size_t rot = dtext.find("\"player_rotation\":[");
    dtext.replace(rot, 19, "\"player_rotation\":[9");
    CHECK_THROWS_AS((void)dataio::read_state_json(dtext), ParseError);
}

TEST_CASE("state json writer rejects invalid states") {
    auto eng = rng::make_engine(33);
    AgentStateFile bad = random_state(eng, 0);
    bad.state.player_position.x = std::nan("");
    CHECK_THROWS_AS((void)dataio::write_state_json(bad), std::invalid_argument);

    AgentStateFile denorm = random_state(eng, 0);
    denorm.state.camera_pose.rotation.w += 0.01;
    CHECK_THROWS_AS((void)dataio::write_state_json(denorm), std::invalid_argument);
}

TEST_CASE("segment and clip manifests round-trip") {
    auto eng = rng::make_engine(606);
    std::size_t entries = 0;
    for (int trial = 0; trial < 400; ++trial) {
        ClipManifest m;
        m.clip_id = "clip-" + std::to_string(trial);
        m.source = static_cast<SourceKind>(rng::uniform_index(eng, 3));
        m.frame_count = rng::uniform_index(eng, 100000);
        m.csv_path = "frames/" + std::to_string(trial) + ".csv";
        m.state_path = trial % 3 ? "" : "state.json";
        m.caption_path = trial % 2 ? "captions/" + std::to_string(trial) + ".json" : "";
        m.checksum = rng::make_engine(trial)();
        const std::size_t n = rng::uniform_index(eng, 26);
        double t = rng::uniform_range(eng, 0.0, 10.0);
        for (std::size_t i = 0; i < n; ++i) {
            SegmentEntry s;
            s.file_id = "seg-" + std::to_string(i);
            s.start_s = t;
            s.duration_s = i + 1 == n ? rng::uniform_range(eng, 1.0, 60.0) : 60.0;
            s.frame_count = rng::uniform_index(eng, 4000);
            t += s.duration_s;
            m.segments.segments.push_back(std::move(s));
            ++entries;
        }

        const std::string text = dataio::write_clip_manifest(m);
        const ClipManifest back = dataio::read_clip_manifest(text);
        REQUIRE(back.clip_id == m.clip_id);
        REQUIRE(back.source == m.source);
        REQUIRE(back.frame_count == m.frame_count);
        REQUIRE(back.checksum == m.checksum);
        REQUIRE(back.segments.segments.size() == m.segments.segments.size());
        for (std::size_t i = 0; i < m.segments.segments.size(); ++i) {
            const auto& a = m.segments.segments[i];
            const auto& b = back.segments.segments[i];
            REQUIRE(b.file_id == a.file_id);
            REQUIRE(bits_equal(b.start_s, a.start_s));
            REQUIRE(bits_equal(b.duration_s, a.duration_s));
            REQUIRE(b.frame_count == a.frame_count);
        }
        CHECK(dataio::write_clip_manifest(back) == text);

        // The standalone segment manifest shares the entry format.
        const std::string seg_text = dataio::write_segment_manifest(m.segments);
        CHECK(dataio::read_segment_manifest(seg_text) == m.segments);
    }
    CHECK(entries > 4000);

    CHECK(dataio::source_from_string("aaa") == SourceKind::aaa);
    CHECK_THROWS_AS((void)dataio::source_from_string("indie"), ParseError);
    CHECK_THROWS_AS((void)dataio::read_clip_manifest("{\"clip_id\":\"x\"}"), ParseError);
    CHECK_THROWS_AS((void)dataio::read_segment_manifest("{\"segments\":{}}"), ParseError);
}

TEST_CASE("caption records and filter reports round-trip") {
    auto eng = rng::make_engine(717);
    for (int trial = 0; trial < 300; ++trial) {
        curation::CaptionRecord r;
        r.narrative = "narrative " + std::to_string(trial);
        r.static_scene = "a scene with \"quotes\" and, commas\nand newlines";
        double t = 0.0;
        const std::size_t n = rng::uniform_index(eng, 6);
        for (std::size_t i = 0; i < n; ++i) {
            curation::TemporalSegment seg;
            seg.start_s = t + rng::uniform_range(eng, 0.0, 2.0);
            seg.end_s = seg.start_s + rng::uniform_range(eng, 0.5, 5.0);
            seg.event = "event-" + std::to_string(i);
            seg.camera_motion = i % 2 ? "pan" : "static";
            t = seg.end_s;
            r.dense_temporal.push_back(std::move(seg));
        }
        r.quality.motion_smoothness = rng::uniform_range(eng, 0.0, 10.0);
        r.quality.background_dynamics = rng::uniform_range(eng, 0.0, 10.0);
        r.quality.scene_complexity = rng::uniform_range(eng, 0.0, 10.0);
        r.quality.physics_plausibility = rng::uniform_range(eng, 0.0, 10.0);
        r.quality.overall = rng::uniform_range(eng, 0.0, 10.0);

        const std::string text = dataio::write_caption_json(r);
        const auto back = dataio::read_caption_json(text);
        REQUIRE(back.narrative == r.narrative);
        REQUIRE(back.static_scene == r.static_scene);
        REQUIRE(back.dense_temporal.size() == r.dense_temporal.size());
        for (std::size_t i = 0; i < n; ++i) {
            REQUIRE(bits_equal(back.dense_temporal[i].start_s, r.dense_temporal[i].start_s));
            REQUIRE(bits_equal(back.dense_temporal[i].end_s, r.dense_temporal[i].end_s));
            REQUIRE(back.dense_temporal[i].event == r.dense_temporal[i].event);
        }
        REQUIRE(bits_equal(back.quality.overall, r.quality.overall));
        CHECK(dataio::write_caption_json(back) == text);

        curation::FilterReport rep;
        rep.keep = trial % 2 == 0;
        for (const char* name : {"reprojection", "displacement", "speed", "quality"}) {
            curation::CriterionResult c;
            c.name = name;
            c.evaluated = rng::uniform_index(eng, 4) != 0;
            c.pass = rng::uniform_index(eng, 2) == 1;
            c.measured = random_double(eng);
            if (c.evaluated && !c.pass) rep.reasons.push_back(name);
            if (!c.evaluated) rep.notes.push_back(std::string(name) + " skipped");
            rep.criteria.push_back(std::move(c));
        }
        const std::string rtext = dataio::write_filter_report_json(rep);
        const auto rback = dataio::read_filter_report_json(rtext);
        REQUIRE(rback.keep == rep.keep);
        REQUIRE(rback.criteria.size() == rep.criteria.size());
        for (std::size_t i = 0; i < rep.criteria.size(); ++i) {
            REQUIRE(rback.criteria[i].name == rep.criteria[i].name);
            REQUIRE(rback.criteria[i].evaluated == rep.criteria[i].evaluated);
            REQUIRE(rback.criteria[i].pass == rep.criteria[i].pass);
            REQUIRE(bits_equal(rback.criteria[i].measured, rep.criteria[i].measured));
        }
        REQUIRE(rback.reasons == rep.reasons);
        REQUIRE(rback.notes == rep.notes);
        CHECK(dataio::write_filter_report_json(rback) == rtext);
    }

    // Readers reject records that violate caption invariants.
    CHECK_THROWS_AS((void)dataio::read_caption_json("{"), ParseError);
    curation::CaptionRecord overlapping;
    overlapping.dense_temporal.push_back({0.0, 5.0, "a", "static"});
    overlapping.dense_temporal.push_back({4.0, 9.0, "b", "static"});
    CHECK_THROWS_AS((void)dataio::write_caption_json(overlapping), std::invalid_argument);
    std::string bad =
        "{\"narrative\":\"\",\"static_scene\":\"\",\"dense_temporal\":[],"
        "\"quality\":{\"motion_smoothness\":11,\"background_dynamics\":0,"
        "\"scene_complexity\":0,\"physics_plausibility\":0,\"overall\":0}}";
    CHECK_THROWS_AS((void)dataio::read_caption_json(bad), ParseError);
}

TEST_CASE("validate_manifest passes a consistent bundle") {
    TempDir dir("ok");
    auto eng = rng::make_engine(2024);
    std::vector<FrameRecord> records;
    for (std::uint64_t i = 0; i < 120; ++i) {
        FrameRecord r = random_record(eng, i);
        r.timestamp = 0.1 * static_cast<double>(i);
        records.push_back(std::move(r));
    }
    const std::string csv = dataio::write_frame_csv(records);
    dir.write("frames.csv", csv);
    dir.write("state.json", dataio::write_state_json(random_state(eng, 1)));

    ClipManifest m;
    m.clip_id = "bundle";
    m.source = SourceKind::unreal;
    m.frame_count = 120;
    m.csv_path = "frames.csv";
    m.state_path = "state.json";
    m.checksum = digest::fnv1a64(csv.data(), csv.size());
    m.segments.segments.push_back({"seg-0", 0.0, 6.0, 60});
    m.segments.segments.push_back({"seg-1", 6.05, 6.0, 60});  // within one frame (0.1 s)

    const auto report = dataio::validate_manifest(m, dir.path);
    REQUIRE(report.checks.size() == 4);
    for (const auto& c : report.checks) {
        INFO(c.name << ": " << c.detail);
        CHECK(c.pass);
    }
    CHECK(report.pass);
}

TEST_CASE("validate_manifest reports each failure kind") {
    TempDir dir("bad");
    auto eng = rng::make_engine(2025);
    std::vector<FrameRecord> records;
    for (std::uint64_t i = 0; i < 100; ++i) records.push_back(random_record(eng, i));
    const std::string csv = dataio::write_frame_csv(records);
    dir.write("frames.csv", csv);

    ClipManifest base;
    base.clip_id = "bundle";
    base.frame_count = 100;
    base.csv_path = "frames.csv";
    base.checksum = digest::fnv1a64(csv.data(), csv.size());

    auto check_named = [](const dataio::ManifestReport& rep, const std::string& name,
                          bool expect_pass) {
        for (const auto& c : rep.checks)
            if (c.name == name) {
                INFO(name << ": " << c.detail);
                CHECK(c.pass == expect_pass);
                return;
            }
        FAIL_CHECK("check not found: " << name);
    };

    SUBCASE("truncated csv trips frame_count only") {
        std::vector<FrameRecord> fewer(records.begin(), records.end() - 10);
        const std::string short_csv = dataio::write_frame_csv(fewer);
        dir.write("frames.csv", short_csv);
        ClipManifest m = base;
        m.checksum = digest::fnv1a64(short_csv.data(), short_csv.size());
        const auto rep = dataio::validate_manifest(m, dir.path);
        check_named(rep, "files", true);
        check_named(rep, "contiguity", true);
        check_named(rep, "frame_count", false);
        check_named(rep, "checksum", true);
        CHECK(!rep.pass);
        bool mentions = false;
        for (const auto& c : rep.checks)
            if (c.name == "frame_count" && c.detail.find("90") != std::string::npos &&
                c.detail.find("100") != std::string::npos)
                mentions = true;
        CHECK(mentions);
    }

    SUBCASE("checksum mismatch is reported") {
        ClipManifest m = base;
        m.checksum ^= 0xdeadbeef;
        const auto rep = dataio::validate_manifest(m, dir.path);
        check_named(rep, "checksum", false);
        check_named(rep, "frame_count", true);
        CHECK(!rep.pass);
    }

    SUBCASE("segment gap larger than one frame duration fails contiguity") {
        ClipManifest m = base;
        // 60 s / 600 frames = 0.1 s per frame; a 5 s gap is far outside it.
        m.segments.segments.push_back({"seg-0", 0.0, 60.0, 600});
        m.segments.segments.push_back({"seg-1", 65.0, 60.0, 600});
        m.frame_count = 1200;
        const auto rep = dataio::validate_manifest(m, dir.path);
        check_named(rep, "contiguity", false);
        CHECK(!rep.pass);
    }

    SUBCASE("boundary tolerance is exactly one frame duration") {
        ClipManifest m = base;
        m.segments.segments.push_back({"seg-0", 0.0, 60.0, 600});
        m.segments.segments.push_back({"seg-1", 60.1, 60.0, 600});
        m.frame_count = 100;  // csv matches; segment sum will disagree
        auto rep = dataio::validate_manifest(m, dir.path);
        check_named(rep, "contiguity", true);
        check_named(rep, "frame_count", false);  // 1200 != 100

        m.segments.segments[1].start_s = 60.151;
        rep = dataio::validate_manifest(m, dir.path);
        check_named(rep, "contiguity", false);
    }

    SUBCASE("missing files are listed by label") {
        ClipManifest m = base;
        m.caption_path = "captions.json";
        const auto rep = dataio::validate_manifest(m, dir.path);
        check_named(rep, "files", false);
        for (const auto& c : rep.checks)
            if (c.name == "files") CHECK(c.detail.find("caption") != std::string::npos);
        check_named(rep, "checksum", true);
    }

    SUBCASE("unreadable csv fails frame_count and checksum") {
        ClipManifest m = base;
        m.csv_path = "nope.csv";
        const auto rep = dataio::validate_manifest(m, dir.path);
        check_named(rep, "files", false);
        check_named(rep, "frame_count", false);
        check_named(rep, "checksum", false);
        CHECK(!rep.pass);
    }

    SUBCASE("malformed csv is a frame_count failure, not a throw") {
        dir.write("frames.csv", "not,a,frame,csv\n1,2,3,4\n");
        ClipManifest m = base;
        const auto rep = dataio::validate_manifest(m, dir.path);
        check_named(rep, "frame_count", false);
        CHECK(!rep.pass);
    }
}
