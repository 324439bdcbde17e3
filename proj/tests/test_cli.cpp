// Copyright 2026 The wmkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include "wmkit/dataio.hpp"
#include "wmkit/digest.hpp"
#include "wmkit/run_config.hpp"

using namespace wmkit;

namespace {

struct CmdResult {
    int status = -1;
    std::string output;
};

// Runs the CLI binary with stderr merged into the captured output.
CmdResult run_cmd(const std::string& args, bool merge_stderr = true) {
    const std::string cmd =
        std::string(WMKIT_BIN) + " " + args + (merge_stderr ? " 2>&1" : " 2>/dev/null");
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    CmdResult result;
    std::array<char, 4096> buf;
    std::size_t n = 0;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0)
        result.output.append(buf.data(), n);
    const int rc = pclose(pipe);
    result.status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    return result;
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               ("wmkit_cli_" + tag + "_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }

    std::string write(const std::string& name, const std::string& bytes) const {
        const auto p = path / name;
        std::ofstream out(p, std::ios::binary);
        out << bytes;
        return p.string();
    }
};

// Straight-line clip at constant camera speed; one frame per 0.05 s.
std::vector<dataio::FrameRecord> line_clip(double speed, std::size_t frames,
                                           double teleport_at = -1.0) {
    std::vector<dataio::FrameRecord> records;
    double x = 0.0;
    for (std::size_t i = 0; i < frames; ++i) {
        dataio::FrameRecord r;
        r.frame_index = i;
        r.timestamp = 0.05 * static_cast<double>(i);
        if (i > 0) x += speed * 0.05;
        if (teleport_at >= 0.0 && i == frames / 2) x += teleport_at;
        r.player_position = {x, 0.0, 0.0};
        r.camera_position = {x, 1.6, 0.0};
        r.action.forward = true;
        r.intrinsics.vertical_fov = 1.2;
        r.intrinsics.aspect_ratio = 16.0 / 9.0;
        r.intrinsics.near_plane = 0.1;
        r.intrinsics.far_plane = 100.0;
        records.push_back(r);
    }
    return records;
}

// Writes CSV + manifest (correct checksum) and returns the manifest path.
std::string write_clip_bundle(const TempDir& dir, const std::string& name,
                              const std::vector<dataio::FrameRecord>& records) {
    const std::string csv = dataio::write_frame_csv(records);
    dir.write(name + ".csv", csv);
    dataio::ClipManifest m;
    m.clip_id = name;
    m.source = dataio::SourceKind::unreal;
    m.frame_count = records.size();
    m.csv_path = name + ".csv";
    m.checksum = digest::fnv1a64(csv);
    return dir.write(name + ".manifest.json", dataio::write_clip_manifest(m));
}

bool config_equal(const cli::RunConfig& a, const cli::RunConfig& b) {
    return a.seed == b.seed && a.jobs == b.jobs &&
           a.filter.max_reproj_err == b.filter.max_reproj_err &&
           a.filter.max_disp_ratio == b.filter.max_disp_ratio &&
           a.filter.speed_band.v_lo == b.filter.speed_band.v_lo &&
           a.filter.speed_band.v_hi == b.filter.speed_band.v_hi &&
           a.filter.min_quality.overall == b.filter.min_quality.overall &&
           a.layout.memory_len == b.layout.memory_len &&
           a.layout.past_len == b.layout.past_len &&
           a.layout.current_len == b.layout.current_len &&
           a.layout.i2v_current_len == b.layout.i2v_current_len &&
           a.layout.past_mode_prob == b.layout.past_mode_prob &&
           a.layout.mask_prob == b.layout.mask_prob && a.rope == b.rope &&
           a.explorer == b.explorer && a.retrieval == b.retrieval;
}

} // namespace

TEST_CASE("run config round-trips and minimal file yields defaults") {
    const cli::RunConfig defaults;
    CHECK(config_equal(cli::parse_run_config(cli::write_run_config(defaults)), defaults));
    CHECK(config_equal(cli::parse_run_config("{\"config_version\":1}"), defaults));

    cli::RunConfig custom;
    custom.seed = 99;
    custom.jobs = 4;
    custom.filter.speed_band = {0.5, 2.5};
    custom.layout.mask_prob = 0.0;
    custom.rope.sigma_theta = 0.3;
    custom.explorer.camera_mode = explorer::CameraMode::discrete8;
    custom.explorer.wall_fraction = 0.25;
    custom.retrieval.scorer = retrieval::Scorer::sampled;
    custom.retrieval.n_samples = 1024;
    CHECK(config_equal(cli::parse_run_config(cli::write_run_config(custom)), custom));

    const auto partial = cli::parse_run_config(
        "{\"config_version\":1,\"seed\":7,\"retrieval\":{\"k\":3}}");
    CHECK(partial.seed == 7);
    CHECK(partial.retrieval.k == 3);
    CHECK(partial.retrieval.n_samples == defaults.retrieval.n_samples);
    CHECK(partial.layout.memory_len == defaults.layout.memory_len);
}

TEST_CASE("run config rejects malformed input by name") {
    using dataio::ParseError;
    CHECK_THROWS_AS((void)cli::parse_run_config("not json"), ParseError);
    CHECK_THROWS_AS((void)cli::parse_run_config("[1,2]"), ParseError);
    CHECK_THROWS_AS((void)cli::parse_run_config("{}"), ParseError);  // no version
    CHECK_THROWS_AS((void)cli::parse_run_config("{\"config_version\":2}"), ParseError);
    CHECK_THROWS_AS((void)cli::parse_run_config("{\"config_version\":1,\"bogus\":0}"),
                    ParseError);
    CHECK_THROWS_AS(
        (void)cli::parse_run_config("{\"config_version\":1,\"filter\":{\"bogus\":0}}"),
        ParseError);
    CHECK_THROWS_AS((void)cli::parse_run_config("{\"config_version\":1,\"jobs\":0}"),
                    ParseError);
    CHECK_THROWS_AS(
        (void)cli::parse_run_config(
            "{\"config_version\":1,\"explorer\":{\"camera_mode\":\"orbit\"}}"),
        ParseError);
    CHECK_THROWS_AS(
        (void)cli::parse_run_config(
            "{\"config_version\":1,\"retrieval\":{\"scorer\":\"montecarlo\"}}"),
        ParseError);
    CHECK_THROWS_AS(
        (void)cli::parse_run_config("{\"config_version\":1,\"layout\":{\"mask_prob\":1.5}}"),
        ParseError);
    CHECK_THROWS_AS(
        (void)cli::parse_run_config(
            "{\"config_version\":1,\"filter\":{\"speed_min\":3,\"speed_max\":1}}"),
        ParseError);
    CHECK_THROWS_AS(
        (void)cli::parse_run_config("{\"config_version\":1,\"rope\":{\"theta_base\":0.5}}"),
        ParseError);
    CHECK_THROWS_AS(
        (void)cli::parse_run_config("{\"config_version\":1,\"seed\":-4}"), ParseError);

    try {
        (void)cli::parse_run_config("{\"config_version\":1,\"rope\":{\"sigma\":0.8}}");
        FAIL("expected ParseError");
    } catch (const dataio::ParseError& e) {
        CHECK(std::string(e.what()).find("sigma") != std::string::npos);
        CHECK(std::string(e.what()).find("rope") != std::string::npos);
    }
}

TEST_CASE("binary: explore is deterministic and its actions round-trip") {
    TempDir dir("explore");
    const std::string csv_path = (dir.path / "ep.csv").string();
    const auto a = run_cmd("explore --ticks 40 --seed 7", false);
    const auto b = run_cmd("explore --ticks 40 --seed 7", false);
    REQUIRE(a.status == 0);
    CHECK(a.output == b.output);
    CHECK(a.output.substr(0, 11) == "frame_index");
    CHECK(split_lines(a.output).size() == 41);  // header + 40 records

    const auto c = run_cmd("explore --ticks 40 --seed 8", false);
    CHECK(c.output != a.output);

    dir.write("ep.csv", a.output);
    const auto inferred = run_cmd("infer-actions --input " + csv_path, false);
    REQUIRE(inferred.status == 0);
    const auto lines = split_lines(inferred.output);
    REQUIRE(lines.size() == 41);
    CHECK(lines[0] == "frame_index,forward,backward,left,right,jump,attack,agrees_input");
    for (std::size_t i = 1; i < lines.size(); ++i)
        CHECK(lines[i].substr(lines[i].size() - 1) == "1");

    // File-writing mode emits the capture plus a final state snapshot.
    const std::string prefix = (dir.path / "run").string();
    const auto d = run_cmd("explore --ticks 40 --seed 7 --output-prefix " + prefix, false);
    REQUIRE(d.status == 0);
    std::ifstream csv_in(prefix + ".csv", std::ios::binary);
    std::stringstream csv_bytes;
    csv_bytes << csv_in.rdbuf();
    CHECK(csv_bytes.str() == a.output);
    std::ifstream state_in(prefix + ".state.json", std::ios::binary);
    std::stringstream state_bytes;
    state_bytes << state_in.rdbuf();
    const auto state = dataio::read_state_json(state_bytes.str());
    CHECK(state.counter == 40);
    CHECK(state.state.frame_index == 39);
}

TEST_CASE("binary: retrieve, rope-probe, and stream-sim report shapes") {
    TempDir dir("reports");
    const auto ep = run_cmd("explore --ticks 30 --seed 3", false);
    REQUIRE(ep.status == 0);
    const std::string pool = dir.write("pool.csv", ep.output);

    const auto ret =
        run_cmd("retrieve --pool " + pool + " --query-index 29 --k 3 --scorer exact", false);
    REQUIRE(ret.status == 0);
    const auto ret_lines = split_lines(ret.output);
    CHECK(ret_lines[0] == "rank,frame_index,score,is_sink");
    CHECK(ret_lines.size() >= 4);  // header + top-3, sink possibly appended
    CHECK(ret_lines[1].substr(0, 2) == "0,");

    const auto rope = run_cmd("rope-probe --dt-min 256 --dt-max 300", false);
    REQUIRE(rope.status == 0);
    const auto rope_lines = split_lines(rope.output);
    CHECK(rope_lines[0] == "tolerance,collision_rate,flat_collision_rate");
    CHECK(rope_lines.size() == 4);  // default tolerances 0.1, 0.2, 0.5

    const auto sim = run_cmd("stream-sim --segments 2 --seed 5", false);
    REQUIRE(sim.status == 0);
    const auto sim_lines = split_lines(sim.output);
    REQUIRE(sim_lines.size() == 3);  // 2 segments + totals
    CHECK(sim_lines[0].find("\"mode\":\"i2v\"") != std::string::npos);
    CHECK(sim_lines[1].find("\"mode\":\"standard\"") != std::string::npos);
    CHECK(sim_lines[2] == "{\"total_frames\":24,\"planned_frames\":24}");
    CHECK(run_cmd("stream-sim --segments 2 --seed 5", false).output == sim.output);
}

TEST_CASE("binary: validate, calibrate, filter pipeline on a real bundle") {
    TempDir dir("pipeline");
    std::vector<std::string> manifests;
    for (int i = 0; i < 20; ++i)
        manifests.push_back(
            write_clip_bundle(dir, "clip" + std::to_string(i),
                              line_clip(1.0 + 0.1 * static_cast<double>(i), 40)));

    const auto ok = run_cmd("validate --manifest " + manifests[0], false);
    CHECK(ok.status == 0);
    CHECK(split_lines(ok.output).size() == 5);  // header + 4 checks

    // Checksum mismatch surfaces as a failed check and exit code 2.
    const auto broken_manifest =
        write_clip_bundle(dir, "broken", line_clip(1.5, 40));
    dir.write("broken.csv", dataio::write_frame_csv(line_clip(1.6, 40)));
    const auto bad = run_cmd("validate --manifest " + broken_manifest, false);
    CHECK(bad.status == 2);
    CHECK(bad.output.find("checksum,0") != std::string::npos);

    std::string manifest_flags;
    for (const auto& m : manifests) manifest_flags += " --manifest " + m;
    const auto cal = run_cmd("calibrate --base-dir " + dir.path.string() + manifest_flags, false);
    REQUIRE(cal.status == 0);
    const std::string config_path =
        dir.write("run.json", "{\"config_version\":1,\"filter\":" + cal.output + "}");

    const auto keep = run_cmd("filter --base-dir " + dir.path.string() + " --config " + config_path + " --manifest " +
                                  manifests[5] + " --manifest " + manifests[12],
                              false);
    REQUIRE(keep.status == 0);
    const auto keep_lines = split_lines(keep.output);
    CHECK(keep_lines[0] == "clip_id,keep,reprojection,displacement,speed,quality,reasons");
    REQUIRE(keep_lines.size() == 3);
    CHECK(keep_lines[1].substr(0, 7) == "clip5,1");
    CHECK(keep_lines[2].substr(0, 8) == "clip12,1");

    const auto teleport_manifest =
        write_clip_bundle(dir, "teleport", line_clip(1.5, 40, 25.0));
    const auto drop =
        run_cmd("filter --base-dir " + dir.path.string() + " --config " + config_path + " --manifest " + teleport_manifest, false);
    REQUIRE(drop.status == 0);
    const auto drop_lines = split_lines(drop.output);
    REQUIRE(drop_lines.size() == 2);
    CHECK(drop_lines[1].substr(0, 10) == "teleport,0");
    CHECK(drop_lines[1].find("displacement") != std::string::npos);
}

TEST_CASE("binary: failures exit nonzero with one machine-readable error line") {
    const auto bad_flag = run_cmd("explore --no-such-flag");
    CHECK(bad_flag.status == 2);
    CHECK(bad_flag.output.find("{\"error\":\"cli\"") != std::string::npos);

    const auto no_cmd = run_cmd("--seed 3");
    CHECK(no_cmd.status == 2);
    CHECK(no_cmd.output.find("\"missing command\"") != std::string::npos);

    const auto missing = run_cmd("infer-actions --input /nonexistent/frames.csv");
    CHECK(missing.status == 1);
    CHECK(missing.output.find("{\"error\":\"runtime\"") != std::string::npos);

    TempDir dir("errors");
    const std::string bad_config =
        dir.write("bad.json", "{\"config_version\":1,\"bogus\":0}");
    const auto parse = run_cmd("--config " + bad_config + " explore --ticks 5");
    CHECK(parse.status == 1);
    CHECK(parse.output.find("{\"error\":\"parse\"") != std::string::npos);
    CHECK(parse.output.find("bogus") != std::string::npos);

    const auto script = run_cmd("stream-sim --script Q:5");
    CHECK(script.status == 1);
    CHECK(script.output.find("{\"error\":\"invalid-argument\"") != std::string::npos);

    // Flag overrides land in the effective config.
    const auto dumped = run_cmd("--seed 42 --dump-config", false);
    CHECK(dumped.status == 0);
    CHECK(dumped.output.find("\"seed\": 42") != std::string::npos);
    const auto cfg = cli::parse_run_config(dumped.output);
    CHECK(cfg.seed == 42);
}
