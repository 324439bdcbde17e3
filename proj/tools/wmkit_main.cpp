// Copyright 2026 The wmkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line surface: one binary, nine subcommands, each delegating to one
// library module. Every command is deterministic under --seed; reports are
// CSV or line-delimited JSON; failures exit nonzero with one machine-readable
// error line on stderr.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wmkit/actions.hpp"
#include "wmkit/curation.hpp"
#include "wmkit/dataio.hpp"
#include "wmkit/explorer.hpp"
#include "wmkit/geometry.hpp"
#include "wmkit/retrieval.hpp"
#include "wmkit/rng.hpp"
#include "wmkit/run_config.hpp"
#include "wmkit/streaming.hpp"
#include "wmkit/trainkit.hpp"

using namespace wmkit;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTickSeconds = 0.05;  // episode capture rate, 20 Hz

geom::CameraIntrinsics default_intrinsics() {
    geom::CameraIntrinsics intr;
    intr.vertical_fov = 70.0 * kPi / 180.0;
    intr.aspect_ratio = 16.0 / 9.0;
    intr.near_plane = 0.1;
    intr.far_plane = 100.0;
    return intr;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

// Writes to the file when `path` is set, stdout otherwise.
void emit(const std::string& path, const std::string& text) {
    if (path.empty())
        std::cout << text;
    else
        write_file(path, text);
}

std::string csv_field(const std::string& value) {
    if (value.find_first_of(",\"\n") == std::string::npos) return value;
    std::string quoted = "\"";
    for (const char c : value) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    return quoted + "\"";
}

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

// ---------------------------------------------------------------------------
// Shared input plumbing.

std::vector<actions::FrameState> states_from_records(
    const std::vector<dataio::FrameRecord>& records) {
    std::vector<actions::FrameState> states;
    states.reserve(records.size());
    for (const auto& r : records) {
        actions::FrameState s;
        s.frame_index = r.frame_index;
        s.player_position = r.player_position;
        s.player_rotation = r.player_rotation;
        s.camera_pose = {r.camera_position, r.camera_rotation};
        s.jump_flag = r.action.jump;
        s.attack_flag = r.action.attack;
        states.push_back(s);
    }
    return states;
}

struct LoadedClip {
    dataio::ClipManifest manifest;
    curation::ClipTrajectory clip;
    std::optional<curation::CaptionRecord> caption;
};

LoadedClip load_clip(const fs::path& manifest_path, const fs::path& base_dir) {
    LoadedClip loaded;
    loaded.manifest = dataio::read_clip_manifest(read_file(manifest_path));
    const auto resolve = [&](const std::string& p) {
        const fs::path rel(p);
        return rel.is_absolute() ? rel : base_dir / rel;
    };
    const auto records = dataio::read_frame_csv(read_file(resolve(loaded.manifest.csv_path)));
    if (records.empty())
        throw std::invalid_argument("clip " + loaded.manifest.clip_id + ": empty frame csv");
    loaded.clip.intrinsics = records.front().intrinsics;
    for (const auto& r : records) {
        loaded.clip.poses.push_back({r.camera_position, r.camera_rotation});
        loaded.clip.timestamps.push_back(r.timestamp);
    }
    loaded.clip.validate();
    if (!loaded.manifest.caption_path.empty())
        loaded.caption =
            dataio::read_caption_json(read_file(resolve(loaded.manifest.caption_path)));
    return loaded;
}

retrieval::CameraView random_view(std::mt19937_64& eng) {
    retrieval::CameraView v;
    v.pose.position = {rng::uniform_range(eng, -10.0, 10.0),
                       rng::uniform_range(eng, -10.0, 10.0),
                       rng::uniform_range(eng, -10.0, 10.0)};
    v.pose.rotation = geom::camera_rotation(rng::uniform_range(eng, 0.0, 2.0 * kPi),
                                            rng::uniform_range(eng, -0.6, 0.6));
    v.intrinsics.vertical_fov = rng::uniform_range(eng, 40.0, 100.0) * kPi / 180.0;
    v.intrinsics.aspect_ratio = 16.0 / 9.0;
    v.intrinsics.near_plane = rng::uniform_range(eng, 0.2, 0.5);
    v.intrinsics.far_plane = rng::uniform_range(eng, 8.0, 20.0);
    return v;
}

// ---------------------------------------------------------------------------
// Commands. Each returns the process exit code.

struct InferActionsArgs {
    std::string input;
    std::string output;
    std::optional<double> deadzone;
};

int cmd_infer_actions(const InferActionsArgs& args) {
    const auto records = dataio::read_frame_csv(read_file(args.input));
    const auto inferred =
        actions::infer_trajectory_actions(states_from_records(records), args.deadzone);
    std::ostringstream out;
    out << "frame_index,forward,backward,left,right,jump,attack,agrees_input\n";
    for (std::size_t i = 0; i < inferred.size(); ++i) {
        const auto& a = inferred[i];
        out << records[i].frame_index << ',' << a.forward << ',' << a.backward << ','
            << a.left << ',' << a.right << ',' << a.jump << ',' << a.attack << ','
            << (a == records[i].action) << '\n';
    }
    emit(args.output, out.str());
    return 0;
}

struct CorpusArgs {
    std::vector<std::string> manifests;
    std::string base_dir = ".";
    std::string output;
};

double criterion_measure(const curation::FilterReport& report, const std::string& name,
                         bool& evaluated) {
    for (const auto& c : report.criteria) {
        if (c.name == name) {
            evaluated = c.evaluated;
            return c.measured;
        }
    }
    evaluated = false;
    return 0.0;
}

int cmd_filter(const CorpusArgs& args, const cli::RunConfig& cfg) {
    std::ostringstream out;
    out << "clip_id,keep,reprojection,displacement,speed,quality,reasons\n";
    for (const auto& path : args.manifests) {
        const auto loaded = load_clip(path, args.base_dir);
        const auto report =
            curation::apply_filters(loaded.clip, loaded.caption, cfg.filter);
        out << csv_field(loaded.manifest.clip_id) << ',' << report.keep;
        for (const char* name : {"reprojection", "displacement", "speed", "quality"}) {
            bool evaluated = false;
            const double measured = criterion_measure(report, name, evaluated);
            out << ',' << (evaluated ? format_double(measured) : std::string());
        }
        std::string reasons;
        for (const auto& r : report.reasons) {
            if (!reasons.empty()) reasons += ';';
            reasons += r;
        }
        out << ',' << csv_field(reasons) << '\n';
    }
    emit(args.output, out.str());
    return 0;
}

int cmd_calibrate(const CorpusArgs& args) {
    std::vector<curation::ClipTrajectory> clips;
    for (const auto& path : args.manifests) clips.push_back(load_clip(path, args.base_dir).clip);
    auto th = curation::calibrate_thresholds(clips);
    // A depth-free corpus calibrates reprojection to +inf (never gates);
    // JSON has no inf, so persist the largest finite double instead.
    if (!std::isfinite(th.max_reproj_err))
        th.max_reproj_err = std::numeric_limits<double>::max();
    nlohmann::ordered_json out = {{"max_reproj_err", th.max_reproj_err},
                                  {"max_disp_ratio", th.max_disp_ratio},
                                  {"speed_min", th.speed_band.v_lo},
                                  {"speed_max", th.speed_band.v_hi},
                                  {"min_quality_overall", th.min_quality.overall}};
    emit(args.output, out.dump(2) + "\n");
    return 0;
}

struct RetrieveArgs {
    std::string pool;
    std::uint64_t query_index = 0;
    std::string output;
};

int cmd_retrieve(const RetrieveArgs& args, const cli::RunConfig& cfg) {
    auto records = dataio::read_frame_csv(read_file(args.pool));
    if (records.empty()) throw std::invalid_argument("pool file has no frames");
    std::sort(records.begin(), records.end(),
              [](const auto& a, const auto& b) { return a.frame_index < b.frame_index; });

    retrieval::CameraView query;
    bool found = false;
    std::vector<retrieval::MemoryEntry> entries;
    for (const auto& r : records) {
        if (r.frame_index == args.query_index) {
            query = {{r.camera_position, r.camera_rotation}, r.intrinsics};
            found = true;
            continue;
        }
        retrieval::MemoryEntry e;
        e.frame_index = r.frame_index;
        e.pose = {r.camera_position, r.camera_rotation};
        e.intrinsics = r.intrinsics;
        e.payload_id = "frame-" + std::to_string(r.frame_index);
        e.is_sink = entries.empty() && r.frame_index < args.query_index;
        entries.push_back(std::move(e));
    }
    if (!found)
        throw std::invalid_argument("query frame " + std::to_string(args.query_index) +
                                    " not present in pool file");
    retrieval::MemoryPool pool;
    pool.update(entries);
    const auto result =
        retrieval::retrieve(query, args.query_index, pool, cfg.retrieval.k,
                            cfg.retrieval.scorer, cfg.retrieval.n_samples, cfg.seed);

    std::ostringstream out;
    out << "rank,frame_index,score,is_sink\n";
    for (std::size_t i = 0; i < result.selected.size(); ++i)
        out << i << ',' << result.selected[i].entry.frame_index << ','
            << format_double(result.selected[i].score) << ','
            << result.selected[i].entry.is_sink << '\n';
    emit(args.output, out.str());
    return 0;
}

struct BenchArgs {
    std::size_t pool = 256;
    unsigned reps = 3;
    std::string output;
};

int cmd_bench_overlap(const BenchArgs& args, const cli::RunConfig& cfg) {
    if (args.pool == 0) throw std::invalid_argument("pool must be >= 1");
    auto eng = rng::make_engine(cfg.seed);
    const auto query = random_view(eng);
    std::vector<retrieval::CameraView> cands;
    for (std::size_t i = 0; i < args.pool; ++i) cands.push_back(random_view(eng));

    std::ostringstream out;
    out << "scorer,pool,n_samples,jobs,rep,wall_us,per_candidate_us,argmax,argmax_score\n";
    for (unsigned rep = 0; rep < args.reps; ++rep) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto scores = retrieval::batch_overlap(query, cands, cfg.retrieval.scorer,
                                                     cfg.retrieval.n_samples,
                                                     rng::derive_seed(cfg.seed, rep), cfg.jobs);
        const auto wall =
            std::chrono::duration_cast<std::chrono::microseconds>(
                std::chrono::steady_clock::now() - t0)
                .count();
        const auto best = std::max_element(scores.begin(), scores.end()) - scores.begin();
        out << cli::to_string(cfg.retrieval.scorer) << ',' << args.pool << ','
            << cfg.retrieval.n_samples << ',' << cfg.jobs << ',' << rep << ',' << wall << ','
            << format_double(static_cast<double>(wall) / static_cast<double>(args.pool)) << ','
            << best << ',' << format_double(scores[static_cast<std::size_t>(best)]) << '\n';
    }
    emit(args.output, out.str());
    return 0;
}

struct ExploreArgs {
    std::string output_prefix;
};

int cmd_explore(const ExploreArgs& args, const cli::RunConfig& cfg) {
    explorer::GridNavMesh mesh =
        explorer::make_open_mesh(cfg.explorer.width, cfg.explorer.height);
    explorer::EpisodeConfig ep_cfg;
    ep_cfg.camera_mode = cfg.explorer.camera_mode;
    if (cfg.explorer.wall_fraction > 0.0) {
        auto eng = rng::make_engine(rng::derive_seed(cfg.seed, 1));
        for (auto& cell : mesh.walkable)
            cell = rng::uniform_double(eng) > cfg.explorer.wall_fraction ? 1 : 0;
        // Start in the largest 8-connected component so the episode has room.
        std::vector<char> seen(mesh.walkable.size(), 0);
        std::size_t best = 0, best_count = 0;
        for (std::size_t i = 0; i < mesh.walkable.size(); ++i) {
            if (!mesh.walkable[i] || seen[i]) continue;
            std::vector<std::size_t> stack{i};
            seen[i] = 1;
            std::size_t count = 0;
            while (!stack.empty()) {
                const std::size_t cur = stack.back();
                stack.pop_back();
                ++count;
                const auto cx = static_cast<long long>(cur % mesh.width);
                const auto cy = static_cast<long long>(cur / mesh.width);
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const long long nx = cx + dx, ny = cy + dy;
                        if (nx < 0 || ny < 0 || nx >= static_cast<long long>(mesh.width) ||
                            ny >= static_cast<long long>(mesh.height))
                            continue;
                        const auto ni = static_cast<std::size_t>(ny) * mesh.width +
                                        static_cast<std::size_t>(nx);
                        if (!seen[ni] && mesh.walkable[ni]) {
                            seen[ni] = 1;
                            stack.push_back(ni);
                        }
                    }
                }
            }
            if (count > best_count) {
                best_count = count;
                best = i;
            }
        }
        if (best_count == 0) throw std::invalid_argument("mesh has no walkable cells");
        ep_cfg.start = explorer::Cell{best % mesh.width, best / mesh.width};
    }

    const auto ep = explorer::run_episode(mesh, ep_cfg, cfg.explorer.ticks, cfg.seed);
    std::vector<dataio::FrameRecord> records;
    records.reserve(ep.records.size());
    for (const auto& rec : ep.records) {
        dataio::FrameRecord r;
        r.frame_index = rec.state.frame_index;
        r.player_position = rec.state.player_position;
        r.player_rotation = rec.state.player_rotation;
        r.camera_position = rec.state.camera_pose.position;
        r.camera_rotation = rec.state.camera_pose.rotation;
        r.action = rec.action;
        r.timestamp = static_cast<double>(rec.state.frame_index) * kTickSeconds;
        r.intrinsics = default_intrinsics();
        records.push_back(r);
    }
    const std::string csv = dataio::write_frame_csv(records);
    if (args.output_prefix.empty()) {
        std::cout << csv;
    } else {
        write_file(args.output_prefix + ".csv", csv);
        dataio::AgentStateFile state;
        state.counter = records.size();
        if (!ep.records.empty()) state.state = ep.records.back().state;
        write_file(args.output_prefix + ".state.json", dataio::write_state_json(state));
    }
    return 0;
}

struct StreamSimArgs {
    std::size_t segments = 3;
    std::string script;
    std::string output;
};

std::vector<actions::ActionVector> parse_script(const std::string& text, std::size_t needed) {
    std::vector<actions::ActionVector> script;
    if (text.empty()) {
        script.assign(needed,
                      actions::direction_to_action(actions::DirectionClass::N, false, false));
        return script;
    }
    std::istringstream in(text);
    std::string token;
    while (std::getline(in, token, ',')) {
        const auto colon = token.find(':');
        if (colon == std::string::npos)
            throw std::invalid_argument("script token '" + token + "' is not DIR:COUNT");
        const std::string name = token.substr(0, colon);
        std::optional<actions::DirectionClass> dir;
        for (int d = 0; d <= static_cast<int>(actions::DirectionClass::IDLE); ++d) {
            const auto candidate = static_cast<actions::DirectionClass>(d);
            if (name == actions::to_string(candidate)) dir = candidate;
        }
        if (!dir) throw std::invalid_argument("unknown direction '" + name + "'");
        const long count = std::stol(token.substr(colon + 1));
        if (count <= 0) throw std::invalid_argument("script count must be >= 1");
        for (long i = 0; i < count; ++i)
            script.push_back(actions::direction_to_action(*dir, false, false));
    }
    return script;
}

int cmd_stream_sim(const StreamSimArgs& args, const cli::RunConfig& cfg) {
    const auto plan = streaming::plan_rollout(args.segments, cfg.layout, cfg.seed);
    const auto needed = streaming::planned_frames(plan);
    const auto script = parse_script(args.script, needed);

    streaming::StreamConfig stream_cfg;
    streaming::GeneratedFrame reference;
    reference.latent.values.assign(stream_cfg.latent_dim, 0.5);
    reference.latent.role = trainkit::FrameRole::reference;
    reference.camera_pose.position = {0.0, 1.6, 0.0};
    reference.camera_pose.rotation = geom::camera_rotation(0.0, 0.0);

    const auto [frames, trace] =
        streaming::run_stream(plan, stream_cfg, reference, script,
                              streaming::make_stub_generator(stream_cfg));

    std::ostringstream out;
    for (std::size_t s = 0; s < trace.segments.size(); ++s) {
        const auto& tr = trace.segments[s];
        nlohmann::ordered_json row;
        row["segment"] = s;
        row["start_frame"] = plan.segments[s].start_frame;
        row["mode"] =
            plan.segments[s].mode == trainkit::ContextMode::i2v ? "i2v" : "standard";
        row["retrieved"] = tr.retrieved_indices;
        row["scores"] = tr.retrieved_scores;
        row["past"] = tr.past_indices;
        out << row.dump() << '\n';
    }
    nlohmann::ordered_json tail;
    tail["total_frames"] = frames.size();
    tail["planned_frames"] = needed;
    out << tail.dump() << '\n';
    emit(args.output, out.str());
    return 0;
}

struct RopeProbeArgs {
    std::uint64_t dt_min = 256;
    std::uint64_t dt_max = 4096;
    std::vector<double> tolerances = {0.1, 0.2, 0.5};
    std::string output;
};

int cmd_rope_probe(const RopeProbeArgs& args, const cli::RunConfig& cfg) {
    if (args.dt_min == 0 || args.dt_max < args.dt_min)
        throw std::invalid_argument("need 1 <= dt-min <= dt-max");
    std::vector<std::uint64_t> offsets;
    for (std::uint64_t dt = args.dt_min; dt <= args.dt_max; ++dt) offsets.push_back(dt);
    const auto perturbed = cfg.rope.build();
    auto flat_params = cfg.rope;
    flat_params.sigma_theta = 0.0;
    const auto flat = flat_params.build();

    std::ostringstream out;
    out << "tolerance,collision_rate,flat_collision_rate\n";
    for (const double tol : args.tolerances) {
        out << format_double(tol) << ','
            << format_double(trainkit::phase_collision_rate(offsets, perturbed, tol)) << ','
            << format_double(trainkit::phase_collision_rate(offsets, flat, tol)) << '\n';
    }
    emit(args.output, out.str());
    return 0;
}

struct ValidateArgs {
    std::string manifest;
    std::string base_dir;
    std::string output;
};

int cmd_validate(const ValidateArgs& args) {
    const fs::path manifest_path(args.manifest);
    const fs::path base = args.base_dir.empty()
                              ? (manifest_path.has_parent_path() ? manifest_path.parent_path()
                                                                 : fs::path("."))
                              : fs::path(args.base_dir);
    const auto manifest = dataio::read_clip_manifest(read_file(manifest_path));
    const auto report = dataio::validate_manifest(manifest, base.string());

    std::ostringstream out;
    out << "check,pass,detail\n";
    for (const auto& check : report.checks)
        out << csv_field(check.name) << ',' << check.pass << ',' << csv_field(check.detail)
            << '\n';
    emit(args.output, out.str());
    return report.pass ? 0 : 2;
}

void print_error(const char* kind, const std::string& detail) {
    nlohmann::ordered_json err;
    err["error"] = kind;
    err["detail"] = detail;
    std::cerr << err.dump() << '\n';
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"world-model data toolkit"};
    app.require_subcommand(0, 1);

    std::string config_path;
    if (const char* env = std::getenv("WMKIT_CONFIG")) config_path = env;
    app.add_option("--config", config_path,
                   "JSON run configuration (default: $WMKIT_CONFIG if set)");
    bool dump_config = false;
    app.add_flag("--dump-config", dump_config,
                 "print the effective configuration and exit");
    std::optional<std::uint64_t> seed_flag;
    app.add_option("--seed", seed_flag, "override the configured seed");
    std::optional<unsigned> jobs_flag;
    app.add_option("--jobs", jobs_flag, "override the configured worker count");

    InferActionsArgs infer_args;
    auto* infer = app.add_subcommand("infer-actions",
                                     "recover action flags from a frame CSV trajectory");
    infer->fallthrough();
    infer->add_option("--input", infer_args.input, "frame CSV path")->required();
    infer->add_option("--output", infer_args.output, "output CSV path (default stdout)");
    infer->add_option("--deadzone", infer_args.deadzone,
                      "idle threshold, metres (default 0.25 x median step)");

    CorpusArgs filter_args;
    auto* filter = app.add_subcommand("filter", "apply calibrated quality filters to clips");
    filter->fallthrough();
    filter->add_option("--manifest", filter_args.manifests, "clip manifest path(s)")
        ->required();
    filter->add_option("--base-dir", filter_args.base_dir,
                       "directory clip paths resolve against");
    filter->add_option("--output", filter_args.output, "output CSV path (default stdout)");
    std::optional<double> f_reproj, f_ratio, f_speed_min, f_speed_max, f_quality;
    filter->add_option("--max-reproj-err", f_reproj, "override filter.max_reproj_err");
    filter->add_option("--max-disp-ratio", f_ratio, "override filter.max_disp_ratio");
    filter->add_option("--speed-min", f_speed_min, "override filter.speed_min");
    filter->add_option("--speed-max", f_speed_max, "override filter.speed_max");
    filter->add_option("--min-quality", f_quality, "override filter.min_quality_overall");

    CorpusArgs calibrate_args;
    auto* calibrate =
        app.add_subcommand("calibrate", "derive filter thresholds from trusted clips");
    calibrate->fallthrough();
    calibrate->add_option("--manifest", calibrate_args.manifests, "clip manifest path(s)")
        ->required();
    calibrate->add_option("--base-dir", calibrate_args.base_dir,
                          "directory clip paths resolve against");
    calibrate->add_option("--output", calibrate_args.output,
                          "output JSON path (default stdout)");

    RetrieveArgs retrieve_args;
    auto* retrieve = app.add_subcommand(
        "retrieve", "rank pool frames by view overlap with a query frame");
    retrieve->fallthrough();
    retrieve->add_option("--pool", retrieve_args.pool, "frame CSV holding the pool")
        ->required();
    retrieve->add_option("--query-index", retrieve_args.query_index,
                         "frame_index of the query row")
        ->required();
    retrieve->add_option("--output", retrieve_args.output, "output CSV path (default stdout)");
    std::optional<std::size_t> r_k;
    std::optional<std::uint64_t> r_samples;
    std::optional<std::string> r_scorer;
    retrieve->add_option("--k", r_k, "override retrieval.k");
    retrieve->add_option("--n-samples", r_samples, "override retrieval.n_samples");
    retrieve->add_option("--scorer", r_scorer, "override retrieval.scorer (exact|sampled)");

    BenchArgs bench_args;
    auto* bench = app.add_subcommand("bench-overlap",
                                     "time overlap scoring on a synthetic candidate pool");
    bench->fallthrough();
    bench->add_option("--pool", bench_args.pool, "candidate count (default 256)");
    bench->add_option("--reps", bench_args.reps, "repetitions (default 3)");
    bench->add_option("--output", bench_args.output, "output CSV path (default stdout)");
    std::optional<std::uint64_t> b_samples;
    std::optional<std::string> b_scorer;
    bench->add_option("--n-samples", b_samples, "override retrieval.n_samples");
    bench->add_option("--scorer", b_scorer, "override retrieval.scorer (exact|sampled)");

    ExploreArgs explore_args;
    auto* explore =
        app.add_subcommand("explore", "run one exploration episode and write its capture");
    explore->fallthrough();
    explore->add_option("--output-prefix", explore_args.output_prefix,
                        "write PREFIX.csv and PREFIX.state.json (default: CSV to stdout)");
    std::optional<std::size_t> e_width, e_height;
    std::optional<double> e_walls;
    std::optional<std::uint64_t> e_ticks;
    std::optional<std::string> e_camera;
    explore->add_option("--width", e_width, "override explorer.width");
    explore->add_option("--height", e_height, "override explorer.height");
    explore->add_option("--wall-fraction", e_walls, "override explorer.wall_fraction");
    explore->add_option("--ticks", e_ticks, "override explorer.ticks");
    explore->add_option("--camera-mode", e_camera,
                        "override explorer.camera_mode (sweep360|discrete8)");

    StreamSimArgs stream_args;
    auto* stream = app.add_subcommand(
        "stream-sim", "plan and run a stub multi-segment rollout, print its trace");
    stream->fallthrough();
    stream->add_option("--segments", stream_args.segments, "segment count (default 3)");
    stream->add_option("--script", stream_args.script,
                       "action script, e.g. N:17,S:17,IDLE:10 (default: all N)");
    stream->add_option("--output", stream_args.output,
                       "output path for line-delimited JSON (default stdout)");

    RopeProbeArgs rope_args;
    auto* rope = app.add_subcommand("rope-probe",
                                    "measure positional-phase collision rates");
    rope->fallthrough();
    rope->add_option("--dt-min", rope_args.dt_min, "smallest frame offset (default 256)");
    rope->add_option("--dt-max", rope_args.dt_max, "largest frame offset (default 4096)");
    rope->add_option("--tolerances", rope_args.tolerances,
                     "phase tolerances in radians (default 0.1,0.2,0.5)")
        ->delimiter(',');
    rope->add_option("--output", rope_args.output, "output CSV path (default stdout)");

    ValidateArgs validate_args;
    auto* validate =
        app.add_subcommand("validate", "check a clip manifest against its files");
    validate->fallthrough();
    validate->add_option("--manifest", validate_args.manifest, "clip manifest path")
        ->required();
    validate->add_option("--base-dir", validate_args.base_dir,
                         "directory clip paths resolve against "
                         "(default: the manifest's directory)");
    validate->add_option("--output", validate_args.output, "output CSV path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error("cli", e.what());
        return 2;
    }

    try {
        cli::RunConfig cfg;
        if (!config_path.empty()) cfg = cli::parse_run_config(read_file(config_path));
        if (seed_flag) cfg.seed = *seed_flag;
        if (jobs_flag) {
            if (*jobs_flag == 0) throw std::invalid_argument("--jobs must be >= 1");
            cfg.jobs = *jobs_flag;
        }
        if (f_reproj) cfg.filter.max_reproj_err = *f_reproj;
        if (f_ratio) cfg.filter.max_disp_ratio = *f_ratio;
        if (f_speed_min) cfg.filter.speed_band.v_lo = *f_speed_min;
        if (f_speed_max) cfg.filter.speed_band.v_hi = *f_speed_max;
        if (f_quality) cfg.filter.min_quality.overall = *f_quality;
        if (r_k) cfg.retrieval.k = *r_k;
        if (r_samples || b_samples)
            cfg.retrieval.n_samples = r_samples ? *r_samples : *b_samples;
        if (r_scorer || b_scorer)
            cfg.retrieval.scorer =
                cli::scorer_from_string(r_scorer ? *r_scorer : *b_scorer);
        if (e_width) cfg.explorer.width = *e_width;
        if (e_height) cfg.explorer.height = *e_height;
        if (e_walls) cfg.explorer.wall_fraction = *e_walls;
        if (e_ticks) cfg.explorer.ticks = *e_ticks;
        if (e_camera) cfg.explorer.camera_mode = cli::camera_mode_from_string(*e_camera);
        cfg.filter.validate();

        if (dump_config) {
            std::cout << cli::write_run_config(cfg);
            return 0;
        }
        if (infer->parsed()) return cmd_infer_actions(infer_args);
        if (filter->parsed()) return cmd_filter(filter_args, cfg);
        if (calibrate->parsed()) return cmd_calibrate(calibrate_args);
        if (retrieve->parsed()) return cmd_retrieve(retrieve_args, cfg);
        if (bench->parsed()) return cmd_bench_overlap(bench_args, cfg);
        if (explore->parsed()) return cmd_explore(explore_args, cfg);
        if (stream->parsed()) return cmd_stream_sim(stream_args, cfg);
        if (rope->parsed()) return cmd_rope_probe(rope_args, cfg);
        if (validate->parsed()) return cmd_validate(validate_args);

        std::cerr << app.help();
        print_error("cli", "missing command");
        return 2;
    } catch (const dataio::StaleReadError& e) {
        print_error("stale-read", e.what());
        return 1;
    } catch (const dataio::ParseError& e) {
        print_error("parse", e.what());
        return 1;
    } catch (const std::invalid_argument& e) {
        print_error("invalid-argument", e.what());
        return 1;
    } catch (const std::exception& e) {
        print_error("runtime", e.what());
        return 1;
    }
}
