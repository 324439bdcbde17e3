// Copyright 2026 The wmkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "wmkit/run_config.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "wmkit/dataio.hpp"

namespace wmkit::cli {

using ordered_json = nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& msg) {
    throw dataio::ParseError("run config: " + msg);
}

// Rejects keys outside `allowed`; all listed keys stay optional.
void check_allowed(const ordered_json& obj, const char* section,
                   std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) fail(std::string(section) + " must be an object");
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* key : allowed) {
            if (item.key() == key) {
                known = true;
                break;
            }
        }
        if (!known) fail(std::string("unknown key '") + item.key() + "' in " + section);
    }
}

void read_number(const ordered_json& obj, const char* section, const char* key, double& out) {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    if (!v.is_number()) fail(std::string(section) + "." + key + " must be a number");
    out = v.get<double>();
    if (!std::isfinite(out)) fail(std::string(section) + "." + key + " must be finite");
}

template <typename UInt>
void read_uint(const ordered_json& obj, const char* section, const char* key, UInt& out) {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    if (!v.is_number_unsigned())
        fail(std::string(section) + "." + key + " must be a non-negative integer");
    out = static_cast<UInt>(v.get<std::uint64_t>());
}

std::string read_string(const ordered_json& obj, const char* section, const char* key,
                        const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_string()) fail(std::string(section) + "." + key + " must be a string");
    return v.get<std::string>();
}

} // namespace

trainkit::RopeConfig RopeParams::build() const {
    return trainkit::make_rope_config(theta_base, sigma_theta, head_count, rotary_dim);
}

const char* to_string(explorer::CameraMode mode) {
    return mode == explorer::CameraMode::sweep360 ? "sweep360" : "discrete8";
}

const char* to_string(retrieval::Scorer scorer) {
    return scorer == retrieval::Scorer::exact ? "exact" : "sampled";
}

explorer::CameraMode camera_mode_from_string(const std::string& text) {
    if (text == "sweep360") return explorer::CameraMode::sweep360;
    if (text == "discrete8") return explorer::CameraMode::discrete8;
    fail("unknown camera_mode '" + text + "' (expected sweep360 or discrete8)");
}

retrieval::Scorer scorer_from_string(const std::string& text) {
    if (text == "exact") return retrieval::Scorer::exact;
    if (text == "sampled") return retrieval::Scorer::sampled;
    fail("unknown scorer '" + text + "' (expected exact or sampled)");
}

RunConfig parse_run_config(const std::string& json_text) {
    ordered_json root;
    try {
        root = ordered_json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        fail(e.what());
    }
    check_allowed(root, "root",
                  {"config_version", "seed", "jobs", "filter", "layout", "rope", "explorer",
                   "retrieval"});
    if (!root.contains("config_version")) fail("missing key config_version");
    if (!root.at("config_version").is_number_integer() ||
        root.at("config_version").get<std::int64_t>() != kConfigVersion)
        fail("unsupported config_version (expected " + std::to_string(kConfigVersion) + ")");

    RunConfig cfg;
    read_uint(root, "root", "seed", cfg.seed);
    read_uint(root, "root", "jobs", cfg.jobs);
    if (cfg.jobs == 0) fail("jobs must be >= 1");

    if (root.contains("filter")) {
        const auto& f = root.at("filter");
        check_allowed(f, "filter",
                      {"max_reproj_err", "max_disp_ratio", "speed_min", "speed_max",
                       "min_quality_overall"});
        read_number(f, "filter", "max_reproj_err", cfg.filter.max_reproj_err);
        read_number(f, "filter", "max_disp_ratio", cfg.filter.max_disp_ratio);
        read_number(f, "filter", "speed_min", cfg.filter.speed_band.v_lo);
        read_number(f, "filter", "speed_max", cfg.filter.speed_band.v_hi);
        read_number(f, "filter", "min_quality_overall", cfg.filter.min_quality.overall);
        try {
            cfg.filter.validate();
        } catch (const std::invalid_argument& e) {
            fail(std::string("filter: ") + e.what());
        }
    }

    if (root.contains("layout")) {
        const auto& l = root.at("layout");
        check_allowed(l, "layout",
                      {"memory_len", "past_len", "current_len", "i2v_current_len",
                       "past_mode_prob", "mask_prob"});
        read_uint(l, "layout", "memory_len", cfg.layout.memory_len);
        read_uint(l, "layout", "past_len", cfg.layout.past_len);
        read_uint(l, "layout", "current_len", cfg.layout.current_len);
        read_uint(l, "layout", "i2v_current_len", cfg.layout.i2v_current_len);
        read_number(l, "layout", "past_mode_prob", cfg.layout.past_mode_prob);
        read_number(l, "layout", "mask_prob", cfg.layout.mask_prob);
        try {
            cfg.layout.validate();
        } catch (const std::invalid_argument& e) {
            fail(std::string("layout: ") + e.what());
        }
    }

    if (root.contains("rope")) {
        const auto& r = root.at("rope");
        check_allowed(r, "rope", {"theta_base", "sigma_theta", "head_count", "rotary_dim"});
        read_number(r, "rope", "theta_base", cfg.rope.theta_base);
        read_number(r, "rope", "sigma_theta", cfg.rope.sigma_theta);
        read_uint(r, "rope", "head_count", cfg.rope.head_count);
        read_uint(r, "rope", "rotary_dim", cfg.rope.rotary_dim);
        try {
            (void)cfg.rope.build();
        } catch (const std::invalid_argument& e) {
            fail(std::string("rope: ") + e.what());
        }
    }

    if (root.contains("explorer")) {
        const auto& x = root.at("explorer");
        check_allowed(x, "explorer",
                      {"width", "height", "wall_fraction", "ticks", "camera_mode"});
        read_uint(x, "explorer", "width", cfg.explorer.width);
        read_uint(x, "explorer", "height", cfg.explorer.height);
        read_number(x, "explorer", "wall_fraction", cfg.explorer.wall_fraction);
        read_uint(x, "explorer", "ticks", cfg.explorer.ticks);
        cfg.explorer.camera_mode = camera_mode_from_string(
            read_string(x, "explorer", "camera_mode", to_string(cfg.explorer.camera_mode)));
        if (cfg.explorer.width == 0 || cfg.explorer.height == 0)
            fail("explorer: width and height must be >= 1");
        if (cfg.explorer.wall_fraction < 0.0 || cfg.explorer.wall_fraction >= 1.0)
            fail("explorer: wall_fraction must be in [0, 1)");
        if (cfg.explorer.ticks == 0) fail("explorer: ticks must be >= 1");
    }

    if (root.contains("retrieval")) {
        const auto& r = root.at("retrieval");
        check_allowed(r, "retrieval", {"k", "n_samples", "scorer"});
        read_uint(r, "retrieval", "k", cfg.retrieval.k);
        read_uint(r, "retrieval", "n_samples", cfg.retrieval.n_samples);
        cfg.retrieval.scorer = scorer_from_string(
            read_string(r, "retrieval", "scorer", to_string(cfg.retrieval.scorer)));
        if (cfg.retrieval.k == 0) fail("retrieval: k must be >= 1");
        if (cfg.retrieval.n_samples == 0) fail("retrieval: n_samples must be >= 1");
    }

    return cfg;
}

std::string write_run_config(const RunConfig& config) {
    ordered_json root;
    root["config_version"] = kConfigVersion;
    root["seed"] = config.seed;
    root["jobs"] = config.jobs;
    root["filter"] = {{"max_reproj_err", config.filter.max_reproj_err},
                      {"max_disp_ratio", config.filter.max_disp_ratio},
                      {"speed_min", config.filter.speed_band.v_lo},
                      {"speed_max", config.filter.speed_band.v_hi},
                      {"min_quality_overall", config.filter.min_quality.overall}};
    root["layout"] = {{"memory_len", config.layout.memory_len},
                      {"past_len", config.layout.past_len},
                      {"current_len", config.layout.current_len},
                      {"i2v_current_len", config.layout.i2v_current_len},
                      {"past_mode_prob", config.layout.past_mode_prob},
                      {"mask_prob", config.layout.mask_prob}};
    root["rope"] = {{"theta_base", config.rope.theta_base},
                    {"sigma_theta", config.rope.sigma_theta},
                    {"head_count", config.rope.head_count},
                    {"rotary_dim", config.rope.rotary_dim}};
    root["explorer"] = {{"width", config.explorer.width},
                        {"height", config.explorer.height},
                        {"wall_fraction", config.explorer.wall_fraction},
                        {"ticks", config.explorer.ticks},
                        {"camera_mode", to_string(config.explorer.camera_mode)}};
    root["retrieval"] = {{"k", config.retrieval.k},
                         {"n_samples", config.retrieval.n_samples},
                         {"scorer", to_string(config.retrieval.scorer)}};
    return root.dump(2) + "\n";
}

} // namespace wmkit::cli
