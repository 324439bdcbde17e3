// Copyright 2026 The wmkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "wmkit/actions.hpp"
#include "wmkit/geometry.hpp"

// Desk-scale simulator of a navmesh exploration agent: grid navmesh, A*
// planning, coverage/richness goal selection, cascaded fallbacks, triple
// stuck detection, camera randomization and character-assembly sampling.
// Episodes emit synthetic capture tuples that feed the actions and curation
// pipelines.
namespace wmkit::explorer {

struct Cell {
    std::size_t x = 0;
    std::size_t y = 0;
    bool operator==(const Cell&) const = default;
};

/// Row-major grid; cell (x, y) maps to ground coordinates
/// ((x + 0.5) * cell_size, (y + 0.5) * cell_size). Movement is 8-connected
/// with no corner cutting: a diagonal step requires both adjacent cardinal
/// cells to be walkable.
struct GridNavMesh {
    std::size_t width = 0;
    std::size_t height = 0;
    double cell_size = 1.0;
    std::vector<std::uint8_t> walkable;  // height x width
    std::vector<double> richness;        // >= 0 on walkable cells

    std::size_t index(const Cell& c) const { return c.y * width + c.x; }
    bool in_bounds(const Cell& c) const { return c.x < width && c.y < height; }
    bool is_walkable(const Cell& c) const { return in_bounds(c) && walkable[index(c)] != 0; }
    /// Throws std::invalid_argument on size mismatches, non-positive
    /// cell_size, no walkable cell, or negative richness on a walkable cell.
    void validate() const;
};

/// Fully walkable mesh with zero richness everywhere.
GridNavMesh make_open_mesh(std::size_t width, std::size_t height, double cell_size = 1.0);

struct AgentState {
    Cell cell;
    geom::Vec2 offset{0.5, 0.5};  // position within the cell, [0,1)^2
    double yaw = 0.0;             // current body heading, radians
    std::vector<std::uint32_t> visit_counts;  // height x width, ticks spent per cell
    std::uint64_t tick = 0;
};

/// Continuous position in cell units.
inline geom::Vec2 position_cells(const AgentState& s) {
    return {static_cast<double>(s.cell.x) + s.offset.x, static_cast<double>(s.cell.y) + s.offset.y};
}

/// Shortest 8-connected path (cardinal cost 1, diagonal sqrt 2, no corner
/// cutting) from start to goal, both inclusive; start == goal yields a
/// single-cell path; unreachable or unwalkable goal yields an empty path.
/// Throws std::invalid_argument when start is unwalkable or goal off-grid.
std::vector<Cell> plan_path(const GridNavMesh& mesh, const Cell& start, const Cell& goal);

/// Sum of step costs along a path (1 per cardinal, sqrt 2 per diagonal).
double path_cost(const std::vector<Cell>& path);

/// Raised when goal selection or a fallback stage has no cell to offer.
class NoReachableGoal : public std::runtime_error {
public:
    explicit NoReachableGoal(const std::string& what) : std::runtime_error(what) {}
};

struct GoalWeights {
    double alpha = 1.0;  // coverage bonus weight
    double beta = 0.5;   // richness weight
};

/// Reachable walkable cell (excluding the agent's own) maximizing
/// alpha / (1 + visits) + beta * richness, ties broken by greater octile
/// distance from the agent, then by lowest cell index. Reachability uses the
/// same adjacency as plan_path. Throws std::invalid_argument on negative or
/// all-zero weights; NoReachableGoal when no candidate exists.
Cell select_goal(const AgentState& state, const GridNavMesh& mesh, const GoalWeights& weights);

enum class FallbackStage { directional, shape, multi_radius };

struct FallbackConfig {
    double directional_range_cells = 8.0;
    std::vector<std::size_t> radii = {2, 4, 8, 16};
};

/// Boustrophedon route over all walkable cells: even rows left to right, odd
/// rows right to left.
std::vector<Cell> lawnmower_route(const GridNavMesh& mesh);

/// Cascade stages. directional: pick the least-visited of 8 compass sectors
/// (ties to the lowest sector index) and aim at fixed range along its
/// heading, clamped to the nearest walkable cell. shape: next waypoint after
/// the agent's cell on the lawnmower route (wrapping). multi_radius: nearest
/// walkable cell within the smallest successful radius of the expanding
/// search. All stages exclude the agent's own cell and throw NoReachableGoal
/// when they have nothing to offer.
Cell fallback_goal(const AgentState& state, const GridNavMesh& mesh, FallbackStage stage,
                   const FallbackConfig& config = {});

enum class StuckKind { position_delta, path_timeout, bounding_box };

const char* to_string(StuckKind kind);

/// Thresholds are in cell units. path_length and path_start_tick describe
/// the active path and are filled in per call by the episode loop.
struct StuckConfig {
    std::size_t window = 30;       // ticks inspected
    double eps_pos_cells = 0.5;    // total travel below this = frozen
    double eps_box_cells = 1.5;    // AABB max side below this = oscillating
    double budget_factor = 4.0;    // allowed ticks per path cell
    std::size_t path_length = 0;   // cells in the active path (0 = none)
    std::uint64_t path_start_tick = 0;
};

struct StuckSignal {
    StuckKind kind;
    double window_travel = 0.0;            // summed per-tick displacement, cells
    double box_side = 0.0;                 // max AABB side, cells
    std::uint64_t ticks_since_path_start = 0;
};

/// Evaluates the last config.window states; returns nothing when the window
/// is not yet full. Checks fire in priority order: position_delta (travel
/// < eps_pos), path_timeout (ticks since path start > budget_factor x
/// path_length), bounding_box (AABB max side < eps_box).
std::optional<StuckSignal> stuck_check(const std::vector<AgentState>& window,
                                       const StuckConfig& config);

enum class CameraMode { sweep360, discrete8 };

struct PitchRange {
    double lo = 0.0;
    double hi = 0.0;
};

struct CameraAngles {
    double yaw = 0.0;
    double pitch = 0.0;
};

/// sweep360 draws yaw uniformly on [0, 2pi); discrete8 uniformly over the 8
/// multiples of 45 degrees. Pitch is uniform on [lo, hi]. Yaw is drawn
/// before pitch; deterministic per seed. Throws std::invalid_argument on an
/// inverted or non-finite pitch range.
CameraAngles randomize_camera(CameraMode mode, const PitchRange& pitch_range,
                              std::uint64_t seed);

/// Swappable character components: (category name, option count).
struct CharacterAssembly {
    std::vector<std::pair<std::string, std::uint64_t>> categories;
};

/// Product of option counts. Throws std::invalid_argument on a zero option
/// count and std::overflow_error when the product exceeds 2^64 - 1.
std::uint64_t character_variants(const CharacterAssembly& assembly);

/// One uniformly drawn option index per category, deterministic per seed.
std::vector<std::uint64_t> sample_character(const CharacterAssembly& assembly,
                                            std::uint64_t seed);

struct EpisodeConfig {
    GoalWeights weights;
    StuckConfig stuck;
    FallbackConfig fallback;
    CameraMode camera_mode = CameraMode::sweep360;
    PitchRange pitch_range{-0.5, 0.2};
    double eye_height = 1.6;   // camera above the ground, m
    double jump_prob = 0.05;   // per-tick Bernoulli flags
    double attack_prob = 0.02;
    std::optional<Cell> start; // default: first walkable cell
    CharacterAssembly assembly;  // empty: no character sampling
};

struct StuckEvent {
    std::uint64_t tick = 0;
    StuckKind kind = StuckKind::position_delta;
};

struct CaptureRecord {
    actions::FrameState state;
    actions::ActionVector action;
};

struct Episode {
    std::vector<CaptureRecord> records;
    std::vector<StuckEvent> stuck_events;
    std::vector<std::uint64_t> character;      // option per category
    CameraAngles camera;
    std::vector<std::uint32_t> visit_counts;   // final per-cell tick counts
    bool ended_early = false;
    std::string end_reason;
};

/// Runs the goal-select / plan / follow loop with stuck handling and the
/// fallback cascade for up to `ticks` ticks. The record at tick t carries
/// the agent's pose before the move and the action commanding the step to
/// t + 1, classified in the episode camera's yaw frame; the final record
/// repeats the penultimate action. The camera is randomized once per
/// episode. A tick where every cascade stage fails ends the episode early
/// with a reason. Throws std::invalid_argument on ticks == 0 or an
/// unwalkable start. Fully deterministic per seed.
Episode run_episode(const GridNavMesh& mesh, const EpisodeConfig& config, std::uint64_t ticks,
                    std::uint64_t seed);

} // namespace wmkit::explorer
