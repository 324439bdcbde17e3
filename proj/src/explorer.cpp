// Copyright 2026 The wmkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "wmkit/explorer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <queue>

#include "wmkit/rng.hpp"

namespace wmkit::explorer {
namespace {

constexpr double kDiag = 1.4142135623730951;

// Fixed neighbor order keeps the planner deterministic.
constexpr int kDx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
constexpr int kDy[8] = {0, 0, 1, -1, 1, -1, 1, -1};

bool step_allowed(const GridNavMesh& mesh, const Cell& from, int dx, int dy, Cell& out) {
    const long long nx = static_cast<long long>(from.x) + dx;
    const long long ny = static_cast<long long>(from.y) + dy;
    if (nx < 0 || ny < 0) return false;
    out = {static_cast<std::size_t>(nx), static_cast<std::size_t>(ny)};
    if (!mesh.is_walkable(out)) return false;
    if (dx != 0 && dy != 0) {
        // No corner cutting: both flanking cardinal cells must be walkable.
        if (!mesh.is_walkable({out.x, from.y})) return false;
        if (!mesh.is_walkable({from.x, out.y})) return false;
    }
    return true;
}

double octile(const Cell& a, const Cell& b) {
    const double dx = std::abs(static_cast<double>(a.x) - static_cast<double>(b.x));
    const double dy = std::abs(static_cast<double>(a.y) - static_cast<double>(b.y));
    return std::max(dx, dy) + (kDiag - 1.0) * std::min(dx, dy);
}

// Flood fill with plan_path adjacency so selected goals stay plannable.
std::vector<std::uint8_t> reachable_from(const GridNavMesh& mesh, const Cell& origin) {
    std::vector<std::uint8_t> seen(mesh.width * mesh.height, 0);
    std::deque<Cell> frontier;
    seen[mesh.index(origin)] = 1;
    frontier.push_back(origin);
    while (!frontier.empty()) {
        const Cell cur = frontier.front();
        frontier.pop_front();
        for (int n = 0; n < 8; ++n) {
            Cell next;
            if (!step_allowed(mesh, cur, kDx[n], kDy[n], next)) continue;
            if (seen[mesh.index(next)]) continue;
            seen[mesh.index(next)] = 1;
            frontier.push_back(next);
        }
    }
    return seen;
}

geom::Vec2 cell_center(const Cell& c) {
    return {static_cast<double>(c.x) + 0.5, static_cast<double>(c.y) + 0.5};
}

} // namespace

void GridNavMesh::validate() const {
    if (width == 0 || height == 0) throw std::invalid_argument("navmesh: empty grid");
    if (!(cell_size > 0.0) || !std::isfinite(cell_size))
        throw std::invalid_argument("navmesh: cell_size must be positive");
    const std::size_t n = width * height;
    if (walkable.size() != n || richness.size() != n)
        throw std::invalid_argument("navmesh: layer size mismatch");
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (walkable[i] == 0) continue;
        any = true;
        if (!(richness[i] >= 0.0))
            throw std::invalid_argument("navmesh: negative richness on walkable cell");
    }
    if (!any) throw std::invalid_argument("navmesh: no walkable cell");
}

GridNavMesh make_open_mesh(std::size_t width, std::size_t height, double cell_size) {
    GridNavMesh mesh;
    mesh.width = width;
    mesh.height = height;
    mesh.cell_size = cell_size;
    mesh.walkable.assign(width * height, 1);
    mesh.richness.assign(width * height, 0.0);
    return mesh;
}

std::vector<Cell> plan_path(const GridNavMesh& mesh, const Cell& start, const Cell& goal) {
    mesh.validate();
    if (!mesh.is_walkable(start)) throw std::invalid_argument("plan_path: start not walkable");
    if (!mesh.in_bounds(goal)) throw std::invalid_argument("plan_path: goal off-grid");
    if (!mesh.is_walkable(goal)) return {};
    if (start == goal) return {start};

    const std::size_t n = mesh.width * mesh.height;
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> g(n, kInf);
    std::vector<std::size_t> parent(n, n);
    std::vector<std::uint8_t> closed(n, 0);

    struct Node {
        double f;
        double g;
        std::size_t idx;
        bool operator<(const Node& o) const {
            if (f != o.f) return f > o.f;     // min-heap on f
            if (g != o.g) return g < o.g;     // deeper node first
            return idx > o.idx;               // lowest index first
        }
    };
    std::priority_queue<Node> open;
    const std::size_t si = mesh.index(start);
    const std::size_t gi = mesh.index(goal);
    g[si] = 0.0;
    open.push({octile(start, goal), 0.0, si});

    while (!open.empty()) {
        const Node top = open.top();
        open.pop();
        if (closed[top.idx]) continue;
        closed[top.idx] = 1;
        if (top.idx == gi) break;
        const Cell cur{top.idx % mesh.width, top.idx / mesh.width};
        for (int nb = 0; nb < 8; ++nb) {
            Cell next;
            if (!step_allowed(mesh, cur, kDx[nb], kDy[nb], next)) continue;
            const std::size_t ni = mesh.index(next);
            if (closed[ni]) continue;
            const double step = (kDx[nb] != 0 && kDy[nb] != 0) ? kDiag : 1.0;
            const double cand = g[top.idx] + step;
            if (cand < g[ni]) {
                g[ni] = cand;
                parent[ni] = top.idx;
                open.push({cand + octile(next, goal), cand, ni});
            }
        }
    }
    if (!closed[gi]) return {};

    std::vector<Cell> path;
    for (std::size_t at = gi; at != n; at = parent[at]) {
        path.push_back({at % mesh.width, at / mesh.width});
        if (at == si) break;
    }
    std::reverse(path.begin(), path.end());
    return path;
}

double path_cost(const std::vector<Cell>& path) {
    double total = 0.0;
    for (std::size_t i = 1; i < path.size(); ++i) {
        const bool diag = path[i].x != path[i - 1].x && path[i].y != path[i - 1].y;
        total += diag ? kDiag : 1.0;
    }
    return total;
}

Cell select_goal(const AgentState& state, const GridNavMesh& mesh, const GoalWeights& weights) {
    mesh.validate();
    if (!mesh.is_walkable(state.cell))
        throw std::invalid_argument("select_goal: agent cell not walkable");
    if (state.visit_counts.size() != mesh.width * mesh.height)
        throw std::invalid_argument("select_goal: visit_counts size mismatch");
    if (!(weights.alpha >= 0.0) || !(weights.beta >= 0.0))
        throw std::invalid_argument("select_goal: weights must be non-negative");
    if (weights.alpha == 0.0 && weights.beta == 0.0)
        throw std::invalid_argument("select_goal: weights must not both be zero");

    const auto seen = reachable_from(mesh, state.cell);
    bool found = false;
    Cell best{};
    double best_score = 0.0;
    double best_dist = 0.0;
    for (std::size_t i = 0; i < seen.size(); ++i) {
        if (!seen[i]) continue;
        const Cell c{i % mesh.width, i / mesh.width};
        if (c == state.cell) continue;
        const double score = weights.alpha / (1.0 + static_cast<double>(state.visit_counts[i])) +
                             weights.beta * mesh.richness[i];
        const double dist = octile(state.cell, c);
        // Ties: greater distance wins, then the lowest index (first seen).
        if (!found || score > best_score || (score == best_score && dist > best_dist)) {
            found = true;
            best = c;
            best_score = score;
            best_dist = dist;
        }
    }
    if (!found) throw NoReachableGoal("select_goal: no reachable cell besides the agent's own");
    return best;
}

std::vector<Cell> lawnmower_route(const GridNavMesh& mesh) {
    std::vector<Cell> route;
    route.reserve(mesh.width * mesh.height);
    for (std::size_t y = 0; y < mesh.height; ++y) {
        if (y % 2 == 0) {
            for (std::size_t x = 0; x < mesh.width; ++x)
                if (mesh.is_walkable({x, y})) route.push_back({x, y});
        } else {
            for (std::size_t x = mesh.width; x-- > 0;)
                if (mesh.is_walkable({x, y})) route.push_back({x, y});
        }
    }
    return route;
}

namespace {

Cell nearest_walkable(const GridNavMesh& mesh, const geom::Vec2& target, const Cell& exclude,
                      double max_radius_cells, bool& found) {
    found = false;
    Cell best{};
    double best_d = 0.0;
    std::size_t best_idx = 0;
    for (std::size_t i = 0; i < mesh.width * mesh.height; ++i) {
        if (!mesh.walkable[i]) continue;
        const Cell c{i % mesh.width, i / mesh.width};
        if (c == exclude) continue;
        const geom::Vec2 cc = cell_center(c);
        const double d = std::hypot(cc.x - target.x, cc.y - target.y);
        if (d > max_radius_cells) continue;
        if (!found || d < best_d || (d == best_d && i < best_idx)) {
            found = true;
            best = c;
            best_d = d;
            best_idx = i;
        }
    }
    return best;
}

} // namespace

Cell fallback_goal(const AgentState& state, const GridNavMesh& mesh, FallbackStage stage,
                   const FallbackConfig& config) {
    mesh.validate();
    if (!mesh.is_walkable(state.cell))
        throw std::invalid_argument("fallback_goal: agent cell not walkable");
    const geom::Vec2 origin = cell_center(state.cell);
    constexpr double kInfRadius = std::numeric_limits<double>::infinity();

    switch (stage) {
    case FallbackStage::directional: {
        if (state.visit_counts.size() != mesh.width * mesh.height)
            throw std::invalid_argument("fallback_goal: visit_counts size mismatch");
        // Aggregate visits per 45-degree sector around the agent.
        std::uint64_t sums[8] = {};
        for (std::size_t i = 0; i < mesh.width * mesh.height; ++i) {
            if (!mesh.walkable[i]) continue;
            const Cell c{i % mesh.width, i / mesh.width};
            if (c == state.cell) continue;
            const geom::Vec2 cc = cell_center(c);
            const double ang = std::atan2(cc.y - origin.y, cc.x - origin.x);
            int sector = static_cast<int>(std::ceil(ang / (M_PI / 4.0) - 0.5));
            sector = ((sector % 8) + 8) % 8;
            sums[sector] += state.visit_counts[i];
        }
        int pick = 0;
        for (int s = 1; s < 8; ++s)
            if (sums[s] < sums[pick]) pick = s;
        const double heading = pick * (M_PI / 4.0);
        const geom::Vec2 target{origin.x + config.directional_range_cells * std::cos(heading),
                                origin.y + config.directional_range_cells * std::sin(heading)};
        bool found = false;
        const Cell goal = nearest_walkable(mesh, target, state.cell, kInfRadius, found);
        if (!found) throw NoReachableGoal("fallback_goal: directional found no walkable cell");
        return goal;
    }
    case FallbackStage::shape: {
        const auto route = lawnmower_route(mesh);
        if (route.size() < 2) throw NoReachableGoal("fallback_goal: route too short");
        for (std::size_t i = 0; i < route.size(); ++i) {
            if (route[i] == state.cell) return route[(i + 1) % route.size()];
        }
        // Agent off-route cannot happen for walkable cells; keep a guard.
        throw NoReachableGoal("fallback_goal: agent cell missing from route");
    }
    case FallbackStage::multi_radius: {
        for (const std::size_t r : config.radii) {
            bool found = false;
            const Cell goal =
                nearest_walkable(mesh, origin, state.cell, static_cast<double>(r), found);
            if (found) return goal;
        }
        throw NoReachableGoal("fallback_goal: no walkable cell within the largest radius");
    }
    }
    throw std::invalid_argument("fallback_goal: unknown stage");
}

const char* to_string(StuckKind kind) {
    switch (kind) {
    case StuckKind::position_delta: return "position_delta";
    case StuckKind::path_timeout: return "path_timeout";
    case StuckKind::bounding_box: return "bounding_box";
    }
    return "unknown";
}

std::optional<StuckSignal> stuck_check(const std::vector<AgentState>& window,
                                       const StuckConfig& config) {
    if (config.window < 2) throw std::invalid_argument("stuck_check: window must be >= 2");
    if (window.size() < config.window) return std::nullopt;
    const std::size_t begin = window.size() - config.window;

    StuckSignal sig{};
    double min_x = 0.0, max_x = 0.0, min_y = 0.0, max_y = 0.0;
    geom::Vec2 prev{};
    for (std::size_t i = begin; i < window.size(); ++i) {
        const geom::Vec2 p = position_cells(window[i]);
        if (i == begin) {
            min_x = max_x = p.x;
            min_y = max_y = p.y;
        } else {
            sig.window_travel += std::hypot(p.x - prev.x, p.y - prev.y);
            min_x = std::min(min_x, p.x);
            max_x = std::max(max_x, p.x);
            min_y = std::min(min_y, p.y);
            max_y = std::max(max_y, p.y);
        }
        prev = p;
    }
    sig.box_side = std::max(max_x - min_x, max_y - min_y);
    const std::uint64_t now = window.back().tick;
    sig.ticks_since_path_start = now >= config.path_start_tick ? now - config.path_start_tick : 0;

    if (sig.window_travel < config.eps_pos_cells) {
        sig.kind = StuckKind::position_delta;
        return sig;
    }
    if (config.path_length > 0 &&
        static_cast<double>(sig.ticks_since_path_start) >
            config.budget_factor * static_cast<double>(config.path_length)) {
        sig.kind = StuckKind::path_timeout;
        return sig;
    }
    if (sig.box_side < config.eps_box_cells) {
        sig.kind = StuckKind::bounding_box;
        return sig;
    }
    return std::nullopt;
}

CameraAngles randomize_camera(CameraMode mode, const PitchRange& pitch_range,
                              std::uint64_t seed) {
    if (!std::isfinite(pitch_range.lo) || !std::isfinite(pitch_range.hi) ||
        pitch_range.lo > pitch_range.hi)
        throw std::invalid_argument("randomize_camera: invalid pitch range");
    auto engine = rng::make_engine(seed);
    CameraAngles out;
    if (mode == CameraMode::sweep360) {
        out.yaw = rng::uniform_double(engine) * 2.0 * M_PI;
    } else {
        out.yaw = static_cast<double>(rng::uniform_index(engine, 8)) * (M_PI / 4.0);
    }
    out.pitch = pitch_range.lo + (pitch_range.hi - pitch_range.lo) * rng::uniform_double(engine);
    return out;
}

std::uint64_t character_variants(const CharacterAssembly& assembly) {
    std::uint64_t total = 1;
    for (const auto& [name, count] : assembly.categories) {
        if (count == 0)
            throw std::invalid_argument("character_variants: category '" + name +
                                        "' has no options");
        if (total > std::numeric_limits<std::uint64_t>::max() / count)
            throw std::overflow_error("character_variants: variant count overflows 64 bits");
        total *= count;
    }
    return total;
}

std::vector<std::uint64_t> sample_character(const CharacterAssembly& assembly,
                                            std::uint64_t seed) {
    character_variants(assembly);  // validates option counts
    auto engine = rng::make_engine(seed);
    std::vector<std::uint64_t> picks;
    picks.reserve(assembly.categories.size());
    for (const auto& [name, count] : assembly.categories)
        picks.push_back(rng::uniform_index(engine, count));
    return picks;
}

namespace {

// Pose of the player and its head camera for a grid position.
actions::FrameState capture_state(const GridNavMesh& mesh, const AgentState& agent,
                                  const CameraAngles& camera, double eye_height,
                                  std::uint64_t tick) {
    actions::FrameState fs;
    fs.frame_index = tick;
    const geom::Vec2 pc = position_cells(agent);
    const geom::Vec2 ground{pc.x * mesh.cell_size, pc.y * mesh.cell_size};
    fs.player_position = geom::ground_to_world(ground, 0.0);
    fs.player_rotation = geom::camera_rotation(agent.yaw, 0.0);
    fs.camera_pose.position = fs.player_position + geom::Vec3{0.0, eye_height, 0.0};
    fs.camera_pose.rotation = geom::camera_rotation(camera.yaw, camera.pitch);
    return fs;
}

} // namespace

Episode run_episode(const GridNavMesh& mesh, const EpisodeConfig& config, std::uint64_t ticks,
                    std::uint64_t seed) {
    mesh.validate();
    if (ticks == 0) throw std::invalid_argument("run_episode: ticks must be >= 1");

    Episode ep;
    ep.camera = randomize_camera(config.camera_mode, config.pitch_range,
                                 rng::derive_seed(seed, 0));
    if (!config.assembly.categories.empty())
        ep.character = sample_character(config.assembly, rng::derive_seed(seed, 1));
    auto flag_engine = rng::make_engine(rng::derive_seed(seed, 2));

    AgentState agent;
    if (config.start) {
        agent.cell = *config.start;
    } else {
        std::size_t first = 0;
        while (first < mesh.walkable.size() && mesh.walkable[first] == 0) ++first;
        agent.cell = {first % mesh.width, first / mesh.width};
    }
    if (!mesh.is_walkable(agent.cell))
        throw std::invalid_argument("run_episode: start cell not walkable");
    agent.yaw = ep.camera.yaw;
    agent.visit_counts.assign(mesh.width * mesh.height, 0);

    std::vector<Cell> path;
    std::size_t path_pos = 0;
    std::uint64_t path_start_tick = 0;
    std::vector<AgentState> window;

    // Goal selection first, then the fallback cascade; true when a path with
    // at least one step is active afterwards.
    const auto replan = [&](std::uint64_t tick, bool include_select) {
        path.clear();
        path_pos = 0;
        if (include_select) {
            try {
                const Cell goal = select_goal(agent, mesh, config.weights);
                path = plan_path(mesh, agent.cell, goal);
            } catch (const NoReachableGoal&) {
            }
        }
        if (path.size() < 2) {
            for (const FallbackStage stage :
                 {FallbackStage::directional, FallbackStage::shape, FallbackStage::multi_radius}) {
                try {
                    const Cell goal = fallback_goal(agent, mesh, stage, config.fallback);
                    path = plan_path(mesh, agent.cell, goal);
                } catch (const NoReachableGoal&) {
                    path.clear();
                }
                if (path.size() >= 2) break;
            }
        }
        if (path.size() < 2) {
            path.clear();
            return false;
        }
        path_pos = 1;
        path_start_tick = tick;
        return true;
    };

    for (std::uint64_t tick = 0; tick < ticks; ++tick) {
        agent.tick = tick;
        window.push_back(agent);
        if (window.size() > config.stuck.window) window.erase(window.begin());

        if (window.size() >= config.stuck.window) {
            StuckConfig sc = config.stuck;
            sc.path_length = path.size();
            sc.path_start_tick = path_start_tick;
            if (const auto sig = stuck_check(window, sc)) {
                ep.stuck_events.push_back({tick, sig->kind});
                window.clear();
                if (!replan(tick, /*include_select=*/false)) {
                    ep.ended_early = true;
                    ep.end_reason = "no goal available after stuck signal";
                    break;
                }
            }
        }
        if (path.empty() || path_pos >= path.size()) {
            if (!replan(tick, /*include_select=*/true)) {
                ep.ended_early = true;
                ep.end_reason = "no reachable goal";
                break;
            }
        }

        const Cell next = path[path_pos];
        const geom::Vec2 step{
            (static_cast<double>(next.x) - static_cast<double>(agent.cell.x)) * mesh.cell_size,
            (static_cast<double>(next.y) - static_cast<double>(agent.cell.y)) * mesh.cell_size};
        agent.yaw = std::atan2(step.y, step.x);

        const bool jump = rng::uniform_double(flag_engine) < config.jump_prob;
        const bool attack = rng::uniform_double(flag_engine) < config.attack_prob;
        const auto dir = actions::classify_direction(step, ep.camera.yaw, 0.0);

        CaptureRecord rec;
        rec.state = capture_state(mesh, agent, ep.camera, config.eye_height, tick);
        rec.state.nav_flag = true;
        rec.state.jump_flag = jump;
        rec.state.attack_flag = attack;
        rec.action = actions::direction_to_action(dir, jump, attack);
        ep.records.push_back(rec);

        agent.visit_counts[mesh.index(agent.cell)] += 1;
        agent.cell = next;
        ++path_pos;
    }

    // Final record repeats the penultimate action, mirroring how actions are
    // inferred from positions alone.
    if (ep.records.size() >= 2)
        ep.records.back().action = ep.records[ep.records.size() - 2].action;
    ep.visit_counts = agent.visit_counts;
    return ep;
}

} // namespace wmkit::explorer
