#include "alignrr/envs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <sstream>

#include "alignrr/errors.hpp"

namespace alignrr {

namespace {

// dx, dy for up, down, left, right
constexpr int kDx[4] = {0, 0, -1, 1};
constexpr int kDy[4] = {-1, 1, 0, 0};

const char* kFourRoomsMap =
    "S.PPP#......\n"
    "...PP#......\n"
    "PPPPP#...X..\n"
    "PPPPP#......\n"
    "PPPPP#......\n"
    "########D###\n"
    ".....#......\n"
    ".....#......\n"
    ".....D......\n"
    ".....#......\n"
    ".....#......\n"
    "T....#......\n";

const char* kEightRoomsMap =
    "S.PPP#.....#.....#......\n"
    "...PP#.....#.....#......\n"
    "PPPPP#..X..D.....D......\n"
    "PPPPP#.....#.....#......\n"
    "PPPPP#.....#.....#......\n"
    "#####################D##\n"
    ".....#.....#.....#......\n"
    ".....#.....#.....#......\n"
    ".....D.....D.....D......\n"
    ".....#.....#.....#......\n"
    ".....#.....#.....#......\n"
    "T....#.....#.....#......\n";

}  // namespace

GridLayout GridLayout::parse(const std::string& text) {
    GridLayout layout;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty()) continue;
        layout.rows.push_back(line);
    }
    if (layout.rows.empty()) throw invalid_input("map is empty");
    layout.height = static_cast<int>(layout.rows.size());
    layout.width = static_cast<int>(layout.rows[0].size());
    for (const auto& row : layout.rows)
        if (static_cast<int>(row.size()) != layout.width)
            throw invalid_input("map rows have unequal widths");

    layout.cell_index.assign(layout.width * layout.height, -1);
    for (int y = 0; y < layout.height; ++y) {
        for (int x = 0; x < layout.width; ++x) {
            const char c = layout.rows[y][x];
            if (c == '#') continue;
            const int pos = y * layout.width + x;
            const int cell = static_cast<int>(layout.cell_position.size());
            layout.cell_index[pos] = cell;
            layout.cell_position.push_back(pos);
            switch (c) {
                case 'P': layout.portal_entries.push_back(cell); break;
                case 'X': layout.portal_exit = cell; break;
                case 'S': layout.start = cell; break;
                case 'T': layout.target = cell; break;
                case '.':
                case 'D': break;
                default:
                    throw invalid_input(std::string("unknown map character '") + c + "'");
            }
        }
    }
    if (layout.start < 0) throw invalid_input("map has no start cell");
    if (layout.target < 0) throw invalid_input("map has no target cell");
    if (!layout.portal_entries.empty() && layout.portal_exit < 0)
        throw invalid_input("map has portal entries but no exit");
    return layout;
}

RoomsEnv::RoomsEnv(GridLayout layout, double slip, int horizon)
    : layout_(std::move(layout)), slip_(slip), horizon_(horizon) {
    if (slip_ < 0.0 || slip_ >= 1.0) throw invalid_input("slip must be in [0, 1)");
    if (layout_.portal_entries.empty()) throw invalid_input("rooms env needs portal entries");
}

RoomsEnv RoomsEnv::four_rooms(double slip) {
    return RoomsEnv(GridLayout::parse(kFourRoomsMap), slip);
}

RoomsEnv RoomsEnv::eight_rooms(double slip) {
    return RoomsEnv(GridLayout::parse(kEightRoomsMap), slip);
}

int RoomsEnv::move_cell(int cell, int direction) const {
    const int pos = layout_.cell_position[cell];
    const int x = pos % layout_.width + kDx[direction];
    const int y = pos / layout_.width + kDy[direction];
    if (x < 0 || x >= layout_.width || y < 0 || y >= layout_.height) return cell;
    const int next = layout_.cell_index[y * layout_.width + x];
    return next < 0 ? cell : next;
}

int RoomsEnv::resolve(int cell, int portal) const {
    return cell == layout_.portal_entries[portal] ? layout_.portal_exit : cell;
}

int RoomsEnv::reset(Rng& rng) {
    std::uniform_int_distribution<int> pick(0, n_portals() - 1);
    const int portal = pick(rng);
    t_ = 0;
    reached_ = layout_.start == layout_.target;
    active_ = true;
    state_ = encode(layout_.start, portal);
    return state_;
}

StepResult RoomsEnv::step(int action, Rng& rng) {
    if (!active_) throw std::logic_error("step on a finished episode");
    if (action < 0 || action >= 4) throw invalid_input("action must be in [0, 4)");

    const int portal = portal_of(state_);
    if (!reached_) {
        int direction = action;
        if (slip_ > 0.0) {
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            if (unit(rng) < slip_) {
                std::uniform_int_distribution<int> other(0, 2);
                int k = other(rng);
                direction = (k >= action) ? k + 1 : k;
            }
        }
        int next = move_cell(cell_of(state_), direction);
        next = resolve(next, portal);
        if (next == layout_.target) reached_ = true;
        state_ = encode(next, portal);
    }

    ++t_;
    StepResult result;
    result.state = state_;
    result.done = t_ >= horizon_;
    result.reward = (result.done && reached_) ? 1.0 : 0.0;
    if (result.done) active_ = false;
    return result;
}

ExplicitModel RoomsEnv::model() const {
    ExplicitModel model;
    model.n_states = n_states();
    model.n_actions = 4;
    model.discount = 0.99;
    model.transitions.assign(model.n_states,
                             std::vector<std::vector<ExplicitModel::Outcome>>(4));
    for (int cell = 0; cell < layout_.n_cells(); ++cell) {
        for (int portal = 0; portal < n_portals(); ++portal) {
            const int s = encode(cell, portal);
            for (int a = 0; a < 4; ++a) {
                auto& outcomes = model.transitions[s][a];
                if (cell == layout_.target) {
                    outcomes.push_back({s, 1.0, 0.0});
                    continue;
                }
                std::map<int, double> next_prob;
                for (int direction = 0; direction < 4; ++direction) {
                    const double p =
                        (direction == a) ? 1.0 - slip_ : slip_ / 3.0;
                    if (p <= 0.0) continue;
                    next_prob[resolve(move_cell(cell, direction), portal)] += p;
                }
                for (const auto& [next_cell, p] : next_prob) {
                    const double reward = next_cell == layout_.target ? 1.0 : 0.0;
                    outcomes.push_back({encode(next_cell, portal), p, reward});
                }
            }
        }
    }
    return model;
}

int RoomsEnv::shortest_path_length(int portal) const {
    std::vector<int> dist(layout_.n_cells(), -1);
    std::deque<int> queue;
    dist[layout_.start] = 0;
    queue.push_back(layout_.start);
    while (!queue.empty()) {
        const int cell = queue.front();
        queue.pop_front();
        for (int direction = 0; direction < 4; ++direction) {
            const int next = resolve(move_cell(cell, direction), portal);
            if (dist[next] < 0) {
                dist[next] = dist[cell] + 1;
                queue.push_back(next);
            }
        }
    }
    return dist[layout_.target];
}

KeyChestEnv::KeyChestEnv(int length, int key_cell, int chest_cell, int start_cell, int horizon)
    : length_(length), key_cell_(key_cell), chest_cell_(chest_cell), start_cell_(start_cell),
      horizon_(horizon) {
    if (length < 2 || key_cell == chest_cell || start_cell >= length)
        throw invalid_input("invalid key-chest geometry");
}

int KeyChestEnv::reset(Rng&) {
    t_ = 0;
    active_ = true;
    state_ = encode(start_cell_, false, false);
    return state_;
}

StepResult KeyChestEnv::step(int action, Rng&) {
    if (!active_) throw std::logic_error("step on a finished episode");
    if (action < 0 || action >= 2) throw invalid_input("action must be 0 (left) or 1 (right)");

    int pos = position_of(state_);
    bool key = has_key(state_);
    bool success = succeeded(state_);
    pos = std::clamp(pos + (action == 0 ? -1 : 1), 0, length_ - 1);
    if (pos == key_cell_) key = true;
    if (pos == chest_cell_ && key) success = true;
    state_ = encode(pos, key, success);

    ++t_;
    StepResult result;
    result.state = state_;
    result.done = t_ >= horizon_;
    result.reward = (result.done && success) ? 1.0 : 0.0;
    if (result.done) active_ = false;
    return result;
}

ExplicitModel KeyChestEnv::model() const {
    ExplicitModel model;
    model.n_states = n_states();
    model.n_actions = 2;
    model.discount = 0.99;
    model.transitions.assign(model.n_states,
                             std::vector<std::vector<ExplicitModel::Outcome>>(2));
    for (int s = 0; s < model.n_states; ++s) {
        for (int a = 0; a < 2; ++a) {
            int pos = position_of(s);
            bool key = has_key(s);
            bool success = succeeded(s);
            pos = std::clamp(pos + (a == 0 ? -1 : 1), 0, length_ - 1);
            if (pos == key_cell_) key = true;
            const bool success_next = success || (pos == chest_cell_ && key);
            const double reward = (!success && success_next) ? 1.0 : 0.0;
            model.transitions[s][a].push_back({encode(pos, key, success_next), 1.0, reward});
        }
    }
    return model;
}

std::vector<int> KeyChestEnv::key_event_steps(const Trajectory& trajectory) const {
    std::vector<int> steps;
    bool key = false, success = false;
    for (std::size_t t = 0; t < trajectory.steps.size(); ++t) {
        const int next = (t + 1 < trajectory.steps.size()) ? trajectory.steps[t + 1].state
                                                           : trajectory.final_state;
        if (!key && has_key(next)) {
            steps.push_back(static_cast<int>(t));
            key = true;
        }
        if (!success && succeeded(next)) {
            steps.push_back(static_cast<int>(t));
            success = true;
        }
    }
    return steps;
}

ValueIterationResult value_iteration(const ExplicitModel& model, double tol) {
    Vector v = Vector::Zero(model.n_states);
    Vector v_next(model.n_states);
    for (int sweep = 0; sweep < 1000000; ++sweep) {
        double change = 0.0;
        for (int s = 0; s < model.n_states; ++s) {
            double best = -std::numeric_limits<double>::infinity();
            for (int a = 0; a < model.n_actions; ++a) {
                double q = 0.0;
                for (const auto& outcome : model.transitions[s][a])
                    q += outcome.prob * (outcome.reward + model.discount * v(outcome.next));
                best = std::max(best, q);
            }
            v_next(s) = best;
            change = std::max(change, std::abs(v_next(s) - v(s)));
        }
        v.swap(v_next);
        if (change < tol) break;
    }

    ValueIterationResult result;
    result.values = v;
    result.policy.actions.assign(model.n_states, 0);
    for (int s = 0; s < model.n_states; ++s) {
        double best = -std::numeric_limits<double>::infinity();
        int best_action = 0;
        for (int a = 0; a < model.n_actions; ++a) {
            double q = 0.0;
            for (const auto& outcome : model.transitions[s][a])
                q += outcome.prob * (outcome.reward + model.discount * v(outcome.next));
            if (q > best) {
                best = q;
                best_action = a;
            }
        }
        result.policy.actions[s] = best_action;
    }
    return result;
}

std::vector<Trajectory> generate_demonstrations(Env& env, const TabularPolicy& policy,
                                                double exploration, int n, Rng& rng,
                                                int max_attempts) {
    if (exploration < 0.0 || exploration > 1.0)
        throw invalid_input("exploration must be in [0, 1]");
    if (n < 1) throw invalid_input("demonstration count must be positive");

    std::vector<Trajectory> demos;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> random_action(0, env.n_actions() - 1);

    int attempts = 0;
    while (static_cast<int>(demos.size()) < n && attempts < max_attempts) {
        ++attempts;
        Trajectory trajectory;
        int state = env.reset(rng);
        bool done = false;
        while (!done) {
            const int action =
                (unit(rng) < exploration) ? random_action(rng) : policy.act(state);
            const StepResult result = env.step(action, rng);
            trajectory.steps.push_back({state, action, result.reward});
            trajectory.terminal_return += result.reward;
            state = result.state;
            done = result.done;
        }
        trajectory.final_state = state;
        if (trajectory.terminal_return > 0.0) demos.push_back(std::move(trajectory));
    }
    if (static_cast<int>(demos.size()) < n)
        throw generation_failure("demonstration success rate below budget: " +
                                 std::to_string(demos.size()) + "/" + std::to_string(n) +
                                 " after " + std::to_string(attempts) + " attempts");
    return demos;
}

}  // namespace alignrr
