#pragma once

#include <random>
#include <string>
#include <vector>

#include "alignrr/types.hpp"

namespace alignrr {

using Rng = std::mt19937_64;

struct StepResult {
    int state = 0;
    double reward = 0.0;
    bool done = false;
};

// Explicit tabular model for planning. Rewards sit on transitions; the
// discount encodes the fewest-steps preference used by the planner.
struct ExplicitModel {
    struct Outcome {
        int next = 0;
        double prob = 0.0;
        double reward = 0.0;
    };
    int n_states = 0;
    int n_actions = 0;
    double discount = 0.99;
    std::vector<std::vector<std::vector<Outcome>>> transitions;  // [s][a]
};

struct TabularPolicy {
    std::vector<int> actions;

    int act(int state) const { return actions[state]; }
};

struct ValueIterationResult {
    Vector values;
    TabularPolicy policy;
};

// Episodic environment with a fixed horizon; reward is emitted at the final
// step only.
class Env {
  public:
    virtual ~Env() = default;
    virtual int reset(Rng& rng) = 0;
    virtual StepResult step(int action, Rng& rng) = 0;
    virtual int n_states() const = 0;
    virtual int n_actions() const = 0;
    virtual int horizon() const = 0;
    virtual ExplicitModel model() const = 0;
};

// Grid map parsed from text rows: '#' wall, '.' floor, 'D' door, 'P' portal
// entry, 'X' portal exit, 'S' start, 'T' target.
struct GridLayout {
    int width = 0;
    int height = 0;
    std::vector<std::string> rows;
    std::vector<int> cell_index;     // (y * width + x) -> dense cell id or -1
    std::vector<int> cell_position;  // dense cell id -> y * width + x
    std::vector<int> portal_entries;
    int portal_exit = -1;
    int start = -1;
    int target = -1;

    int n_cells() const { return static_cast<int>(cell_position.size()); }
    static GridLayout parse(const std::string& text);
};

// Rooms gridworld with a teleport portal out of room 1. The observed state
// combines the cell with the episode's portal-entry id.
class RoomsEnv : public Env {
  public:
    RoomsEnv(GridLayout layout, double slip, int horizon = 200);

    static RoomsEnv four_rooms(double slip);
    static RoomsEnv eight_rooms(double slip);

    int reset(Rng& rng) override;
    StepResult step(int action, Rng& rng) override;
    int n_states() const override { return layout_.n_cells() * n_portals(); }
    int n_actions() const override { return 4; }
    int horizon() const override { return horizon_; }
    ExplicitModel model() const override;

    int n_portals() const { return static_cast<int>(layout_.portal_entries.size()); }
    int cell_of(int state) const { return state / n_portals(); }
    int portal_of(int state) const { return state % n_portals(); }
    int encode(int cell, int portal) const { return cell * n_portals() + portal; }
    const GridLayout& layout() const { return layout_; }

    // Fewest steps from the start to the target for a given portal entry
    // (breadth-first search through the portal).
    int shortest_path_length(int portal) const;

  private:
    int move_cell(int cell, int direction) const;
    int resolve(int cell, int portal) const;

    GridLayout layout_;
    double slip_;
    int horizon_;
    int state_ = 0;
    int t_ = 0;
    bool reached_ = false;
    bool active_ = false;
};

// 1D corridor: collect the key, then open the chest; reward arrives at the
// fixed final timestep. State encodes position, key flag and success flag.
class KeyChestEnv : public Env {
  public:
    KeyChestEnv(int length = 11, int key_cell = 0, int chest_cell = 10, int start_cell = 5,
                int horizon = 32);

    int reset(Rng& rng) override;
    StepResult step(int action, Rng& rng) override;
    int n_states() const override { return length_ * 4; }
    int n_actions() const override { return 2; }
    int horizon() const override { return horizon_; }
    ExplicitModel model() const override;

    int position_of(int state) const { return state % length_; }
    bool has_key(int state) const { return (state / length_) % 2 != 0; }
    bool succeeded(int state) const { return state / (2 * length_) != 0; }

    // Transition indices at which the key was collected / the chest opened.
    std::vector<int> key_event_steps(const Trajectory& trajectory) const;

  private:
    int encode(int pos, bool key, bool success) const {
        return pos + length_ * (key ? 1 : 0) + 2 * length_ * (success ? 1 : 0);
    }

    int length_, key_cell_, chest_cell_, start_cell_, horizon_;
    int state_ = 0;
    int t_ = 0;
    bool active_ = false;
};

// Bellman-optimality sweeps to `tol` sup-norm change; greedy policy with
// lowest-action-index tie-break.
ValueIterationResult value_iteration(const ExplicitModel& model, double tol = 1e-10);

// Rolls out `policy` with uniform-random actions at rate `exploration`,
// keeping only episodes that obtain a positive return. Fails if fewer than
// 1% of sampled episodes succeed within the attempt budget.
std::vector<Trajectory> generate_demonstrations(Env& env, const TabularPolicy& policy,
                                                double exploration, int n, Rng& rng,
                                                int max_attempts = 20000);

}  // namespace alignrr
