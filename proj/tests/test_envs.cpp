#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "alignrr/envs.hpp"
#include "alignrr/errors.hpp"

using namespace alignrr;

namespace {

int steps_until_target(const RoomsEnv& env, const Trajectory& trajectory) {
    const int target = env.layout().target;
    for (std::size_t t = 0; t < trajectory.steps.size(); ++t)
        if (env.cell_of(trajectory.steps[t].state) == target) return static_cast<int>(t);
    return -1;
}

}  // namespace

TEST_CASE("layouts: four and eight rooms parse with the expected anchors") {
    const RoomsEnv four = RoomsEnv::four_rooms(0.0);
    CHECK(four.n_portals() == 20);
    CHECK(four.layout().width == 12);
    CHECK(four.layout().height == 12);
    CHECK(four.layout().start >= 0);
    CHECK(four.layout().target >= 0);
    CHECK(four.layout().portal_exit >= 0);
    CHECK(four.horizon() == 200);

    const RoomsEnv eight = RoomsEnv::eight_rooms(0.0);
    CHECK(eight.n_portals() == 20);
    CHECK(eight.layout().width == 24);
    CHECK(eight.layout().height == 12);

    // target reachable through the portal for every entry
    for (int portal = 0; portal < 20; ++portal) {
        CHECK(four.shortest_path_length(portal) > 0);
        CHECK(eight.shortest_path_length(portal) > 0);
    }
}

TEST_CASE("layouts: malformed maps rejected") {
    CHECK_THROWS_AS(GridLayout::parse(""), invalid_input);
    CHECK_THROWS_AS(GridLayout::parse("S.\n..."), invalid_input);
    CHECK_THROWS_AS(GridLayout::parse("S.\n..Q"), invalid_input);
    CHECK_THROWS_AS(GridLayout::parse("S.\n.."), invalid_input);  // no target
}

TEST_CASE("rooms reset: reproducible and uniform over portal entries") {
    RoomsEnv env = RoomsEnv::four_rooms(0.0);
    Rng rng_a(42), rng_b(42);
    CHECK(env.reset(rng_a) == env.reset(rng_b));

    std::map<int, int> counts;
    Rng rng(7);
    for (int k = 0; k < 10000; ++k) counts[env.portal_of(env.reset(rng))] += 1;
    CHECK(counts.size() == 20);
    for (const auto& [portal, count] : counts)
        CHECK(std::abs(count / 10000.0 - 0.05) < 0.02);
}

TEST_CASE("rooms step: deterministic move, absorbing target, terminal reward") {
    RoomsEnv env = RoomsEnv::four_rooms(0.0);
    Rng rng(3);
    int state = env.reset(rng);
    const int start_cell = env.cell_of(state);
    const StepResult right = env.step(3, rng);
    CHECK(env.cell_of(right.state) == start_cell + 1);  // open cell to the right of start
    CHECK(right.reward == 0.0);
    CHECK_FALSE(right.done);

    // drive to the target via the portal with the planner policy
    const ValueIterationResult oracle = value_iteration(env.model());
    RoomsEnv fresh = RoomsEnv::four_rooms(0.0);
    int s = fresh.reset(rng);
    int arrival = -1;
    double total = 0.0;
    int steps = 0;
    bool done = false;
    while (!done) {
        const StepResult result = fresh.step(oracle.policy.act(s), rng);
        ++steps;
        if (arrival < 0 && fresh.cell_of(result.state) == fresh.layout().target)
            arrival = steps;
        total += result.reward;
        s = result.state;
        done = result.done;
    }
    CHECK(steps == 200);          // episode runs the full horizon
    CHECK(arrival > 0);
    CHECK(arrival < 200);
    CHECK(total == doctest::Approx(1.0));  // reward only at the final step
    CHECK_THROWS_AS(fresh.step(0, rng), std::logic_error);
}

TEST_CASE("rooms step: portal teleports from the active entry") {
    RoomsEnv env = RoomsEnv::four_rooms(0.0);
    // model-level check: any move landing on the active entry resolves to
    // the exit cell, and the entry cell never appears as a next state
    const ExplicitModel model = env.model();
    for (int portal = 0; portal < env.n_portals(); ++portal) {
        const int entry_cell = env.layout().portal_entries[portal];
        for (int cell = 0; cell < env.layout().n_cells(); ++cell) {
            for (int action = 0; action < 4; ++action) {
                for (const auto& outcome :
                     model.transitions[env.encode(cell, portal)][action])
                    CHECK(env.cell_of(outcome.next) != entry_cell);
            }
        }
    }

    // behavioral check: the planner's route jumps straight to the exit
    Rng rng(11);
    const ValueIterationResult oracle = value_iteration(env.model());
    for (int trial = 0; trial < 20; ++trial) {
        RoomsEnv walk = RoomsEnv::four_rooms(0.0);
        int s = walk.reset(rng);
        bool done = false, teleported = false;
        int previous_cell = walk.cell_of(s);
        while (!done && !teleported) {
            const StepResult result = walk.step(oracle.policy.act(s), rng);
            const int cell = walk.cell_of(result.state);
            const int px = walk.layout().cell_position[previous_cell] % 12;
            const int py = walk.layout().cell_position[previous_cell] / 12;
            const int cx = walk.layout().cell_position[cell] % 12;
            const int cy = walk.layout().cell_position[cell] / 12;
            if (std::abs(cx - px) + std::abs(cy - py) > 1) {
                teleported = true;
                CHECK(cell == walk.layout().portal_exit);
            }
            previous_cell = cell;
            s = result.state;
            done = result.done;
        }
        CHECK(teleported);
    }
}

TEST_CASE("rooms reset: finished episodes restart cleanly") {
    RoomsEnv env = RoomsEnv::four_rooms(0.0);
    Rng rng(31);
    env.reset(rng);
    for (int t = 0; t < 200; ++t) env.step(0, rng);
    CHECK_THROWS_AS(env.step(0, rng), std::logic_error);
    const int state = env.reset(rng);
    CHECK(env.cell_of(state) == env.layout().start);
    int steps = 0;
    bool done = false;
    while (!done) {
        done = env.step(0, rng).done;
        ++steps;
    }
    CHECK(steps == 200);
}

TEST_CASE("rooms step: slip frequency matches the configured rate") {
    RoomsEnv env = RoomsEnv::four_rooms(0.25);
    Rng rng(123);
    const int dx[4] = {0, 0, -1, 1};
    const int dy[4] = {-1, 1, 0, 0};
    int intended = 0, trials = 0, t = 0;
    for (int episode = 0; episode < 80; ++episode) {
        int s = env.reset(rng);
        bool done = false;
        while (!done) {
            const int cell = env.cell_of(s);
            const int x = env.layout().cell_position[cell] % 12;
            const int y = env.layout().cell_position[cell] / 12;
            const int action = t++ % 4;
            const int tx = x + dx[action], ty = y + dy[action];
            const bool free_target =
                tx >= 0 && tx < 12 && ty >= 0 && ty < 12 &&
                env.layout().cell_index[ty * 12 + tx] >= 0 &&
                env.layout().cell_index[ty * 12 + tx] != env.layout().target &&
                env.layout().cell_index[ty * 12 + tx] !=
                    env.layout().portal_entries[env.portal_of(s)];
            const StepResult result = env.step(action, rng);
            const int next_cell = env.cell_of(result.state);
            const int nx = env.layout().cell_position[next_cell] % 12;
            const int ny = env.layout().cell_position[next_cell] / 12;
            if (free_target && cell != env.layout().target) {
                ++trials;
                intended += (nx == tx && ny == ty) ? 1 : 0;
            }
            s = result.state;
            done = result.done;
        }
        if (trials > 10000) break;
    }
    CHECK(trials > 2000);
    CHECK(std::abs(static_cast<double>(intended) / trials - 0.75) < 0.02);
}

TEST_CASE("keychest: success, failure and timeout paths") {
    KeyChestEnv env;  // key at 0, chest at 10, start 5, horizon 32
    Rng rng(1);

    // left to the key, then right to the chest
    int s = env.reset(rng);
    double total = 0.0;
    int steps = 0;
    bool done = false;
    bool got_key = false, succeeded = false;
    while (!done) {
        const int pos = env.position_of(s);
        const int action = env.has_key(s) ? 1 : 0;
        const StepResult result = env.step(action, rng);
        got_key = got_key || env.has_key(result.state);
        succeeded = succeeded || env.succeeded(result.state);
        total += result.reward;
        s = result.state;
        done = result.done;
        ++steps;
        (void)pos;
    }
    CHECK(steps == 32);
    CHECK(got_key);
    CHECK(succeeded);
    CHECK(total == doctest::Approx(1.0));

    // straight to the chest without the key: no reward
    s = env.reset(rng);
    total = 0.0;
    done = false;
    while (!done) {
        const StepResult result = env.step(1, rng);
        total += result.reward;
        done = result.done;
    }
    CHECK(total == doctest::Approx(0.0));

    // oscillate in place: timeout without reward
    s = env.reset(rng);
    total = 0.0;
    done = false;
    int parity = 0;
    while (!done) {
        const StepResult result = env.step(parity ^= 1, rng);
        total += result.reward;
        done = result.done;
    }
    CHECK(total == doctest::Approx(0.0));
}

TEST_CASE("keychest: key event steps identify pickup and opening") {
    KeyChestEnv env;
    const ValueIterationResult oracle = value_iteration(env.model());
    Rng rng(5);
    Trajectory trajectory;
    int s = env.reset(rng);
    bool done = false;
    while (!done) {
        const int action = oracle.policy.act(s);
        const StepResult result = env.step(action, rng);
        trajectory.steps.push_back({s, action, result.reward});
        trajectory.terminal_return += result.reward;
        s = result.state;
        done = result.done;
    }
    trajectory.final_state = s;
    CHECK(trajectory.terminal_return == doctest::Approx(1.0));

    const std::vector<int> keys = env.key_event_steps(trajectory);
    REQUIRE(keys.size() == 2);
    CHECK(keys[0] == 4);   // start 5, key at 0: pickup caused by the 5th step
    CHECK(keys[1] == 14);  // then 10 steps right to the chest
}

TEST_CASE("value iteration: terminal reward and corridor policy") {
    // single decision state feeding an absorbing goal
    ExplicitModel tiny;
    tiny.n_states = 2;
    tiny.n_actions = 1;
    tiny.discount = 0.99;
    tiny.transitions.assign(2, std::vector<std::vector<ExplicitModel::Outcome>>(1));
    tiny.transitions[0][0].push_back({1, 1.0, 1.0});
    tiny.transitions[1][0].push_back({1, 1.0, 0.0});
    const ValueIterationResult result = value_iteration(tiny);
    CHECK(result.values(0) == doctest::Approx(1.0));
    CHECK(result.values(1) == doctest::Approx(0.0));

    // 3-cell corridor, target right: action 1 = right
    ExplicitModel corridor;
    corridor.n_states = 3;
    corridor.n_actions = 2;
    corridor.discount = 0.99;
    corridor.transitions.assign(3, std::vector<std::vector<ExplicitModel::Outcome>>(2));
    for (int s = 0; s < 3; ++s) {
        const int left = std::max(0, s - 1);
        const int right = std::min(2, s + 1);
        corridor.transitions[s][0].push_back({s == 2 ? 2 : left, 1.0, 0.0});
        corridor.transitions[s][1].push_back(
            {s == 2 ? 2 : right, 1.0, (s == 1 && right == 2) ? 1.0 : 0.0});
    }
    corridor.transitions[2][0] = {{2, 1.0, 0.0}};
    corridor.transitions[2][1] = {{2, 1.0, 0.0}};
    const ValueIterationResult vi = value_iteration(corridor);
    CHECK(vi.policy.act(0) == 1);
    CHECK(vi.policy.act(1) == 1);
}

TEST_CASE("demonstrations: optimal policy reaches the target at BFS length") {
    RoomsEnv env = RoomsEnv::four_rooms(0.0);
    const ValueIterationResult oracle = value_iteration(env.model());
    Rng rng(9);
    const auto demos = generate_demonstrations(env, oracle.policy, 0.0, 10, rng);
    CHECK(demos.size() == 10);
    for (const auto& demo : demos) {
        CHECK(demo.terminal_return == doctest::Approx(1.0));
        CHECK(demo.steps.size() == 200);
        const int portal = env.portal_of(demo.steps[0].state);
        CHECK(steps_until_target(env, demo) == env.shortest_path_length(portal));
    }
}

TEST_CASE("demonstrations: exploration keeps success with longer paths") {
    RoomsEnv env = RoomsEnv::four_rooms(0.0);
    const ValueIterationResult oracle = value_iteration(env.model());
    Rng rng(13);
    const auto demos = generate_demonstrations(env, oracle.policy, 0.2, 10, rng);
    for (const auto& demo : demos) {
        CHECK(demo.terminal_return == doctest::Approx(1.0));
        const int portal = env.portal_of(demo.steps[0].state);
        CHECK(steps_until_target(env, demo) >= env.shortest_path_length(portal));
    }
}

TEST_CASE("demonstrations: random walk exhausts the budget") {
    RoomsEnv env = RoomsEnv::four_rooms(0.0);
    TabularPolicy noop;
    noop.actions.assign(env.n_states(), 0);
    Rng rng(17);
    CHECK_THROWS_AS(generate_demonstrations(env, noop, 1.0, 50, rng, 60), generation_failure);
}

TEST_CASE("seed reproducibility: identical seeds give identical trajectories") {
    for (double slip : {0.0, 0.1}) {
        RoomsEnv env_a = RoomsEnv::four_rooms(slip);
        RoomsEnv env_b = RoomsEnv::four_rooms(slip);
        const ValueIterationResult oracle = value_iteration(env_a.model());
        Rng rng_a(21), rng_b(21);
        const auto demos_a = generate_demonstrations(env_a, oracle.policy, 0.2, 3, rng_a);
        const auto demos_b = generate_demonstrations(env_b, oracle.policy, 0.2, 3, rng_b);
        REQUIRE(demos_a.size() == demos_b.size());
        for (std::size_t d = 0; d < demos_a.size(); ++d) {
            REQUIRE(demos_a[d].steps.size() == demos_b[d].steps.size());
            for (std::size_t t = 0; t < demos_a[d].steps.size(); ++t) {
                CHECK(demos_a[d].steps[t].state == demos_b[d].steps[t].state);
                CHECK(demos_a[d].steps[t].action == demos_b[d].steps[t].action);
            }
        }
    }
}
