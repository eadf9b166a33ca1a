#pragma once

#include <optional>
#include <vector>

#include "alignrr/envs.hpp"
#include "alignrr/redistribution.hpp"
#include "alignrr/types.hpp"

namespace alignrr {

struct QTable {
    Matrix q;
    MatrixI visits;

    QTable() = default;
    QTable(int n_states, int n_actions)
        : q(Matrix::Zero(n_states, n_actions)), visits(MatrixI::Zero(n_states, n_actions)) {}
};

enum class Method { align_rudder, bc_q, sqil };

struct LearnerConfig {
    Method method = Method::align_rudder;
    double learning_rate = 0.1;
    double epsilon = 0.2;
    double bc_noise_mean = 0.0;
    double bc_noise_std = 0.1;
    double bc_margin = 1.0;  // scales the demo-visited initialization band
    double discount = 1.0;
    // align-rudder: replay one redistributed demonstration per episode
    // (round-robin) so demonstrated corridors keep their value estimates
    bool demo_replay = false;
};

struct DemoTransition {
    int state = 0;
    int action = 0;
    int next = 0;
    bool done = false;
};

struct LearningCurve {
    std::vector<std::pair<int, double>> points;  // (episode, eval return)
};

// Demo-visited pairs get frequency-proportional values in
// margin * [0.5, 1.0]; every never-visited pair draws from
// Normal(mean, std).
void bc_initialize(QTable& table, const std::vector<Trajectory>& demos, double noise_mean,
                   double noise_std, Rng& rng, double margin = 1.0);

// Exponential average of the redistributed immediate reward.
void rudder_q_update(QTable& table, int state, int action, double reward, double lr);

void q_learning_update(QTable& table, int state, int action, double reward, int next, bool done,
                       double lr, double discount = 1.0);

// One zero-reward backup on the agent transition plus one reward-1 backup on
// a uniformly sampled demonstration transition.
void sqil_update(QTable& table, const DemoTransition& agent,
                 const std::vector<DemoTransition>& demo_buffer, double lr, Rng& rng);

int epsilon_greedy(const QTable& table, int state, double epsilon, Rng& rng);

int greedy_action(const QTable& table, int state);

std::vector<DemoTransition> flatten_demos(const std::vector<Trajectory>& demos);

// Mean greedy-policy return over `rollouts` episodes.
double evaluate_greedy(Env& env, const QTable& table, int rollouts, Rng& rng);

// Runs budgeted episodes with epsilon-greedy acting, evaluating the greedy
// policy every `eval_every` episodes (and once before training). The
// align-rudder variant redistributes each finished episode and applies
// rudder updates per step; baselines update online. When `stop_threshold`
// is set, training stops at the first evaluation reaching it.
LearningCurve train(Env& env, const LearnerConfig& config, const StepRedistributor* redistributor,
                    const std::vector<Trajectory>& demos, int budget, int eval_every,
                    int eval_rollouts, Rng& rng,
                    std::optional<double> stop_threshold = std::nullopt,
                    QTable* out_table = nullptr);

}  // namespace alignrr
