#include "alignrr/learning.hpp"

#include <cmath>

#include "alignrr/errors.hpp"

namespace alignrr {

void bc_initialize(QTable& table, const std::vector<Trajectory>& demos, double noise_mean,
                   double noise_std, Rng& rng, double margin) {
    if (noise_std < 0.0) throw invalid_input("noise std must be >= 0");

    Matrix counts = Matrix::Zero(table.q.rows(), table.q.cols());
    for (const auto& demo : demos)
        for (const auto& step : demo.steps) counts(step.state, step.action) += 1.0;

    std::normal_distribution<double> noise(noise_mean, noise_std);
    for (int s = 0; s < table.q.rows(); ++s) {
        const double total = counts.row(s).sum();
        for (int a = 0; a < table.q.cols(); ++a) {
            if (counts(s, a) > 0.0)
                table.q(s, a) = margin * (0.5 + 0.5 * counts(s, a) / total);
            else
                table.q(s, a) = noise_std == 0.0 ? noise_mean : noise(rng);
        }
    }
}

void rudder_q_update(QTable& table, int state, int action, double reward, double lr) {
    if (lr <= 0.0 || lr > 1.0) throw invalid_input("learning rate must be in (0, 1]");
    table.q(state, action) += lr * (reward - table.q(state, action));
    table.visits(state, action) += 1;
}

void q_learning_update(QTable& table, int state, int action, double reward, int next, bool done,
                       double lr, double discount) {
    if (lr <= 0.0 || lr > 1.0) throw invalid_input("learning rate must be in (0, 1]");
    const double bootstrap = done ? 0.0 : discount * table.q.row(next).maxCoeff();
    table.q(state, action) += lr * (reward + bootstrap - table.q(state, action));
    table.visits(state, action) += 1;
}

void sqil_update(QTable& table, const DemoTransition& agent,
                 const std::vector<DemoTransition>& demo_buffer, double lr, Rng& rng) {
    if (demo_buffer.empty()) throw invalid_input("SQIL needs a non-empty demo buffer");
    q_learning_update(table, agent.state, agent.action, 0.0, agent.next, agent.done, lr);
    std::uniform_int_distribution<std::size_t> pick(0, demo_buffer.size() - 1);
    const DemoTransition& demo = demo_buffer[pick(rng)];
    q_learning_update(table, demo.state, demo.action, 1.0, demo.next, demo.done, lr);
}

int greedy_action(const QTable& table, int state) {
    int best = 0;
    for (int a = 1; a < table.q.cols(); ++a)
        if (table.q(state, a) > table.q(state, best)) best = a;
    return best;
}

int epsilon_greedy(const QTable& table, int state, double epsilon, Rng& rng) {
    if (epsilon < 0.0 || epsilon > 1.0) throw invalid_input("epsilon must be in [0, 1]");
    if (epsilon > 0.0) {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        if (unit(rng) < epsilon) {
            std::uniform_int_distribution<int> any(0, static_cast<int>(table.q.cols()) - 1);
            return any(rng);
        }
    }
    return greedy_action(table, state);
}

std::vector<DemoTransition> flatten_demos(const std::vector<Trajectory>& demos) {
    std::vector<DemoTransition> out;
    for (const auto& demo : demos) {
        for (std::size_t t = 0; t < demo.steps.size(); ++t) {
            const bool last = t + 1 == demo.steps.size();
            out.push_back({demo.steps[t].state, demo.steps[t].action,
                           last ? demo.final_state : demo.steps[t + 1].state, last});
        }
    }
    return out;
}

double evaluate_greedy(Env& env, const QTable& table, int rollouts, Rng& rng) {
    double total = 0.0;
    for (int k = 0; k < rollouts; ++k) {
        int state = env.reset(rng);
        bool done = false;
        while (!done) {
            const StepResult result = env.step(greedy_action(table, state), rng);
            total += result.reward;
            state = result.state;
            done = result.done;
        }
    }
    return total / static_cast<double>(rollouts);
}

LearningCurve train(Env& env, const LearnerConfig& config, const StepRedistributor* redistributor,
                    const std::vector<Trajectory>& demos, int budget, int eval_every,
                    int eval_rollouts, Rng& rng, std::optional<double> stop_threshold,
                    QTable* out_table) {
    if (budget < 1) throw invalid_input("episode budget must be >= 1");
    if (config.method == Method::align_rudder && redistributor == nullptr)
        throw invalid_input("align-rudder training needs a redistribution model");

    QTable table(env.n_states(), env.n_actions());
    bc_initialize(table, demos, config.bc_noise_mean, config.bc_noise_std, rng,
                  config.bc_margin);
    const std::vector<DemoTransition> demo_buffer =
        config.method == Method::sqil ? flatten_demos(demos) : std::vector<DemoTransition>{};

    // per-demo redistributed step rewards, reused by the replay schedule
    std::vector<Vector> demo_rewards;
    if (config.method == Method::align_rudder && config.demo_replay) {
        for (const auto& demo : demos)
            demo_rewards.push_back(
                redistributor->step_rewards(demo, demo.terminal_return));
    }

    LearningCurve curve;
    const auto evaluate = [&](int episode) {
        const double value = evaluate_greedy(env, table, eval_rollouts, rng);
        curve.points.emplace_back(episode, value);
        return stop_threshold && value >= *stop_threshold;
    };

    if (evaluate(0)) {
        if (out_table) *out_table = table;
        return curve;
    }

    for (int episode = 1; episode <= budget; ++episode) {
        Trajectory trajectory;
        int state = env.reset(rng);
        bool done = false;
        while (!done) {
            const int action = epsilon_greedy(table, state, config.epsilon, rng);
            const StepResult result = env.step(action, rng);
            trajectory.steps.push_back({state, action, result.reward});
            trajectory.terminal_return += result.reward;
            switch (config.method) {
                case Method::bc_q:
                    q_learning_update(table, state, action, result.reward, result.state,
                                      result.done, config.learning_rate, config.discount);
                    break;
                case Method::sqil:
                    sqil_update(table, {state, action, result.state, result.done}, demo_buffer,
                                config.learning_rate, rng);
                    break;
                case Method::align_rudder:
                    break;  // updated from the redistributed episode below
            }
            state = result.state;
            done = result.done;
        }
        trajectory.final_state = state;

        if (config.method == Method::align_rudder) {
            const Vector rewards =
                redistributor->step_rewards(trajectory, trajectory.terminal_return);
            for (std::size_t t = 0; t < trajectory.steps.size(); ++t)
                rudder_q_update(table, trajectory.steps[t].state, trajectory.steps[t].action,
                                rewards(static_cast<int>(t)), config.learning_rate);
            if (!demo_rewards.empty()) {
                const std::size_t d = (episode - 1) % demos.size();
                for (std::size_t t = 0; t < demos[d].steps.size(); ++t)
                    rudder_q_update(table, demos[d].steps[t].state, demos[d].steps[t].action,
                                    demo_rewards[d](static_cast<int>(t)),
                                    config.learning_rate);
            }
        }

        if (episode % eval_every == 0 && evaluate(episode)) break;
    }

    if (out_table) *out_table = table;
    return curve;
}

}  // namespace alignrr
