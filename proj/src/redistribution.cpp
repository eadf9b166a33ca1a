#include "alignrr/redistribution.hpp"

#include <cmath>

#include "alignrr/errors.hpp"

namespace alignrr {

RedistributionModel fit_redistribution(const std::vector<EventSequence>& demos,
                                       const Pssm& pssm) {
    if (demos.empty()) throw invalid_input("fit needs at least one demonstration");

    double mean_return = 0.0, mean_gain = 0.0;
    for (const auto& demo : demos) {
        const Vector scores = prefix_scores(demo, pssm);
        // Telescoping: the summed score gains equal the final prefix score.
        mean_gain += scores(scores.size() - 1);
        mean_return += demo.source_return;
    }
    mean_return /= static_cast<double>(demos.size());
    mean_gain /= static_cast<double>(demos.size());
    if (std::abs(mean_gain) < 1e-12)
        throw degenerate_error("mean demonstration score gain is zero; alignment failed");

    RedistributionModel model;
    model.pssm = pssm;
    model.scale = mean_return / mean_gain;
    model.mean_demo_return = mean_return;
    model.mean_demo_score_gain = mean_gain;
    return model;
}

RedistributedEpisode redistribute(const EventSequence& seq, const RedistributionModel& model,
                                  double original_return) {
    const Vector scores = prefix_scores(seq, model.pssm);
    RedistributedEpisode episode;
    episode.original_return = original_return;
    episode.rewards.resize(seq.length());
    double previous = 0.0;
    for (int t = 0; t < seq.length(); ++t) {
        episode.rewards(t) = (scores(t) - previous) * model.scale;
        previous = scores(t);
    }
    episode.correction = original_return - episode.rewards.sum();
    return episode;
}

double mean_correction(const std::vector<EventSequence>& demos,
                       const RedistributionModel& model) {
    if (demos.empty()) throw invalid_input("mean correction needs demonstrations");
    double total = 0.0;
    for (const auto& demo : demos)
        total += redistribute(demo, model, demo.source_return).correction;
    return total / static_cast<double>(demos.size());
}

double estimate_kappa(const std::vector<RedistributedEpisode>& episodes, int m, int t) {
    if (episodes.empty()) throw invalid_input("kappa estimate needs episodes");
    const int horizon = static_cast<int>(episodes[0].rewards.size());
    for (const auto& ep : episodes)
        if (ep.rewards.size() != horizon)
            throw invalid_input("episodes must share a common horizon");
    if (t < 0 || m < 0 || t + 1 + m > horizon - 1)
        throw invalid_input("kappa indices out of range");

    double total = 0.0;
    for (const auto& ep : episodes)
        total += ep.rewards.segment(t + 1, m + 1).sum();
    return total / static_cast<double>(episodes.size());
}

SubGoalSet extract_subgoals(const std::vector<EventSequence>& demos,
                            const RedistributionModel& model, double threshold) {
    if (threshold <= 0.0) throw invalid_input("sub-goal threshold must be positive");
    const int L = model.pssm.length();
    Vector column_total = Vector::Zero(L);

    for (const auto& demo : demos) {
        const RedistributedEpisode episode = redistribute(demo, model, demo.source_return);
        const ProfileAlignmentResult alignment = align_to_profile(demo, model.pssm);
        std::vector<int> column_of(demo.length(), -1);
        for (int l = 0; l < L; ++l)
            if (alignment.column_assignment[l] != kGap)
                column_of[alignment.column_assignment[l]] = l;
        int last = -1;
        for (int t = 0; t < demo.length(); ++t) {
            if (column_of[t] >= 0) last = column_of[t];
            if (last >= 0) column_total(last) += episode.rewards(t);
        }
    }
    column_total /= static_cast<double>(demos.size());

    SubGoalSet out;
    out.threshold = threshold;
    for (int l = 0; l < L; ++l)
        if (column_total(l) > threshold) out.positions.push_back(l);
    return out;
}

Vector StepRedistributor::step_rewards(const Trajectory& trajectory, double original_return,
                                       bool include_correction) const {
    const int n_steps = static_cast<int>(trajectory.steps.size());
    if (n_steps == 0) throw invalid_input("trajectory is empty");

    // Collapse to events, remembering the step at which each event appeared.
    EventSequence seq;
    seq.source_return = original_return;
    std::vector<int> first_step;
    int last = -1;
    for (int t = 0; t < n_steps; ++t) {
        const int state = trajectory.steps[t].state;
        if (state < 0 || state >= static_cast<int>(assignment.labels.size()))
            throw invalid_input("state has no cluster label");
        const int e = assignment.labels[state];
        if (e != last) {
            seq.events.push_back(e);
            first_step.push_back(t);
            last = e;
        }
    }

    const RedistributedEpisode episode = redistribute(seq, model, original_return);

    // Each event's reward lands on the transition that produced it; the
    // initial event belongs to the first step. The correction closes the
    // episode sum at the final step.
    Vector rewards = Vector::Zero(n_steps);
    for (int k = 0; k < seq.length(); ++k) {
        if (k == 0) {
            rewards(0) += episode.rewards(0);
            continue;
        }
        const int crossing = first_step[k] - 1;
        const int run_begin = first_step[k - 1];
        const double smeared = run_smear * episode.rewards(k);
        rewards(crossing) += episode.rewards(k) - smeared;
        const double per_step = smeared / static_cast<double>(crossing - run_begin + 1);
        for (int t = run_begin; t <= crossing; ++t) rewards(t) += per_step;
    }
    if (include_correction) rewards(n_steps - 1) += episode.correction;
    return rewards;
}

}  // namespace alignrr
