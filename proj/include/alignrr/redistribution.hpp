#pragma once

#include <vector>

#include "alignrr/events.hpp"
#include "alignrr/profile.hpp"
#include "alignrr/types.hpp"

namespace alignrr {

// Profile plus the scale C = E_demo[G0] / E_demo[sum of score gains].
struct RedistributionModel {
    Pssm pssm;
    double scale = 0.0;
    double mean_demo_return = 0.0;
    double mean_demo_score_gain = 0.0;
};

// Per-event-step rewards R_{t+1}, the return-equivalence correction R_{T+2}
// and the original return they reconstruct.
struct RedistributedEpisode {
    Vector rewards;
    double correction = 0.0;
    double original_return = 0.0;
};

struct SubGoalSet {
    std::vector<int> positions;
    double threshold = 0.0;
};

RedistributionModel fit_redistribution(const std::vector<EventSequence>& demos, const Pssm& pssm);

RedistributedEpisode redistribute(const EventSequence& seq, const RedistributionModel& model,
                                  double original_return);

// Mean of R_{T+2} over the fitting demos; zero by construction of C.
double mean_correction(const std::vector<EventSequence>& demos, const RedistributionModel& model);

// Monte-Carlo estimate of the expected future rewards
// kappa(m, t) = E[ R_{t+2} + ... + R_{t+2+m} ].
double estimate_kappa(const std::vector<RedistributedEpisode>& episodes, int m, int t);

// Profile columns whose demo-averaged redistributed reward exceeds the
// threshold. Reward of steps that consume no column attributes to the last
// consumed column.
SubGoalSet extract_subgoals(const std::vector<EventSequence>& demos,
                            const RedistributionModel& model, double threshold);

// Bridges trajectories to redistributed per-step rewards: states are mapped
// through the cluster assignment, runs of equal events collapse, and each
// event's reward lands on the transition that produced it. `run_smear`
// spreads that fraction of the reward evenly over the walk through the
// preceding cluster (the steps that led up to the crossing), which gives
// interior steps of a cluster a learning signal. The per-episode sum is
// preserved either way; the correction is added to the final step so the
// rewards sum to the episode return.
struct StepRedistributor {
    ClusterAssignment assignment;
    RedistributionModel model;
    double run_smear = 0.0;

    Vector step_rewards(const Trajectory& trajectory, double original_return,
                        bool include_correction = true) const;
};

}  // namespace alignrr
