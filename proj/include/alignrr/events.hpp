#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "alignrr/types.hpp"

namespace alignrr {

// Cluster labels per state plus the exemplar (center) state of each cluster.
struct ClusterAssignment {
    std::vector<int> labels;
    std::vector<int> centers;
    int n_clusters = 0;
};

// Maps cluster indices to single uppercase letters; at most 26 events.
struct EventAlphabet {
    int n_events = 0;

    char letter(int event) const { return event_letter(event); }
};

EventAlphabet make_alphabet(int n_events);

// TD-learned successor representation M(s, .) over `n_states` enumerated
// states. Rows start at zero; every transition is replayed `sweeps` times.
Matrix build_successor_representation(const std::vector<std::pair<int, int>>& transitions,
                                      int n_states, double learning_rate, double discount,
                                      int sweeps);

// Similarity s(i,j) = -||row_i - row_j||_2. Diagonal is 0 and maximal.
Matrix successor_similarity(const Matrix& m);

// Dense affinity propagation. `preference` defaults to the median of the
// off-diagonal similarities when unset. Deterministic: no noise is injected.
ClusterAssignment affinity_propagation(const Matrix& similarity, double damping,
                                       int max_iterations,
                                       std::optional<double> preference = std::nullopt);

// Greedy agglomeration of the closest cluster centers (rows of `embedding`
// index the clustered points) until at most `max_clusters` remain.
ClusterAssignment merge_clusters(const ClusterAssignment& assignment, const Matrix& embedding,
                                 int max_clusters);

// Maps trajectory states through cluster labels, collapsing consecutive
// duplicate events into a single occurrence.
EventSequence map_to_events(const Trajectory& trajectory, const ClusterAssignment& assignment);

// Relative event frequencies over the given sequences. If any event of the
// alphabet is unobserved, every count gets an additive pseudocount of 1 so
// all frequencies stay positive.
EventBackground event_frequencies(const std::vector<EventSequence>& sequences,
                                  int alphabet_size);

}  // namespace alignrr
