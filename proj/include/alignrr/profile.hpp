#pragma once

#include <vector>

#include "alignrr/alignment.hpp"
#include "alignrr/types.hpp"

namespace alignrr {

// Column-wise event frequencies q(t, i) of an MSA, with the gap share of
// each column kept separate from the event mass.
struct ProfileModel {
    Matrix q;          // L x n_events
    Vector gap_freq;   // per column
    double pseudocount = 0.0;

    int length() const { return static_cast<int>(q.rows()); }
    int alphabet() const { return static_cast<int>(q.cols()); }
};

// Position-specific scoring matrix: per-column log-odds scores against the
// background, each column normalized by its own Karlin root.
struct Pssm {
    Matrix s;                    // n_events x L
    Vector lambda;               // per column
    Vector gap_penalty;          // per column, applied to unmatched columns
    std::vector<int> consensus;  // argmax event per column
    double insertion_penalty = 0.0;

    int alphabet() const { return static_cast<int>(s.rows()); }
    int length() const { return static_cast<int>(s.cols()); }
};

struct ProfileAlignmentResult {
    double score = 0.0;
    // For each profile column, the aligned sequence position or kGap.
    std::vector<int> column_assignment;
};

ProfileModel column_frequencies(const Msa& msa, int alphabet_size, double pseudocount);

// Scores s(i,t) = ln(q(i,t)/p_i) / lambda_t where lambda_t is the positive
// root of sum_i p_i exp(lambda s(i,t)) = 1. Columns whose event mass sums
// to 1 get lambda_t = 1; gap mass pushes the root above 1, shrinking the
// scores of sparsely occupied columns. Columns with no event above the
// background keep lambda_t = 1 and purely non-positive scores. Entries that
// would underflow are floored at -floor_scale / lambda_t.
Pssm build_pssm(const ProfileModel& profile, const EventBackground& background,
                double floor_scale = 10.0);

// Global DP over profile columns x sequence positions. Unmatched columns pay
// the column gap penalty, unmatched sequence events the insertion penalty.
ProfileAlignmentResult align_to_profile(const EventSequence& seq, const Pssm& pssm);

// Scores of all prefixes e_{0:t}; entry t equals the full profile-alignment
// score of the prefix of length t+1. Computed from a single DP table.
Vector prefix_scores(const EventSequence& seq, const Pssm& pssm);

// Reference path: one full DP per prefix. Must agree with prefix_scores
// exactly; kept as the independently checkable route.
Vector prefix_scores_recompute(const EventSequence& seq, const Pssm& pssm);

}  // namespace alignrr
