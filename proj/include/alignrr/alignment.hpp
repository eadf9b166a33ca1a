#pragma once

#include <vector>

#include "alignrr/scoring.hpp"
#include "alignrr/types.hpp"

namespace alignrr {

// Global alignment of two event sequences; kGap marks gap positions.
// Removing gaps from aligned_a reproduces the input a exactly (same for b).
struct PairwiseAlignment {
    std::vector<int> aligned_a;
    std::vector<int> aligned_b;
    double score = 0.0;
};

// Binary guide tree. Leaves hold sequence indices; internal nodes carry the
// UPGMA linkage height. Nodes are stored in merge order, root last.
struct GuideTree {
    struct Node {
        int left = -1;
        int right = -1;
        int leaf = -1;
        double height = 0.0;
        int size = 1;
    };
    std::vector<Node> nodes;
    int root = -1;
};

struct Msa {
    std::vector<std::vector<int>> rows;
    double score = 0.0;

    int length() const { return rows.empty() ? 0 : static_cast<int>(rows[0].size()); }
    int n_rows() const { return static_cast<int>(rows.size()); }
};

// Needleman-Wunsch global alignment with affine gap penalties (Gotoh).
// Deterministic tie-breaking: diagonal, then gap in b, then gap in a.
PairwiseAlignment pairwise_align(const EventSequence& a, const EventSequence& b,
                                 const ScoringMatrix& scoring);

// UPGMA on distances d(i,j) = max_score - score(i,j); ties join the lowest
// index pair first.
GuideTree build_guide_tree(const Matrix& pairwise_scores);

// Progressive profile alignment along the UPGMA guide tree. The recorded
// score is the sum-of-pairs score of the final alignment.
Msa progressive_msa(const std::vector<EventSequence>& sequences, const ScoringMatrix& scoring);

// Sum over unordered row pairs and columns; columns involving a gap
// contribute `gap_score`.
double sum_of_pairs_score(const Msa& msa, const ScoringMatrix& scoring, double gap_score = 0.0);

}  // namespace alignrr
