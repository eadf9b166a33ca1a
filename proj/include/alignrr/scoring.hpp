#pragma once

#include "alignrr/types.hpp"

namespace alignrr {

// Pairwise event-alignment scores with the background they were built from.
// Gap penalties are kept here so alignments carry their full scoring system.
struct ScoringMatrix {
    Matrix s;
    EventBackground background;
    double gap_open = 0.0;
    double gap_extend = 0.0;

    int size() const { return static_cast<int>(s.rows()); }
};

// Diagonal 1/p_i, off-diagonal `alpha` (must be <= 0).
ScoringMatrix build_scoring_matrix_simple(const EventBackground& background, double alpha,
                                          double gap_open = 0.0, double gap_extend = 0.0);

// Log-odds scores ln(q_ij / (p_i p_j)) / lambda* for the target alignment
// probabilities q_ii = p_i - epsilon, q_ij = epsilon/(n-1). With epsilon = 0
// the off-diagonal entries are set to `off_diagonal` instead of -inf.
ScoringMatrix build_scoring_matrix_karlin(const EventBackground& background, double epsilon,
                                          double off_diagonal = -1.0, double gap_open = 0.0,
                                          double gap_extend = 0.0);

// Unique positive root of sum_ij p_i p_j exp(lambda * s_ij) = 1, found by
// bracket scan over lambda in [2^-20, 2^10] plus bisection to 1e-10.
double solve_lambda(const ScoringMatrix& scoring);

namespace detail {

// Root of sum_i w_i exp(lambda * u_i) = 1 for positive weights w. Used for
// both the matrix-level and the per-column normalization.
double karlin_root(const Vector& weights, const Vector& exponents);

}  // namespace detail

}  // namespace alignrr
