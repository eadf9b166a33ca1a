#include "alignrr/scoring.hpp"

#include <cmath>

#include "alignrr/errors.hpp"

namespace alignrr {

namespace {

void check_background(const EventBackground& p) {
    if (p.size() == 0) throw invalid_input("background is empty");
    if ((p.array() <= 0.0).any()) throw invalid_input("background frequencies must be positive");
}

}  // namespace

ScoringMatrix build_scoring_matrix_simple(const EventBackground& background, double alpha,
                                          double gap_open, double gap_extend) {
    check_background(background);
    if (alpha > 0.0) throw invalid_input("off-diagonal score alpha must be <= 0");
    const int n = static_cast<int>(background.size());
    ScoringMatrix out;
    out.s = Matrix::Constant(n, n, alpha);
    for (int i = 0; i < n; ++i) out.s(i, i) = 1.0 / background(i);
    out.background = background;
    out.gap_open = gap_open;
    out.gap_extend = gap_extend;
    return out;
}

ScoringMatrix build_scoring_matrix_karlin(const EventBackground& background, double epsilon,
                                          double off_diagonal, double gap_open,
                                          double gap_extend) {
    check_background(background);
    const int n = static_cast<int>(background.size());
    const double min_p = background.minCoeff();
    if (epsilon < 0.0 || epsilon >= min_p)
        throw invalid_input("epsilon must lie in [0, min_i p_i)");

    ScoringMatrix out;
    out.background = background;
    out.gap_open = gap_open;
    out.gap_extend = gap_extend;

    if (epsilon == 0.0 || n == 1) {
        // q_ii = p_i: diagonal log-odds ln(1/p_i); off-diagonal pinned to the
        // configured constant since ln(0) is unusable.
        out.s = Matrix::Constant(n, n, off_diagonal);
        for (int i = 0; i < n; ++i) out.s(i, i) = std::log(1.0 / background(i));
        return out;
    }

    Matrix q(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            q(i, j) = (i == j) ? background(i) - epsilon : epsilon / (n - 1);
    q /= q.sum();  // already ~1 by construction; normalize so lambda* = 1

    out.s.resize(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            out.s(i, j) = std::log(q(i, j) / (background(i) * background(j)));
    return out;
}

namespace detail {

double karlin_root(const Vector& weights, const Vector& exponents) {
    const auto value = [&](double lambda) {
        return (weights.array() * (lambda * exponents.array()).exp()).sum() - 1.0;
    };
    if ((exponents.array() <= 0.0).all())
        throw no_root_error("no positive scores: normalization has no positive root");

    double lo = std::ldexp(1.0, -20);
    if (value(lo) > 0.0)
        throw no_root_error("expected score is not negative: no positive root");
    double hi = lo;
    bool bracketed = false;
    while (hi <= std::ldexp(1.0, 10)) {
        hi *= 2.0;
        if (value(hi) > 0.0) {
            bracketed = true;
            break;
        }
        lo = hi;
    }
    if (!bracketed) throw no_root_error("no sign change found while bracketing lambda");

    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (value(mid) > 0.0)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

double solve_lambda(const ScoringMatrix& scoring) {
    check_background(scoring.background);
    const int n = scoring.size();
    Vector weights(n * n), exponents(n * n);
    int idx = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j, ++idx) {
            weights(idx) = scoring.background(i) * scoring.background(j);
            exponents(idx) = scoring.s(i, j);
        }
    }
    return detail::karlin_root(weights, exponents);
}

}  // namespace alignrr
