#include "alignrr/profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "alignrr/errors.hpp"
#include "alignrr/scoring.hpp"

namespace alignrr {

ProfileModel column_frequencies(const Msa& msa, int alphabet_size, double pseudocount) {
    if (msa.rows.empty()) throw invalid_input("MSA is empty");
    if (pseudocount < 0.0) throw invalid_input("pseudocount must be >= 0");
    const int L = msa.length();
    const int rows = msa.n_rows();
    const double denom = rows + pseudocount * alphabet_size;

    ProfileModel profile;
    profile.pseudocount = pseudocount;
    profile.q = Matrix::Constant(L, alphabet_size, pseudocount / denom);
    profile.gap_freq = Vector::Zero(L);
    for (int t = 0; t < L; ++t) {
        for (int r = 0; r < rows; ++r) {
            const int e = msa.rows[r][t];
            if (e == kGap)
                profile.gap_freq(t) += 1.0 / denom;
            else
                profile.q(t, e) += 1.0 / denom;
        }
    }
    return profile;
}

Pssm build_pssm(const ProfileModel& profile, const EventBackground& background,
                double floor_scale) {
    const int n = profile.alphabet();
    const int L = profile.length();
    if (background.size() != n) throw invalid_input("background size does not match profile");
    if ((background.array() <= 0.0).any())
        throw invalid_input("background frequencies must be positive");

    Pssm pssm;
    pssm.s = Matrix::Zero(n, L);
    pssm.lambda = Vector::Ones(L);
    pssm.gap_penalty = Vector::Zero(L);
    pssm.consensus.assign(L, 0);

    for (int t = 0; t < L; ++t) {
        if (profile.q.row(t).sum() <= 0.0)
            throw degenerate_error("profile column " + std::to_string(t) +
                                   " has no event mass");
        // Raw column frequencies: gap mass is simply missing, which makes
        // sparsely occupied columns score low (their root exceeds 1) or not
        // at all (no event above background).
        Vector log_odds(n);
        std::vector<bool> floored(n, false);
        double max_u = -std::numeric_limits<double>::infinity();
        double max_abs = 0.0;
        for (int i = 0; i < n; ++i) {
            const double q = profile.q(t, i);
            if (q <= 0.0) {
                floored[i] = true;
            } else {
                log_odds(i) = std::log(q / background(i));
                max_u = std::max(max_u, log_odds(i));
                max_abs = std::max(max_abs, std::abs(log_odds(i)));
            }
        }

        double lambda = 1.0;
        if (max_abs > 1e-9 && max_u > 0.0) {
            int kept = 0;
            for (int i = 0; i < n; ++i) kept += floored[i] ? 0 : 1;
            Vector w(kept), u(kept);
            for (int i = 0, k = 0; i < n; ++i) {
                if (floored[i]) continue;
                w(k) = background(i);
                u(k) = log_odds(i);
                ++k;
            }
            lambda = detail::karlin_root(w, u);
        }
        // max_u <= 0: no event above background, so the column carries no
        // positive evidence; scores stay at their (negative) log-odds.

        pssm.lambda(t) = lambda;
        const double floor = -floor_scale / lambda;
        for (int i = 0; i < n; ++i)
            pssm.s(i, t) = floored[i] ? floor : std::max(log_odds(i) / lambda, floor);

        int best = 0;
        for (int i = 1; i < n; ++i)
            if (pssm.s(i, t) > pssm.s(best, t)) best = i;
        pssm.consensus[t] = best;
    }
    return pssm;
}

namespace {

// DP over (columns consumed, events consumed). Ties prefer match, then
// skipping a column, then inserting an event.
struct ProfileDp {
    const Pssm& pssm;
    const std::vector<int>& events;
    Matrix h;          // (L+1) x (T+1)
    Eigen::MatrixX<char> from;  // 0 match, 1 column gap, 2 insertion

    explicit ProfileDp(const Pssm& p, const std::vector<int>& e) : pssm(p), events(e) {
        const int L = pssm.length();
        const int T = static_cast<int>(events.size());
        h.resize(L + 1, T + 1);
        from.resize(L + 1, T + 1);
        h(0, 0) = 0.0;
        from(0, 0) = 0;
        for (int t = 1; t <= T; ++t) {
            h(0, t) = h(0, t - 1) + pssm.insertion_penalty;
            from(0, t) = 2;
        }
        for (int l = 1; l <= L; ++l) {
            h(l, 0) = h(l - 1, 0) + pssm.gap_penalty(l - 1);
            from(l, 0) = 1;
        }
        for (int l = 1; l <= L; ++l) {
            for (int t = 1; t <= T; ++t) {
                const double match = h(l - 1, t - 1) + pssm.s(events[t - 1], l - 1);
                const double skip = h(l - 1, t) + pssm.gap_penalty(l - 1);
                const double insert = h(l, t - 1) + pssm.insertion_penalty;
                double v = match;
                char src = 0;
                if (skip > v) { v = skip; src = 1; }
                if (insert > v) { v = insert; src = 2; }
                h(l, t) = v;
                from(l, t) = src;
            }
        }
    }
};

}  // namespace

ProfileAlignmentResult align_to_profile(const EventSequence& seq, const Pssm& pssm) {
    for (int e : seq.events)
        if (e < 0 || e >= pssm.alphabet()) throw invalid_input("event index outside PSSM");

    const ProfileDp dp(pssm, seq.events);
    const int L = pssm.length();
    const int T = seq.length();

    ProfileAlignmentResult result;
    result.score = dp.h(L, T);
    result.column_assignment.assign(L, kGap);
    int l = L, t = T;
    while (l > 0 || t > 0) {
        const char src = dp.from(l, t);
        if (src == 0) {
            result.column_assignment[l - 1] = t - 1;
            --l;
            --t;
        } else if (src == 1) {
            --l;
        } else {
            --t;
        }
    }
    return result;
}

Vector prefix_scores(const EventSequence& seq, const Pssm& pssm) {
    if (seq.events.empty()) throw invalid_input("prefix scores need a non-empty sequence");
    for (int e : seq.events)
        if (e < 0 || e >= pssm.alphabet()) throw invalid_input("event index outside PSSM");

    // One table serves every prefix: h(L, t+1) is the global alignment score
    // of e_{0:t} against the full profile.
    const ProfileDp dp(pssm, seq.events);
    const int L = pssm.length();
    Vector scores(seq.length());
    for (int t = 0; t < seq.length(); ++t) scores(t) = dp.h(L, t + 1);
    return scores;
}

Vector prefix_scores_recompute(const EventSequence& seq, const Pssm& pssm) {
    if (seq.events.empty()) throw invalid_input("prefix scores need a non-empty sequence");
    Vector scores(seq.length());
    for (int t = 0; t < seq.length(); ++t) {
        EventSequence prefix;
        prefix.events.assign(seq.events.begin(), seq.events.begin() + t + 1);
        scores(t) = align_to_profile(prefix, pssm).score;
    }
    return scores;
}

}  // namespace alignrr
