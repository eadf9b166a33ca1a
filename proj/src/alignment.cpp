#include "alignrr/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "alignrr/errors.hpp"

namespace alignrr {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

enum Op : char { kMatch = 0, kGapB = 1, kGapA = 2 };  // consume both / only a / only b

// Gotoh global alignment over abstract positions. `score(i, j)` rates pairing
// a-position i with b-position j; a run of k gaps costs open + k * extend.
// Ties prefer match, then a-against-gap, then b-against-gap.
struct AffineAligner {
    int m, n;
    std::function<double(int, int)> score;
    double open, extend;

    double best = 0.0;
    std::vector<Op> ops;  // in order from the start of the sequences

    void run() {
        const int w = n + 1;
        auto at = [w](int i, int j) { return i * w + j; };
        std::vector<double> mm((m + 1) * w, kNegInf), gx(mm), gy(mm);
        // 0 = from M, 1 = from X, 2 = from Y
        std::vector<char> pm(mm.size(), 0), px(mm.size(), 0), py(mm.size(), 0);

        mm[at(0, 0)] = 0.0;
        for (int i = 1; i <= m; ++i) gx[at(i, 0)] = -(open + i * extend);
        for (int j = 1; j <= n; ++j) gy[at(0, j)] = -(open + j * extend);

        for (int i = 1; i <= m; ++i) {
            for (int j = 1; j <= n; ++j) {
                const int d = at(i - 1, j - 1), u = at(i - 1, j), l = at(i, j - 1);
                double v = mm[d];
                char src = 0;
                if (gx[d] > v) { v = gx[d]; src = 1; }
                if (gy[d] > v) { v = gy[d]; src = 2; }
                mm[at(i, j)] = v + score(i - 1, j - 1);
                pm[at(i, j)] = src;

                v = mm[u] - (open + extend);
                src = 0;
                if (gx[u] - extend > v) { v = gx[u] - extend; src = 1; }
                if (gy[u] - (open + extend) > v) { v = gy[u] - (open + extend); src = 2; }
                gx[at(i, j)] = v;
                px[at(i, j)] = src;

                v = mm[l] - (open + extend);
                src = 0;
                if (gx[l] - (open + extend) > v) { v = gx[l] - (open + extend); src = 1; }
                if (gy[l] - extend > v) { v = gy[l] - extend; src = 2; }
                gy[at(i, j)] = v;
                py[at(i, j)] = src;
            }
        }

        int i = m, j = n;
        char layer = 0;
        best = mm[at(i, j)];
        if (gx[at(i, j)] > best) { best = gx[at(i, j)]; layer = 1; }
        if (gy[at(i, j)] > best) { best = gy[at(i, j)]; layer = 2; }

        ops.clear();
        ops.reserve(m + n);
        while (i > 0 || j > 0) {
            if (i == 0) {  // forced leading gap run in a
                ops.push_back(kGapA);
                --j;
            } else if (j == 0) {
                ops.push_back(kGapB);
                --i;
            } else if (layer == 0) {
                ops.push_back(kMatch);
                layer = pm[at(i, j)];
                --i;
                --j;
            } else if (layer == 1) {
                ops.push_back(kGapB);
                layer = px[at(i, j)];
                --i;
            } else {
                ops.push_back(kGapA);
                layer = py[at(i, j)];
                --j;
            }
        }
        std::reverse(ops.begin(), ops.end());
    }
};

}  // namespace

PairwiseAlignment pairwise_align(const EventSequence& a, const EventSequence& b,
                                 const ScoringMatrix& scoring) {
    if (a.events.empty() || b.events.empty())
        throw invalid_input("pairwise alignment needs non-empty sequences");
    const int n_events = scoring.size();
    for (int e : a.events)
        if (e < 0 || e >= n_events) throw invalid_input("event index outside scoring matrix");
    for (int e : b.events)
        if (e < 0 || e >= n_events) throw invalid_input("event index outside scoring matrix");

    AffineAligner aligner{static_cast<int>(a.events.size()), static_cast<int>(b.events.size()),
                          [&](int i, int j) { return scoring.s(a.events[i], b.events[j]); },
                          scoring.gap_open, scoring.gap_extend};
    aligner.run();

    PairwiseAlignment out;
    out.score = aligner.best;
    int i = 0, j = 0;
    for (Op op : aligner.ops) {
        if (op == kMatch) {
            out.aligned_a.push_back(a.events[i++]);
            out.aligned_b.push_back(b.events[j++]);
        } else if (op == kGapB) {
            out.aligned_a.push_back(a.events[i++]);
            out.aligned_b.push_back(kGap);
        } else {
            out.aligned_a.push_back(kGap);
            out.aligned_b.push_back(b.events[j++]);
        }
    }
    return out;
}

GuideTree build_guide_tree(const Matrix& pairwise_scores) {
    const int n = static_cast<int>(pairwise_scores.rows());
    if (pairwise_scores.cols() != n) throw invalid_input("score matrix must be square");
    if (n == 0) throw invalid_input("score matrix is empty");
    if ((pairwise_scores - pairwise_scores.transpose()).cwiseAbs().maxCoeff() > 1e-9)
        throw invalid_input("score matrix must be symmetric");

    GuideTree tree;
    tree.nodes.resize(n);
    for (int i = 0; i < n; ++i) tree.nodes[i].leaf = i;
    if (n == 1) {
        tree.root = 0;
        return tree;
    }

    const double max_score = pairwise_scores.maxCoeff();
    Matrix dist = (max_score - pairwise_scores.array()).matrix();
    std::vector<int> node_of(n);
    std::vector<int> active(n);
    for (int i = 0; i < n; ++i) node_of[i] = active[i] = i;

    // `dist` rows/cols are indexed by position in `active`
    while (active.size() > 1) {
        const int k = static_cast<int>(active.size());
        int bi = 0, bj = 1;
        for (int i = 0; i < k; ++i)
            for (int j = i + 1; j < k; ++j)
                if (dist(active[i], active[j]) < dist(active[bi], active[bj])) {
                    bi = i;
                    bj = j;
                }

        GuideTree::Node node;
        node.left = node_of[active[bi]];
        node.right = node_of[active[bj]];
        node.height = 0.5 * dist(active[bi], active[bj]);
        node.size = tree.nodes[node.left].size + tree.nodes[node.right].size;
        tree.nodes.push_back(node);
        const int node_id = static_cast<int>(tree.nodes.size()) - 1;

        const int si = tree.nodes[node.left].size;
        const int sj = tree.nodes[node.right].size;
        const int slot_i = active[bi], slot_j = active[bj];
        for (int t = 0; t < k; ++t) {
            if (t == bi || t == bj) continue;
            const double d =
                (si * dist(slot_i, active[t]) + sj * dist(slot_j, active[t])) / (si + sj);
            dist(slot_i, active[t]) = d;
            dist(active[t], slot_i) = d;
        }
        node_of[slot_i] = node_id;
        active.erase(active.begin() + bj);
    }
    tree.root = node_of[active[0]];
    return tree;
}

namespace {

// Rows of an intermediate alignment plus the original sequence index of each
// row, so the final MSA can be emitted in input order.
struct Block {
    std::vector<std::vector<int>> rows;
    std::vector<int> sources;

    int length() const { return rows.empty() ? 0 : static_cast<int>(rows[0].size()); }
};

Matrix column_event_fractions(const Block& block, int n_events) {
    Matrix f = Matrix::Zero(block.length(), n_events);
    for (const auto& row : block.rows)
        for (int t = 0; t < static_cast<int>(row.size()); ++t)
            if (row[t] != kGap) f(t, row[t]) += 1.0;
    f /= static_cast<double>(block.rows.size());
    return f;
}

Block merge_blocks(const Block& a, const Block& b, const ScoringMatrix& scoring) {
    const Matrix fa = column_event_fractions(a, scoring.size());
    const Matrix fb = column_event_fractions(b, scoring.size());

    AffineAligner aligner{a.length(), b.length(),
                          [&](int i, int j) {
                              return fa.row(i) * scoring.s * fb.row(j).transpose();
                          },
                          scoring.gap_open, scoring.gap_extend};
    aligner.run();

    Block out;
    out.sources = a.sources;
    out.sources.insert(out.sources.end(), b.sources.begin(), b.sources.end());
    out.rows.resize(a.rows.size() + b.rows.size());

    int i = 0, j = 0;
    for (Op op : aligner.ops) {
        const bool take_a = (op != kGapA);
        const bool take_b = (op != kGapB);
        for (std::size_t r = 0; r < a.rows.size(); ++r)
            out.rows[r].push_back(take_a ? a.rows[r][i] : kGap);
        for (std::size_t r = 0; r < b.rows.size(); ++r)
            out.rows[a.rows.size() + r].push_back(take_b ? b.rows[r][j] : kGap);
        if (take_a) ++i;
        if (take_b) ++j;
    }
    return out;
}

Block align_node(const GuideTree& tree, int node_id, const std::vector<EventSequence>& sequences,
                 const ScoringMatrix& scoring) {
    const GuideTree::Node& node = tree.nodes[node_id];
    if (node.leaf >= 0) {
        Block block;
        block.rows.push_back(sequences[node.leaf].events);
        block.sources.push_back(node.leaf);
        return block;
    }
    const Block left = align_node(tree, node.left, sequences, scoring);
    const Block right = align_node(tree, node.right, sequences, scoring);
    return merge_blocks(left, right, scoring);
}

}  // namespace

Msa progressive_msa(const std::vector<EventSequence>& sequences, const ScoringMatrix& scoring) {
    const int n = static_cast<int>(sequences.size());
    if (n < 2) throw invalid_input("progressive MSA needs at least 2 sequences");

    Matrix scores = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            scores(i, j) = pairwise_align(sequences[i], sequences[j], scoring).score;
            scores(j, i) = scores(i, j);
        }

    const GuideTree tree = build_guide_tree(scores);
    const Block block = align_node(tree, tree.root, sequences, scoring);

    Msa msa;
    msa.rows.resize(n);
    for (std::size_t r = 0; r < block.rows.size(); ++r) msa.rows[block.sources[r]] = block.rows[r];
    msa.score = sum_of_pairs_score(msa, scoring);
    return msa;
}

double sum_of_pairs_score(const Msa& msa, const ScoringMatrix& scoring, double gap_score) {
    double total = 0.0;
    const int L = msa.length();
    for (int i = 0; i < msa.n_rows(); ++i) {
        for (int j = i + 1; j < msa.n_rows(); ++j) {
            for (int t = 0; t < L; ++t) {
                const int x = msa.rows[i][t], y = msa.rows[j][t];
                total += (x == kGap || y == kGap) ? gap_score : scoring.s(x, y);
            }
        }
    }
    return total;
}

}  // namespace alignrr
