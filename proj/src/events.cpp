#include "alignrr/events.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include "alignrr/errors.hpp"

namespace alignrr {

std::string events_to_string(const std::vector<int>& events) {
    std::string out;
    out.reserve(events.size());
    for (int e : events) out.push_back(event_letter(e));
    return out;
}

std::vector<int> string_to_events(const std::string& letters) {
    std::vector<int> out;
    out.reserve(letters.size());
    for (char c : letters) out.push_back(letter_event(c));
    return out;
}

EventAlphabet make_alphabet(int n_events) {
    if (n_events < 1 || n_events > 26)
        throw invalid_input("alphabet size must be in [1, 26], got " + std::to_string(n_events));
    return EventAlphabet{n_events};
}

Matrix build_successor_representation(const std::vector<std::pair<int, int>>& transitions,
                                      int n_states, double learning_rate, double discount,
                                      int sweeps) {
    if (transitions.empty()) throw invalid_input("successor representation needs transitions");
    if (learning_rate <= 0.0 || learning_rate > 1.0)
        throw invalid_input("learning rate must be in (0, 1]");
    if (discount < 0.0 || discount >= 1.0) throw invalid_input("discount must be in [0, 1)");
    if (n_states < 1) throw invalid_input("state count must be positive");
    for (const auto& [s, s2] : transitions) {
        if (s < 0 || s >= n_states || s2 < 0 || s2 >= n_states)
            throw invalid_input("transition state index out of range");
    }

    Matrix m = Matrix::Zero(n_states, n_states);
    Eigen::RowVectorXd target(n_states);
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        for (const auto& [s, s2] : transitions) {
            target = discount * m.row(s2);
            target(s) += 1.0;
            m.row(s) += learning_rate * (target - m.row(s));
        }
    }
    return m;
}

Matrix successor_similarity(const Matrix& m) {
    if (!m.allFinite()) throw invalid_input("successor matrix must be finite");
    const int n = static_cast<int>(m.rows());
    Matrix sim = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double d = -(m.row(i) - m.row(j)).norm();
            sim(i, j) = d;
            sim(j, i) = d;
        }
    }
    return sim;
}

namespace {

double median_off_diagonal(const Matrix& s) {
    const int n = static_cast<int>(s.rows());
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(n) * (n - 1));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) values.push_back(s(i, j));
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    if (values.size() % 2 == 1) return values[mid];
    return 0.5 * (values[mid - 1] + values[mid]);
}

// Deterministic hash-based value in [-0.5, 0.5); used to break exact message
// symmetries (duplicate points) without a runtime RNG.
double index_jitter(std::uint64_t index) {
    std::uint64_t z = index + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return static_cast<double>(z) * 0x1p-64 - 0.5;
}

}  // namespace

ClusterAssignment affinity_propagation(const Matrix& similarity, double damping,
                                       int max_iterations, std::optional<double> preference) {
    if (similarity.rows() != similarity.cols())
        throw invalid_input("similarity matrix must be square");
    if (damping < 0.5 || damping >= 1.0) throw invalid_input("damping must be in [0.5, 1)");
    const int n = static_cast<int>(similarity.rows());
    if (n == 0) throw invalid_input("similarity matrix is empty");
    if (n == 1) return ClusterAssignment{{0}, {0}, 1};

    Matrix s = similarity;
    const double pref = preference ? *preference : median_off_diagonal(similarity);
    s.diagonal().setConstant(pref);

    // Spread-scaled jitter: zero when all off-diagonal similarities are equal,
    // so exactly degenerate instances keep their exact fixed point.
    double off_min = std::numeric_limits<double>::infinity(), off_max = -off_min;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) {
                off_min = std::min(off_min, similarity(i, j));
                off_max = std::max(off_max, similarity(i, j));
            }
    const double jitter_scale = 1e-12 * (off_max - off_min);
    if (jitter_scale > 0.0)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                s(i, j) += jitter_scale *
                           index_jitter(static_cast<std::uint64_t>(i) * n + j);

    Matrix r = Matrix::Zero(n, n);
    Matrix a = Matrix::Zero(n, n);
    Matrix r_new(n, n), a_new(n, n);

    std::vector<char> exemplar(n, 0), exemplar_prev(n, 0);
    int stable = 0;
    constexpr int kStableWindow = 20;

    for (int it = 0; it < max_iterations; ++it) {
        // responsibilities
        for (int i = 0; i < n; ++i) {
            double max1 = -std::numeric_limits<double>::infinity();
            double max2 = max1;
            int arg1 = -1;
            for (int k = 0; k < n; ++k) {
                const double v = a(i, k) + s(i, k);
                if (v > max1) {
                    max2 = max1;
                    max1 = v;
                    arg1 = k;
                } else if (v > max2) {
                    max2 = v;
                }
            }
            for (int k = 0; k < n; ++k)
                r_new(i, k) = s(i, k) - (k == arg1 ? max2 : max1);
        }
        r = damping * r + (1.0 - damping) * r_new;

        // availabilities
        for (int k = 0; k < n; ++k) {
            double positive_sum = 0.0;
            for (int i = 0; i < n; ++i)
                if (i != k) positive_sum += std::max(0.0, r(i, k));
            for (int i = 0; i < n; ++i) {
                if (i == k) {
                    a_new(k, k) = positive_sum;
                } else {
                    const double rest = positive_sum - std::max(0.0, r(i, k));
                    a_new(i, k) = std::min(0.0, r(k, k) + rest);
                }
            }
        }
        a = damping * a + (1.0 - damping) * a_new;

        for (int k = 0; k < n; ++k) exemplar[k] = (r(k, k) + a(k, k) >= 0.0) ? 1 : 0;
        if (exemplar == exemplar_prev) {
            if (++stable >= kStableWindow) break;
        } else {
            stable = 0;
            exemplar_prev = exemplar;
        }
    }

    std::vector<int> centers;
    for (int k = 0; k < n; ++k)
        if (exemplar[k]) centers.push_back(k);
    if (centers.empty()) {
        int best = 0;
        for (int k = 1; k < n; ++k)
            if (r(k, k) + a(k, k) > r(best, best) + a(best, best)) best = k;
        centers.push_back(best);
    }

    std::vector<int> labels(n, 0);
    for (int i = 0; i < n; ++i) {
        int best = -1;
        double best_sim = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < centers.size(); ++c) {
            if (centers[c] == i) {
                best = static_cast<int>(c);
                break;
            }
            if (similarity(i, centers[c]) > best_sim) {
                best_sim = similarity(i, centers[c]);
                best = static_cast<int>(c);
            }
        }
        labels[i] = best;
    }
    const int n_clusters = static_cast<int>(centers.size());
    return ClusterAssignment{std::move(labels), std::move(centers), n_clusters};
}

ClusterAssignment merge_clusters(const ClusterAssignment& assignment, const Matrix& embedding,
                                 int max_clusters) {
    if (max_clusters < 1) throw invalid_input("max clusters must be >= 1");

    std::vector<std::vector<int>> members(assignment.n_clusters);
    for (std::size_t i = 0; i < assignment.labels.size(); ++i)
        members[assignment.labels[i]].push_back(static_cast<int>(i));
    std::vector<int> centers = assignment.centers;

    while (static_cast<int>(members.size()) > max_clusters) {
        int best_i = -1, best_j = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < members.size(); ++i) {
            for (std::size_t j = i + 1; j < members.size(); ++j) {
                const double d = (embedding.row(centers[i]) - embedding.row(centers[j])).norm();
                if (d < best_d) {
                    best_d = d;
                    best_i = static_cast<int>(i);
                    best_j = static_cast<int>(j);
                }
            }
        }
        auto& merged = members[best_i];
        merged.insert(merged.end(), members[best_j].begin(), members[best_j].end());
        std::sort(merged.begin(), merged.end());

        Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(embedding.cols());
        for (int p : merged) mean += embedding.row(p);
        mean /= static_cast<double>(merged.size());
        int center = merged.front();
        double center_d = (embedding.row(center) - mean).norm();
        for (int p : merged) {
            const double d = (embedding.row(p) - mean).norm();
            if (d < center_d) {
                center_d = d;
                center = p;
            }
        }
        centers[best_i] = center;
        members.erase(members.begin() + best_j);
        centers.erase(centers.begin() + best_j);
    }

    // dense relabel ordered by center index
    std::vector<int> order(members.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int x, int y) { return centers[x] < centers[y]; });

    ClusterAssignment out;
    out.n_clusters = static_cast<int>(members.size());
    out.labels.assign(assignment.labels.size(), -1);
    out.centers.resize(members.size());
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        out.centers[rank] = centers[order[rank]];
        for (int p : members[order[rank]]) out.labels[p] = static_cast<int>(rank);
    }
    return out;
}

EventSequence map_to_events(const Trajectory& trajectory, const ClusterAssignment& assignment) {
    if (trajectory.steps.empty()) throw invalid_input("trajectory is empty");
    EventSequence seq;
    seq.source_return = trajectory.terminal_return;
    int last = -1;
    for (const Step& step : trajectory.steps) {
        if (step.state < 0 || step.state >= static_cast<int>(assignment.labels.size()))
            throw invalid_input("state " + std::to_string(step.state) + " has no cluster label");
        const int e = assignment.labels[step.state];
        if (e != last) {
            seq.events.push_back(e);
            last = e;
        }
    }
    return seq;
}

EventBackground event_frequencies(const std::vector<EventSequence>& sequences,
                                  int alphabet_size) {
    if (alphabet_size < 1) throw invalid_input("alphabet size must be positive");
    bool any = false;
    for (const auto& seq : sequences) any = any || !seq.events.empty();
    if (!any) throw invalid_input("event frequencies need at least one non-empty sequence");

    Vector counts = Vector::Zero(alphabet_size);
    for (const auto& seq : sequences) {
        for (int e : seq.events) {
            if (e < 0 || e >= alphabet_size) throw invalid_input("event index out of range");
            counts(e) += 1.0;
        }
    }
    if ((counts.array() == 0.0).any()) counts.array() += 1.0;
    return counts / counts.sum();
}

}  // namespace alignrr
