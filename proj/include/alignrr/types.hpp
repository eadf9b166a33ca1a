#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace alignrr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using MatrixI = Eigen::MatrixXi;

// Gap marker used in alignments (event indices are always >= 0).
inline constexpr int kGap = -1;

// One environment interaction. Rewards are episodic: nonzero only at the
// final step of a trajectory.
struct Step {
    int state = 0;
    int action = 0;
    double reward = 0.0;
};

struct Trajectory {
    std::vector<Step> steps;
    double terminal_return = 0.0;
    int final_state = 0;  // state observed after the last step
};

// A demonstration or episode mapped to discrete event indices.
struct EventSequence {
    std::vector<int> events;
    double source_return = 0.0;

    int length() const { return static_cast<int>(events.size()); }
};

// Per-event background frequencies p_i (sum to 1, all positive).
using EventBackground = Vector;

inline char event_letter(int event) { return static_cast<char>('A' + event); }

inline int letter_event(char letter) { return letter - 'A'; }

std::string events_to_string(const std::vector<int>& events);
std::vector<int> string_to_events(const std::string& letters);

}  // namespace alignrr
