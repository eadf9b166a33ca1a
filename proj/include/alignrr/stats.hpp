#pragma once

#include <vector>

namespace alignrr {

enum class TestSide { two_sided, less, greater };

struct MannWhitneyResult {
    double u = 0.0;       // U statistic of the first sample
    double p_value = 1.0;
    bool exact = false;   // exact enumeration vs normal approximation
};

// Mann-Whitney U (Wilcoxon rank-sum) with midrank tie handling. Uses the
// exact null distribution when n*m <= 400 and there are no ties, otherwise
// the tie-corrected normal approximation with continuity correction.
MannWhitneyResult mann_whitney_u(const std::vector<double>& sample_a,
                                 const std::vector<double>& sample_b,
                                 TestSide side = TestSide::two_sided);

// Standard normal survival function.
double normal_sf(double z);

}  // namespace alignrr
