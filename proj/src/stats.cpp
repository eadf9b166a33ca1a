#include "alignrr/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "alignrr/errors.hpp"

namespace alignrr {

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

namespace {

// Null distribution counts of the U statistic for sample sizes (n, m):
// counts[u] = number of rank interleavings with exactly u exceedances.
std::vector<double> exact_u_counts(int n, int m) {
    const int max_u = n * m;
    // f[i][u] = arrangements of i a-ranks among j b-ranks with U = u. The
    // topmost rank is either an a (above j b's, adding j to U) or a b.
    std::vector<std::vector<double>> f(n + 1, std::vector<double>(max_u + 1, 0.0));
    for (int i = 0; i <= n; ++i) f[i][0] = 1.0;  // j = 0
    for (int j = 1; j <= m; ++j) {
        std::vector<std::vector<double>> g(n + 1, std::vector<double>(max_u + 1, 0.0));
        g[0][0] = 1.0;
        for (int i = 1; i <= n; ++i)
            for (int u = 0; u <= max_u; ++u)
                g[i][u] = f[i][u] + (u >= j ? g[i - 1][u - j] : 0.0);
        f.swap(g);
    }
    return f[n];
}

}  // namespace

MannWhitneyResult mann_whitney_u(const std::vector<double>& sample_a,
                                 const std::vector<double>& sample_b, TestSide side) {
    if (sample_a.empty() || sample_b.empty())
        throw invalid_input("Mann-Whitney needs two non-empty samples");
    const int n = static_cast<int>(sample_a.size());
    const int m = static_cast<int>(sample_b.size());
    const int total = n + m;

    std::vector<std::pair<double, int>> pooled;
    pooled.reserve(total);
    for (double v : sample_a) pooled.emplace_back(v, 0);
    for (double v : sample_b) pooled.emplace_back(v, 1);
    std::sort(pooled.begin(), pooled.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });

    double rank_sum_a = 0.0;
    double tie_sum = 0.0;
    bool has_ties = false;
    int i = 0;
    while (i < total) {
        int j = i;
        while (j < total && pooled[j].first == pooled[i].first) ++j;
        const double midrank = 0.5 * (i + j + 1);  // ranks are 1-based
        const int run = j - i;
        if (run > 1) {
            has_ties = true;
            tie_sum += static_cast<double>(run) * run * run - run;
        }
        for (int k = i; k < j; ++k)
            if (pooled[k].second == 0) rank_sum_a += midrank;
        i = j;
    }

    const double u_a = rank_sum_a - 0.5 * n * (n + 1);
    const double u_b = static_cast<double>(n) * m - u_a;

    MannWhitneyResult result;
    result.u = u_a;

    if (!has_ties && n * m <= 400) {
        result.exact = true;
        const std::vector<double> counts = exact_u_counts(n, m);
        const double denom = std::accumulate(counts.begin(), counts.end(), 0.0);
        const auto cdf = [&](double u) {
            double c = 0.0;
            for (int k = 0; k <= static_cast<int>(std::floor(u + 1e-9)) &&
                            k < static_cast<int>(counts.size()); ++k)
                c += counts[k];
            return c / denom;
        };
        switch (side) {
            case TestSide::two_sided:
                result.p_value = std::min(1.0, 2.0 * cdf(std::min(u_a, u_b)));
                break;
            case TestSide::less:
                result.p_value = cdf(u_a);
                break;
            case TestSide::greater:
                result.p_value = cdf(u_b);
                break;
        }
        return result;
    }

    const double mu = 0.5 * n * m;
    const double tie_correction = tie_sum / (static_cast<double>(total) * (total - 1));
    const double variance = (static_cast<double>(n) * m / 12.0) * (total + 1 - tie_correction);
    const double sd = std::sqrt(std::max(variance, 0.0));
    if (sd == 0.0) {
        result.p_value = 1.0;
        return result;
    }
    switch (side) {
        case TestSide::two_sided: {
            const double z = std::max(std::abs(u_a - mu) - 0.5, 0.0) / sd;
            result.p_value = std::min(1.0, 2.0 * normal_sf(z));
            break;
        }
        case TestSide::less:
            result.p_value = 1.0 - normal_sf((u_a - mu + 0.5) / sd);
            break;
        case TestSide::greater:
            result.p_value = normal_sf((u_a - mu - 0.5) / sd);
            break;
    }
    return result;
}

}  // namespace alignrr
