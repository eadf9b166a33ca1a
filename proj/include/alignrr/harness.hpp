#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "alignrr/envs.hpp"
#include "alignrr/learning.hpp"
#include "alignrr/redistribution.hpp"
#include "alignrr/stats.hpp"

namespace alignrr {

struct ExperimentConfig {
    std::string env_name = "fourrooms";
    double slip = 0.01;
    std::vector<int> demo_counts = {2, 5, 10, 50, 100};
    int seeds = 20;
    std::uint64_t master_seed = 1;
    std::vector<Method> methods = {Method::align_rudder, Method::bc_q, Method::sqil};

    // events
    double sr_learning_rate = 0.1;
    double sr_discount = 0.99;
    int sr_sweeps = 10;
    int sr_random_episodes = 50;
    double ap_damping = 0.5;
    int ap_max_iterations = 1000;
    std::optional<double> ap_preference;  // unset = median
    int max_clusters = 15;
    // "successor" rows, raw state "features", or "auto" (features for the
    // key-chest, successor rows elsewhere)
    std::string event_similarity = "auto";

    // scoring
    std::string scoring_scheme = "karlin";  // or "simple"
    double alpha = -1.0;
    double epsilon_scoring = 0.0;
    double off_diagonal = -1.0;
    double pseudocount_factor = 0.01;  // times row count, per event

    // demos & learning
    double demo_exploration = 0.2;
    double epsilon_greedy_rate = 0.2;
    double lr_align_rudder = 0.1;
    double lr_baseline = 0.01;
    double bc_noise_mean = 0.0;
    double bc_noise_std = 0.01;
    double bc_margin = 0.1;
    double run_smear = 0.5;
    bool demo_replay = true;
    int budget = 5000;
    int eval_every = 10;
    int eval_rollouts = 10;
    double threshold_fraction = 0.8;  // of mean demo return
    bool stop_on_threshold = true;

    std::optional<double> subgoal_threshold;  // unset = mean positive reward
    std::string output_dir = "out";
    bool write_artifacts = true;
    int workers = 0;  // 0 = hardware concurrency

    static ExperimentConfig from_map(const std::map<std::string, std::string>& kv);
};

struct ResultRow {
    std::string method;
    int demo_count = 0;
    int seed = 0;
    int episodes_to_threshold = 0;
    bool censored = false;
    std::string error;  // empty on success
};

struct ResultTable {
    std::vector<ResultRow> rows;
    int budget = 0;
    int eval_every = 0;
    std::vector<int> demo_counts;
};

// Everything the five pipeline steps produce for one demo set.
struct PipelineArtifacts {
    std::vector<Trajectory> demos;
    ClusterAssignment assignment;
    EventAlphabet alphabet;
    std::vector<EventSequence> demo_sequences;
    EventBackground background;
    ScoringMatrix scoring;
    Msa msa;
    Pssm pssm;
    RedistributionModel model;
};

std::unique_ptr<Env> make_env(const std::string& name, double slip);

// Demonstrations for one (demo_count, seed) cell; identical across methods.
std::vector<Trajectory> make_demos(Env& env, const ExperimentConfig& config, int demo_count,
                                   int seed);

// Steps (I)-(V): cluster events, build the scoring system, align, profile,
// fit the redistribution.
PipelineArtifacts build_pipeline(Env& env, const std::vector<Trajectory>& demos,
                                 const ExperimentConfig& config);

ResultTable run_pipeline(const ExperimentConfig& config);

// Smallest recorded episode whose evaluation reaches the threshold;
// budget + 1 when the curve never crosses (censored).
int episodes_to_threshold(const LearningCurve& curve, double threshold, int budget);

// Fraction of key steps whose per-step redistributed reward exceeds the
// episode's mean redistributed reward (correction excluded).
double key_event_detection_rate(const StepRedistributor& redistributor,
                                const std::vector<Trajectory>& episodes,
                                const std::vector<std::vector<int>>& key_steps);

// Deterministic CSV export: raw rows, summary, plot-ready long format and
// Mann-Whitney p-values against the first method.
void export_results(const ResultTable& table, const std::string& directory);

std::string results_raw_csv(const ResultTable& table);
std::string results_summary_csv(const ResultTable& table);
std::string results_long_csv(const ResultTable& table);
std::string results_pvalues_csv(const ResultTable& table);

}  // namespace alignrr
