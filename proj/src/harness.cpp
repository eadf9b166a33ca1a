#include "alignrr/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <sstream>
#include <thread>

#include "alignrr/errors.hpp"
#include "alignrr/io.hpp"

namespace alignrr {

namespace {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
    // splitmix64 over the packed inputs
    std::uint64_t x = a;
    for (std::uint64_t piece : {b, c, d}) {
        x ^= piece + 0x9e3779b97f4a7c15ULL + (x << 6) + (x >> 2);
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        x ^= x >> 31;
    }
    return x;
}

std::string method_name(Method method) {
    switch (method) {
        case Method::align_rudder: return "align-rudder";
        case Method::bc_q: return "bc-q";
        case Method::sqil: return "sqil";
    }
    return "unknown";
}

Method method_from_name(const std::string& name) {
    if (name == "align-rudder") return Method::align_rudder;
    if (name == "bc-q") return Method::bc_q;
    if (name == "sqil") return Method::sqil;
    throw invalid_input("unknown method '" + name + "'");
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(value);
    while (std::getline(in, item, ',')) {
        while (!item.empty() && item.front() == ' ') item.erase(item.begin());
        while (!item.empty() && item.back() == ' ') item.pop_back();
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

// State projection used for clustering: rooms states collapse to their cell,
// other environments cluster raw states.
struct StateProjection {
    std::vector<int> unit_of;
    int n_units = 0;

    static StateProjection for_env(const Env& env) {
        StateProjection proj;
        proj.unit_of.resize(env.n_states());
        if (const auto* rooms = dynamic_cast<const RoomsEnv*>(&env)) {
            proj.n_units = rooms->layout().n_cells();
            for (int s = 0; s < env.n_states(); ++s) proj.unit_of[s] = rooms->cell_of(s);
        } else {
            proj.n_units = env.n_states();
            for (int s = 0; s < env.n_states(); ++s) proj.unit_of[s] = s;
        }
        return proj;
    }
};

// Feature embedding per clustering unit. The key-chest flags are scaled past
// the track length so clusters never straddle a key pickup or chest opening;
// state changes there are exactly the important events.
Matrix unit_features(const Env& env, const StateProjection& projection) {
    if (const auto* kc = dynamic_cast<const KeyChestEnv*>(&env)) {
        Matrix f(env.n_states(), 3);
        const double scale = 2.0 * env.n_states();
        for (int s = 0; s < env.n_states(); ++s) {
            f(s, 0) = kc->position_of(s);
            f(s, 1) = kc->has_key(s) ? scale : 0.0;
            f(s, 2) = kc->succeeded(s) ? 2.0 * scale : 0.0;
        }
        return f;
    }
    if (const auto* rooms = dynamic_cast<const RoomsEnv*>(&env)) {
        Matrix f(projection.n_units, 2);
        for (int cell = 0; cell < projection.n_units; ++cell) {
            const int pos = rooms->layout().cell_position[cell];
            f(cell, 0) = pos % rooms->layout().width;
            f(cell, 1) = pos / rooms->layout().width;
        }
        return f;
    }
    return Matrix::Identity(projection.n_units, projection.n_units);
}

}  // namespace

ExperimentConfig ExperimentConfig::from_map(const std::map<std::string, std::string>& kv) {
    ExperimentConfig config;
    const auto get = [&](const char* key) -> const std::string* {
        const auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };
    if (const auto* v = get("env")) config.env_name = *v;
    if (const auto* v = get("slip")) config.slip = std::stod(*v);
    if (const auto* v = get("demo_counts")) {
        config.demo_counts.clear();
        for (const auto& item : split_list(*v)) config.demo_counts.push_back(std::stoi(item));
    }
    if (const auto* v = get("seeds")) config.seeds = std::stoi(*v);
    if (const auto* v = get("master_seed")) config.master_seed = std::stoull(*v);
    if (const auto* v = get("methods")) {
        config.methods.clear();
        for (const auto& item : split_list(*v)) config.methods.push_back(method_from_name(item));
    }
    if (const auto* v = get("sr_learning_rate")) config.sr_learning_rate = std::stod(*v);
    if (const auto* v = get("sr_discount")) config.sr_discount = std::stod(*v);
    if (const auto* v = get("sr_sweeps")) config.sr_sweeps = std::stoi(*v);
    if (const auto* v = get("sr_random_episodes")) config.sr_random_episodes = std::stoi(*v);
    if (const auto* v = get("ap_damping")) config.ap_damping = std::stod(*v);
    if (const auto* v = get("ap_max_iterations")) config.ap_max_iterations = std::stoi(*v);
    if (const auto* v = get("ap_preference"))
        if (*v != "median") config.ap_preference = std::stod(*v);
    if (const auto* v = get("max_clusters")) config.max_clusters = std::stoi(*v);
    if (const auto* v = get("event_similarity")) config.event_similarity = *v;
    if (const auto* v = get("scoring")) config.scoring_scheme = *v;
    if (const auto* v = get("alpha")) config.alpha = std::stod(*v);
    if (const auto* v = get("epsilon_scoring")) config.epsilon_scoring = std::stod(*v);
    if (const auto* v = get("off_diagonal")) config.off_diagonal = std::stod(*v);
    if (const auto* v = get("pseudocount_factor")) config.pseudocount_factor = std::stod(*v);
    if (const auto* v = get("demo_exploration")) config.demo_exploration = std::stod(*v);
    if (const auto* v = get("epsilon_greedy")) config.epsilon_greedy_rate = std::stod(*v);
    if (const auto* v = get("lr_align_rudder")) config.lr_align_rudder = std::stod(*v);
    if (const auto* v = get("lr_baseline")) config.lr_baseline = std::stod(*v);
    if (const auto* v = get("bc_noise_mean")) config.bc_noise_mean = std::stod(*v);
    if (const auto* v = get("bc_noise_std")) config.bc_noise_std = std::stod(*v);
    if (const auto* v = get("bc_margin")) config.bc_margin = std::stod(*v);
    if (const auto* v = get("run_smear")) config.run_smear = std::stod(*v);
    if (const auto* v = get("demo_replay")) config.demo_replay = (*v == "true" || *v == "1");
    if (const auto* v = get("budget")) config.budget = std::stoi(*v);
    if (const auto* v = get("eval_every")) config.eval_every = std::stoi(*v);
    if (const auto* v = get("eval_rollouts")) config.eval_rollouts = std::stoi(*v);
    if (const auto* v = get("threshold_fraction")) config.threshold_fraction = std::stod(*v);
    if (const auto* v = get("stop_on_threshold")) config.stop_on_threshold = (*v == "true" || *v == "1");
    if (const auto* v = get("subgoal_threshold")) config.subgoal_threshold = std::stod(*v);
    if (const auto* v = get("out")) config.output_dir = *v;
    if (const auto* v = get("write_artifacts")) config.write_artifacts = (*v == "true" || *v == "1");
    if (const auto* v = get("workers")) config.workers = std::stoi(*v);
    if (config.seeds < 1) throw invalid_input("seed count must be >= 1");
    if (config.max_clusters < 1 || config.max_clusters > 26)
        throw invalid_input("max_clusters must be in [1, 26]");
    return config;
}

std::unique_ptr<Env> make_env(const std::string& name, double slip) {
    if (name == "fourrooms") return std::make_unique<RoomsEnv>(RoomsEnv::four_rooms(slip));
    if (name == "eightrooms") return std::make_unique<RoomsEnv>(RoomsEnv::eight_rooms(slip));
    if (name == "keychest") return std::make_unique<KeyChestEnv>();
    if (name.size() > 4 && name.substr(name.size() - 4) == ".map")
        return std::make_unique<RoomsEnv>(GridLayout::parse(read_file(name)), slip);
    throw invalid_input("unknown environment '" + name + "'");
}

std::vector<Trajectory> make_demos(Env& env, const ExperimentConfig& config, int demo_count,
                                   int seed) {
    const ValueIterationResult oracle = value_iteration(env.model());
    Rng rng(mix_seed(config.master_seed, 0xDE305Dull, demo_count, seed));
    return generate_demonstrations(env, oracle.policy, config.demo_exploration, demo_count, rng);
}

PipelineArtifacts build_pipeline(Env& env, const std::vector<Trajectory>& demos,
                                 const ExperimentConfig& config) {
    PipelineArtifacts artifacts;
    artifacts.demos = demos;
    const StateProjection projection = StateProjection::for_env(env);

    // (I) events: successor representation over demo + random transitions,
    // affinity propagation, merge down to the cluster budget.
    std::vector<std::pair<int, int>> transitions;
    for (const auto& demo : demos) {
        for (std::size_t t = 0; t + 1 < demo.steps.size(); ++t)
            transitions.emplace_back(projection.unit_of[demo.steps[t].state],
                                     projection.unit_of[demo.steps[t + 1].state]);
        if (!demo.steps.empty())
            transitions.emplace_back(projection.unit_of[demo.steps.back().state],
                                     projection.unit_of[demo.final_state]);
    }
    Rng rng(mix_seed(config.master_seed, 0x5EEDull, demos.size(), config.sr_random_episodes));
    std::uniform_int_distribution<int> random_action(0, env.n_actions() - 1);
    for (int episode = 0; episode < config.sr_random_episodes; ++episode) {
        int state = env.reset(rng);
        bool done = false;
        while (!done) {
            const StepResult result = env.step(random_action(rng), rng);
            transitions.emplace_back(projection.unit_of[state],
                                     projection.unit_of[result.state]);
            state = result.state;
            done = result.done;
        }
    }

    const bool use_features =
        config.event_similarity == "features" ||
        (config.event_similarity == "auto" && dynamic_cast<const KeyChestEnv*>(&env));
    Matrix embedding;
    if (use_features) {
        embedding = unit_features(env, projection);
    } else {
        embedding = build_successor_representation(transitions, projection.n_units,
                                                   config.sr_learning_rate,
                                                   config.sr_discount, config.sr_sweeps);
    }
    const Matrix similarity = successor_similarity(embedding);
    ClusterAssignment clusters = affinity_propagation(similarity, config.ap_damping,
                                                      config.ap_max_iterations,
                                                      config.ap_preference);
    clusters = merge_clusters(clusters, embedding, config.max_clusters);
    artifacts.assignment = clusters;
    artifacts.alphabet = make_alphabet(clusters.n_clusters);

    // demo trajectories projected onto cluster units, then to event strings
    for (const auto& demo : demos) {
        Trajectory projected = demo;
        for (auto& step : projected.steps) step.state = projection.unit_of[step.state];
        artifacts.demo_sequences.push_back(map_to_events(projected, clusters));
    }

    // (II) scoring system
    artifacts.background = event_frequencies(artifacts.demo_sequences, clusters.n_clusters);
    if (config.scoring_scheme == "simple")
        artifacts.scoring = build_scoring_matrix_simple(artifacts.background, config.alpha);
    else if (config.scoring_scheme == "karlin")
        artifacts.scoring = build_scoring_matrix_karlin(artifacts.background,
                                                        config.epsilon_scoring,
                                                        config.off_diagonal);
    else
        throw invalid_input("unknown scoring scheme '" + config.scoring_scheme + "'");

    // (III) multiple sequence alignment
    if (artifacts.demo_sequences.size() >= 2) {
        artifacts.msa = progressive_msa(artifacts.demo_sequences, artifacts.scoring);
    } else {
        artifacts.msa.rows.push_back(artifacts.demo_sequences[0].events);
        artifacts.msa.score = 0.0;
    }

    // (IV) profile and PSSM
    const double pseudocount = config.pseudocount_factor * artifacts.msa.n_rows();
    const ProfileModel profile =
        column_frequencies(artifacts.msa, clusters.n_clusters, pseudocount);
    artifacts.pssm = build_pssm(profile, artifacts.background);

    // (V) redistribution
    artifacts.model = fit_redistribution(artifacts.demo_sequences, artifacts.pssm);
    return artifacts;
}

// Expands a unit-level assignment so that composite env states index it
// directly.
static ClusterAssignment expand_assignment(const ClusterAssignment& clusters,
                                           const StateProjection& projection) {
    ClusterAssignment expanded;
    expanded.n_clusters = clusters.n_clusters;
    expanded.centers = clusters.centers;
    expanded.labels.resize(projection.unit_of.size());
    for (std::size_t s = 0; s < projection.unit_of.size(); ++s)
        expanded.labels[s] = clusters.labels[projection.unit_of[s]];
    return expanded;
}

int episodes_to_threshold(const LearningCurve& curve, double threshold, int budget) {
    if (curve.points.empty()) throw invalid_input("learning curve is empty");
    for (const auto& [episode, value] : curve.points)
        if (value >= threshold) return episode;
    return budget + 1;
}

double key_event_detection_rate(const StepRedistributor& redistributor,
                                const std::vector<Trajectory>& episodes,
                                const std::vector<std::vector<int>>& key_steps) {
    if (episodes.size() != key_steps.size())
        throw invalid_input("episodes and key-step sets must correspond");
    long total = 0, detected = 0;
    for (std::size_t i = 0; i < episodes.size(); ++i) {
        if (key_steps[i].empty()) continue;
        const Vector rewards = redistributor.step_rewards(
            episodes[i], episodes[i].terminal_return, /*include_correction=*/false);
        const int n = static_cast<int>(rewards.size());
        const double mean = rewards.sum() / n;
        for (int t : key_steps[i]) {
            if (t < 0 || t >= n) throw invalid_input("key step index out of range");
            ++total;
            if (rewards(t) > mean) ++detected;
        }
    }
    return total == 0 ? 0.0 : static_cast<double>(detected) / static_cast<double>(total);
}

namespace {

struct Cell {
    Method method;
    int demo_count;
    int seed;
};

ResultRow run_cell(const ExperimentConfig& config, const Cell& cell,
                   const TabularPolicy& oracle_policy) {
    ResultRow row;
    row.method = method_name(cell.method);
    row.demo_count = cell.demo_count;
    row.seed = cell.seed;
    try {
        const auto env = make_env(config.env_name, config.slip);
        Rng demo_rng(mix_seed(config.master_seed, 0xDE305Dull, cell.demo_count, cell.seed));
        const std::vector<Trajectory> demos = generate_demonstrations(
            *env, oracle_policy, config.demo_exploration, cell.demo_count, demo_rng);

        double mean_demo_return = 0.0;
        for (const auto& demo : demos) mean_demo_return += demo.terminal_return;
        mean_demo_return /= static_cast<double>(demos.size());
        const double threshold = config.threshold_fraction * mean_demo_return;

        LearnerConfig learner;
        learner.method = cell.method;
        learner.epsilon = config.epsilon_greedy_rate;
        learner.bc_noise_mean = config.bc_noise_mean;
        learner.bc_noise_std = config.bc_noise_std;
        learner.learning_rate =
            cell.method == Method::align_rudder ? config.lr_align_rudder : config.lr_baseline;
        learner.demo_replay = config.demo_replay;
        learner.bc_margin = config.bc_margin;

        std::optional<StepRedistributor> redistributor;
        std::optional<PipelineArtifacts> artifacts;
        if (cell.method == Method::align_rudder) {
            artifacts = build_pipeline(*env, demos, config);
            redistributor = StepRedistributor{
                expand_assignment(artifacts->assignment, StateProjection::for_env(*env)),
                artifacts->model, config.run_smear};
        }

        Rng train_rng(mix_seed(config.master_seed, static_cast<std::uint64_t>(cell.method) + 1,
                               cell.demo_count, cell.seed));
        const LearningCurve curve =
            train(*env, learner, redistributor ? &*redistributor : nullptr, demos,
                  config.budget, config.eval_every, config.eval_rollouts, train_rng,
                  config.stop_on_threshold ? std::optional<double>(threshold) : std::nullopt);

        row.episodes_to_threshold = episodes_to_threshold(curve, threshold, config.budget);
        row.censored = row.episodes_to_threshold > config.budget;

        if (config.write_artifacts) {
            namespace fs = std::filesystem;
            const fs::path dir = fs::path(config.output_dir) / "artifacts";
            fs::create_directories(dir);
            const std::string tag = "_d" + std::to_string(cell.demo_count) + "_s" +
                                    std::to_string(cell.seed);
            write_file((dir / ("curve_" + row.method + tag + ".csv")).string(),
                       curve_to_csv(curve.points));
            if (artifacts) {
                write_file((dir / ("events" + tag + ".fasta")).string(),
                           sequences_to_fasta(artifacts->demo_sequences));
                write_file((dir / ("msa" + tag + ".fasta")).string(),
                           msa_to_fasta(artifacts->msa));
                write_file((dir / ("pssm" + tag + ".csv")).string(),
                           pssm_to_csv(artifacts->pssm));
                write_file((dir / ("scoring" + tag + ".csv")).string(),
                           scoring_to_csv(artifacts->scoring));
                write_file((dir / ("clusters" + tag + ".csv")).string(),
                           clusters_to_csv(artifacts->assignment));
            }
        }
    } catch (const std::exception& e) {
        row.error = e.what();
        row.episodes_to_threshold = config.budget + 1;
        row.censored = true;
    }
    return row;
}

}  // namespace

ResultTable run_pipeline(const ExperimentConfig& config) {
    ResultTable table;
    table.budget = config.budget;
    table.eval_every = config.eval_every;
    table.demo_counts = config.demo_counts;

    const auto proto_env = make_env(config.env_name, config.slip);
    const TabularPolicy oracle_policy = value_iteration(proto_env->model()).policy;

    std::vector<Cell> cells;
    for (Method method : config.methods)
        for (int demo_count : config.demo_counts)
            for (int seed = 0; seed < config.seeds; ++seed)
                cells.push_back({method, demo_count, seed});

    table.rows.resize(cells.size());
    std::atomic<std::size_t> next{0};
    const unsigned hw = std::thread::hardware_concurrency();
    const unsigned n_workers =
        config.workers > 0 ? static_cast<unsigned>(config.workers) : (hw ? hw : 4);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < std::min<std::size_t>(n_workers, cells.size()); ++w) {
        pool.emplace_back([&] {
            while (true) {
                const std::size_t index = next.fetch_add(1);
                if (index >= cells.size()) break;
                table.rows[index] = run_cell(config, cells[index], oracle_policy);
            }
        });
    }
    for (auto& worker : pool) worker.join();

    export_results(table, config.output_dir);
    return table;
}

std::string results_raw_csv(const ResultTable& table) {
    std::ostringstream out;
    out << "method,demo_count,seed,episodes_to_threshold,censored,error\n";
    for (const auto& row : table.rows)
        out << row.method << ',' << row.demo_count << ',' << row.seed << ','
            << row.episodes_to_threshold << ',' << (row.censored ? 1 : 0) << ',' << row.error
            << '\n';
    return out.str();
}

namespace {

std::vector<std::string> table_methods(const ResultTable& table) {
    std::vector<std::string> methods;
    for (const auto& row : table.rows)
        if (std::find(methods.begin(), methods.end(), row.method) == methods.end())
            methods.push_back(row.method);
    return methods;
}

std::vector<double> cell_values(const ResultTable& table, const std::string& method,
                                int demo_count) {
    std::vector<double> values;
    for (const auto& row : table.rows)
        if (row.method == method && row.demo_count == demo_count)
            values.push_back(static_cast<double>(row.episodes_to_threshold));
    return values;
}

}  // namespace

std::string results_summary_csv(const ResultTable& table) {
    std::ostringstream out;
    out << "method,demo_count,mean_episodes,censored_count,n\n";
    for (const auto& method : table_methods(table)) {
        for (int demo_count : table.demo_counts) {
            const auto values = cell_values(table, method, demo_count);
            if (values.empty()) continue;
            double mean = 0.0;
            for (double v : values) mean += v;
            mean /= static_cast<double>(values.size());
            int censored = 0;
            for (const auto& row : table.rows)
                if (row.method == method && row.demo_count == demo_count && row.censored)
                    ++censored;
            out << method << ',' << demo_count << ',' << format_double(mean) << ',' << censored
                << ',' << values.size() << '\n';
        }
    }
    return out.str();
}

std::string results_long_csv(const ResultTable& table) {
    std::ostringstream out;
    out << "demo_count,method,seed,episodes_to_threshold\n";
    for (int demo_count : table.demo_counts)
        for (const auto& method : table_methods(table))
            for (const auto& row : table.rows)
                if (row.method == method && row.demo_count == demo_count)
                    out << demo_count << ',' << method << ',' << row.seed << ','
                        << row.episodes_to_threshold << '\n';
    return out.str();
}

std::string results_pvalues_csv(const ResultTable& table) {
    std::ostringstream out;
    const auto methods = table_methods(table);
    out << "comparison";
    for (int demo_count : table.demo_counts) out << ',' << demo_count;
    out << '\n';
    if (methods.size() < 2) return out.str();
    for (std::size_t k = 1; k < methods.size(); ++k) {
        out << methods[0] << "_vs_" << methods[k];
        for (int demo_count : table.demo_counts) {
            const auto a = cell_values(table, methods[0], demo_count);
            const auto b = cell_values(table, methods[k], demo_count);
            if (a.empty() || b.empty()) {
                out << ",";
                continue;
            }
            out << ',' << format_double(mann_whitney_u(a, b).p_value);
        }
        out << '\n';
    }
    return out.str();
}

void export_results(const ResultTable& table, const std::string& directory) {
    namespace fs = std::filesystem;
    fs::create_directories(directory);
    write_file((fs::path(directory) / "results_raw.csv").string(), results_raw_csv(table));
    write_file((fs::path(directory) / "results_summary.csv").string(),
               results_summary_csv(table));
    write_file((fs::path(directory) / "results_long.csv").string(), results_long_csv(table));
    write_file((fs::path(directory) / "results_pvalues.csv").string(),
               results_pvalues_csv(table));

    std::ostringstream meta;
    meta << "budget=" << table.budget << '\n';
    meta << "eval_every=" << table.eval_every << '\n';
    meta << "plot_x=demo_count\n";
    meta << "plot_y=mean_episodes\n";
    meta << "plot_y_scale=log\n";
    write_file((fs::path(directory) / "run_meta.txt").string(), meta.str());
}

}  // namespace alignrr
