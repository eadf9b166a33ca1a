// Command-line front end for the reward-redistribution pipeline: demo
// generation, event clustering, alignment, PSSM construction, reward
// redistribution, training runs, full experiments and rank-sum statistics.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "alignrr/errors.hpp"
#include "alignrr/harness.hpp"
#include "alignrr/io.hpp"

namespace fs = std::filesystem;
using namespace alignrr;

namespace {

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out;
    int demo_count = 10;
    int seed = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_cell = true) {
    cmd->add_option("--config", args.config_path, "declarative key=value config file");
    cmd->add_option("--set", args.overrides, "config override key=value (repeatable)");
    cmd->add_option("--out", args.out, "output directory");
    if (with_cell) {
        cmd->add_option("--n", args.demo_count, "number of demonstrations");
        cmd->add_option("--seed", args.seed, "cell seed");
    }
}

ExperimentConfig load_config(const CommonArgs& args) {
    std::map<std::string, std::string> kv;
    if (!args.config_path.empty()) kv = parse_config(read_file(args.config_path));
    for (const auto& item : args.overrides) {
        const auto eq = item.find('=');
        if (eq == std::string::npos)
            throw invalid_input("override '" + item + "' is not key=value");
        kv[item.substr(0, eq)] = item.substr(eq + 1);
    }
    ExperimentConfig config = ExperimentConfig::from_map(kv);
    if (!args.out.empty()) config.output_dir = args.out;
    if (const char* root = std::getenv("ALIGNRR_OUTPUT_ROOT")) {
        const fs::path dir(config.output_dir);
        if (dir.is_relative()) config.output_dir = (fs::path(root) / dir).string();
    }
    return config;
}

fs::path ensure_out(const ExperimentConfig& config) {
    fs::create_directories(config.output_dir);
    return config.output_dir;
}

std::vector<double> read_sample(const std::string& path) {
    std::vector<double> values;
    std::istringstream in(read_file(path));
    std::string token;
    while (in >> token) {
        try {
            values.push_back(std::stod(token));
        } catch (const std::exception&) {
            throw io_error("cannot parse sample value '" + token + "' in " + path);
        }
    }
    return values;
}

int run_demos(const CommonArgs& args) {
    const ExperimentConfig config = load_config(args);
    const auto env = make_env(config.env_name, config.slip);
    const auto demos = make_demos(*env, config, args.demo_count, args.seed);
    const fs::path out = ensure_out(config);
    for (std::size_t i = 0; i < demos.size(); ++i)
        write_file((out / ("demo_" + std::to_string(i) + ".csv")).string(),
                   trajectory_to_csv(demos[i]));
    std::cout << "wrote " << demos.size() << " demonstrations to " << out << "\n";
    return 0;
}

PipelineArtifacts cell_pipeline(const ExperimentConfig& config, int demo_count, int seed) {
    const auto env = make_env(config.env_name, config.slip);
    const auto demos = make_demos(*env, config, demo_count, seed);
    return build_pipeline(*env, demos, config);
}

int run_cluster(const CommonArgs& args) {
    const ExperimentConfig config = load_config(args);
    const auto artifacts = cell_pipeline(config, args.demo_count, args.seed);
    const fs::path out = ensure_out(config);
    write_file((out / "clusters.csv").string(), clusters_to_csv(artifacts.assignment));
    write_file((out / "events.fasta").string(), sequences_to_fasta(artifacts.demo_sequences));
    std::cout << artifacts.assignment.n_clusters << " clusters over "
              << artifacts.assignment.labels.size() << " states -> " << out << "\n";
    return 0;
}

int run_align(const CommonArgs& args) {
    const ExperimentConfig config = load_config(args);
    const auto artifacts = cell_pipeline(config, args.demo_count, args.seed);
    const fs::path out = ensure_out(config);
    write_file((out / "scoring.csv").string(), scoring_to_csv(artifacts.scoring));
    write_file((out / "msa.fasta").string(), msa_to_fasta(artifacts.msa));
    std::cout << "MSA of " << artifacts.msa.n_rows() << " sequences, length "
              << artifacts.msa.length() << ", sum-of-pairs score "
              << format_double(artifacts.msa.score) << " -> " << out << "\n";
    return 0;
}

int run_pssm_cmd(const CommonArgs& args) {
    const ExperimentConfig config = load_config(args);
    const auto artifacts = cell_pipeline(config, args.demo_count, args.seed);
    const fs::path out = ensure_out(config);
    write_file((out / "pssm.csv").string(), pssm_to_csv(artifacts.pssm));
    std::cout << "PSSM with " << artifacts.pssm.length() << " columns -> " << out << "\n";
    return 0;
}

int run_redistribute(const CommonArgs& args) {
    const ExperimentConfig config = load_config(args);
    const auto artifacts = cell_pipeline(config, args.demo_count, args.seed);
    const fs::path out = ensure_out(config);
    for (std::size_t i = 0; i < artifacts.demo_sequences.size(); ++i) {
        const auto& seq = artifacts.demo_sequences[i];
        const auto episode = redistribute(seq, artifacts.model, seq.source_return);
        const Vector scores = prefix_scores(seq, artifacts.model.pssm);
        write_file((out / ("redistributed_" + std::to_string(i) + ".csv")).string(),
                   redistributed_to_csv(seq, scores, episode));
    }
    double threshold;
    if (config.subgoal_threshold) {
        threshold = *config.subgoal_threshold;
    } else {
        // default: mean positive redistributed reward over the demos
        double total = 0.0;
        long count = 0;
        for (const auto& seq : artifacts.demo_sequences) {
            const auto episode = redistribute(seq, artifacts.model, seq.source_return);
            for (int t = 0; t < episode.rewards.size(); ++t)
                if (episode.rewards(t) > 0.0) {
                    total += episode.rewards(t);
                    ++count;
                }
        }
        threshold = count > 0 ? total / count : 1e-9;
    }
    const SubGoalSet subgoals =
        extract_subgoals(artifacts.demo_sequences, artifacts.model, threshold);
    std::ostringstream sg;
    sg << "position\n";
    for (int p : subgoals.positions) sg << p << '\n';
    write_file((out / "subgoals.csv").string(), sg.str());
    std::cout << artifacts.demo_sequences.size() << " redistributed episodes, "
              << subgoals.positions.size() << " sub-goals -> " << out << "\n";
    return 0;
}

int run_train(const CommonArgs& args, const std::string& method_name) {
    const ExperimentConfig config = load_config(args);
    const auto env = make_env(config.env_name, config.slip);
    const auto demos = make_demos(*env, config, args.demo_count, args.seed);
    double mean_return = 0.0;
    for (const auto& demo : demos) mean_return += demo.terminal_return;
    mean_return /= static_cast<double>(demos.size());

    LearnerConfig learner;
    learner.method = method_name == "bc-q"   ? Method::bc_q
                     : method_name == "sqil" ? Method::sqil
                                             : Method::align_rudder;
    learner.epsilon = config.epsilon_greedy_rate;
    learner.bc_noise_mean = config.bc_noise_mean;
    learner.bc_noise_std = config.bc_noise_std;
    learner.learning_rate = learner.method == Method::align_rudder ? config.lr_align_rudder
                                                                   : config.lr_baseline;
    learner.demo_replay = config.demo_replay;
    learner.bc_margin = config.bc_margin;

    std::optional<StepRedistributor> redistributor;
    if (learner.method == Method::align_rudder) {
        const auto artifacts = build_pipeline(*env, demos, config);
        ClusterAssignment expanded;
        expanded.n_clusters = artifacts.assignment.n_clusters;
        expanded.centers = artifacts.assignment.centers;
        expanded.labels.resize(env->n_states());
        const auto* rooms = dynamic_cast<const RoomsEnv*>(env.get());
        for (int s = 0; s < env->n_states(); ++s)
            expanded.labels[s] =
                artifacts.assignment.labels[rooms ? rooms->cell_of(s) : s];
        redistributor = StepRedistributor{expanded, artifacts.model, config.run_smear};
    }

    Rng rng(config.master_seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(args.seed));
    const double threshold = config.threshold_fraction * mean_return;
    QTable table;
    const LearningCurve curve =
        train(*env, learner, redistributor ? &*redistributor : nullptr, demos, config.budget,
              config.eval_every, config.eval_rollouts, rng,
              config.stop_on_threshold ? std::optional<double>(threshold) : std::nullopt,
              &table);

    const fs::path out = ensure_out(config);
    write_file((out / ("curve_" + method_name + ".csv")).string(), curve_to_csv(curve.points));
    write_file((out / ("qtable_" + method_name + ".csv")).string(), qtable_to_csv(table));
    std::cout << method_name << ": episodes to threshold "
              << episodes_to_threshold(curve, threshold, config.budget) << " (threshold "
              << threshold << ") -> " << out << "\n";
    return 0;
}

int run_experiment(const CommonArgs& args, const std::string& cluster_sweep) {
    const ExperimentConfig config = load_config(args);
    if (cluster_sweep.empty()) {
        const ResultTable table = run_pipeline(config);
        std::cout << results_summary_csv(table);
        std::cout << "results -> " << config.output_dir << "\n";
        return 0;
    }

    // one table across cluster budgets, as in the cluster-count ablation
    std::ostringstream combined;
    combined << "max_clusters,method,demo_count,mean_episodes,censored_count,n\n";
    std::istringstream values(cluster_sweep);
    std::string value;
    while (std::getline(values, value, ',')) {
        if (value.empty()) continue;
        ExperimentConfig sweep = config;
        sweep.max_clusters = std::stoi(value);
        sweep.output_dir = config.output_dir + "/clusters_" + value;
        const ResultTable table = run_pipeline(sweep);
        std::istringstream summary(results_summary_csv(table));
        std::string line;
        std::getline(summary, line);  // header
        while (std::getline(summary, line))
            if (!line.empty()) combined << value << ',' << line << '\n';
    }
    write_file((fs::path(config.output_dir) / "cluster_sweep.csv").string(), combined.str());
    std::cout << combined.str();
    std::cout << "results -> " << config.output_dir << "\n";
    return 0;
}

int run_stats(const std::string& path_a, const std::string& path_b, const std::string& side) {
    const auto a = read_sample(path_a);
    const auto b = read_sample(path_b);
    const TestSide test_side = side == "less"      ? TestSide::less
                               : side == "greater" ? TestSide::greater
                                                   : TestSide::two_sided;
    const MannWhitneyResult result = mann_whitney_u(a, b, test_side);
    std::cout << "U=" << format_double(result.u) << " p=" << format_double(result.p_value)
              << " exact=" << (result.exact ? 1 : 0) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sequence-alignment reward redistribution toolkit"};
    app.require_subcommand(1);

    CommonArgs demos_args, cluster_args, align_args, pssm_args, redistribute_args, train_args,
        experiment_args;
    std::string train_method = "align-rudder";
    std::string stats_a, stats_b, stats_side = "two";

    add_common(app.add_subcommand("demos", "generate demonstrations"), demos_args);
    add_common(app.add_subcommand("cluster", "cluster states into events"), cluster_args);
    add_common(app.add_subcommand("align", "score system + multiple alignment"), align_args);
    add_common(app.add_subcommand("pssm", "build the profile scoring matrix"), pssm_args);
    add_common(app.add_subcommand("redistribute", "redistribute demo rewards"),
               redistribute_args);
    auto* train_cmd = app.add_subcommand("train", "train one learner cell");
    add_common(train_cmd, train_args);
    train_cmd->add_option("--method", train_method, "align-rudder | bc-q | sqil");
    auto* experiment_cmd = app.add_subcommand("experiment", "full experiment sweep");
    add_common(experiment_cmd, experiment_args, false);
    std::string cluster_sweep;
    experiment_cmd->add_option("--cluster-sweep", cluster_sweep,
                               "comma-separated max_clusters values for an ablation table");
    auto* stats_cmd = app.add_subcommand("stats", "Mann-Whitney U on two samples");
    stats_cmd->add_option("--a", stats_a, "first sample file")->required();
    stats_cmd->add_option("--b", stats_b, "second sample file")->required();
    stats_cmd->add_option("--side", stats_side, "two | less | greater");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("demos")) return run_demos(demos_args);
        if (app.got_subcommand("cluster")) return run_cluster(cluster_args);
        if (app.got_subcommand("align")) return run_align(align_args);
        if (app.got_subcommand("pssm")) return run_pssm_cmd(pssm_args);
        if (app.got_subcommand("redistribute")) return run_redistribute(redistribute_args);
        if (app.got_subcommand("train")) return run_train(train_args, train_method);
        if (app.got_subcommand("experiment"))
            return run_experiment(experiment_args, cluster_sweep);
        if (app.got_subcommand("stats")) return run_stats(stats_a, stats_b, stats_side);
    } catch (const invalid_input& e) {
        std::cerr << "error: invalid_input: " << e.what() << "\n";
        return 2;
    } catch (const io_error& e) {
        std::cerr << "error: io: " << e.what() << "\n";
        return 3;
    } catch (const no_root_error& e) {
        std::cerr << "error: no_root: " << e.what() << "\n";
        return 4;
    } catch (const degenerate_error& e) {
        std::cerr << "error: degenerate: " << e.what() << "\n";
        return 4;
    } catch (const generation_failure& e) {
        std::cerr << "error: generation_failure: " << e.what() << "\n";
        return 5;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
