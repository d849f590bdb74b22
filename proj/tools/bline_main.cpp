// bline - consensus, scoring and evaluation pipeline for crowdsourced
// B-line segmentations. Subcommands: diceh, consensus, qscore, evaluate,
// simulate.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bline/evaluation.hpp"
#include "bline/io.hpp"
#include "bline/scoring.hpp"
#include "bline/simulator.hpp"

namespace fs = std::filesystem;
using namespace bline;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitInternal = 2;

void print_warnings(const io::Diagnostics& diagnostics) {
    for (const auto& w : diagnostics.warnings) std::cerr << "warning: " << w << '\n';
}

// One line set per case: the most recent record wins when a file carries
// several (by timestamp, then annotator id, then input order).
std::map<std::string, std::vector<LineSegment>> lines_by_case(const std::vector<Opinion>& ops) {
    std::map<std::string, const Opinion*> best;
    for (const auto& op : ops) {
        auto [it, inserted] = best.try_emplace(op.case_id, &op);
        if (inserted) continue;
        if (op.timestamp_ms > it->second->timestamp_ms ||
            (op.timestamp_ms == it->second->timestamp_ms &&
             op.annotator_id >= it->second->annotator_id))
            it->second = &op;
    }
    std::map<std::string, std::vector<LineSegment>> out;
    for (const auto& [case_id, op] : best) out[case_id] = op->lines;
    return out;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}

RunConfig resolve_config(const std::string& path, bool strict) {
    if (path.empty()) {
        RunConfig config;
        if (const auto seed = io::env_seed_override()) {
            config.sim.master_seed = *seed;
            config.bootstrap.seed = *seed;
        }
        return config;
    }
    io::Diagnostics diagnostics;
    RunConfig config = io::load_config(path, {strict}, &diagnostics);
    print_warnings(diagnostics);
    return config;
}

int cmd_diceh(const std::string& path_a, const std::string& path_b, double cutoff, bool strict) {
    io::Diagnostics diagnostics;
    const auto a = lines_by_case(io::load_opinions(path_a, {strict}, &diagnostics));
    const auto b = lines_by_case(io::load_opinions(path_b, {strict}, &diagnostics));
    print_warnings(diagnostics);

    const SimilarityParams params{cutoff};
    std::cout << "case_id,dice_h\n";
    std::size_t joined = 0;
    double sum = 0.0;
    for (const auto& [case_id, lines_a] : a) {
        const auto it = b.find(case_id);
        if (it == b.end()) {
            std::cerr << "warning: case " << case_id << " only in " << path_a << '\n';
            continue;
        }
        const double score = dice_h(lines_a, it->second, params);
        std::cout << case_id << ',' << io::format_double(score) << '\n';
        sum += score;
        ++joined;
    }
    for (const auto& [case_id, lines_b] : b) {
        if (a.find(case_id) == a.end())
            std::cerr << "warning: case " << case_id << " only in " << path_b << '\n';
    }
    if (joined == 0) {
        std::cerr << "error: no cases in common\n";
        return kExitValidation;
    }
    std::cerr << "mean dice_h over " << joined << " cases: " << io::format_double(sum / joined)
              << '\n';
    return kExitOk;
}

int cmd_consensus(const std::string& input, const std::string& out_path,
                  const RunConfig& config, bool strict) {
    io::Diagnostics diagnostics;
    const auto opinions = io::load_opinions(input, {strict}, &diagnostics);
    print_warnings(diagnostics);

    // Most recent opinion per (case, annotator).
    std::map<std::string, std::map<std::string, const Opinion*>> by_case;
    for (const auto& op : opinions) {
        auto& slot = by_case[op.case_id][op.annotator_id];
        if (slot == nullptr || op.timestamp_ms >= slot->timestamp_ms) slot = &op;
    }

    std::vector<ConsensusAnnotation> result;
    for (const auto& [case_id, by_annotator] : by_case) {
        std::vector<Opinion> ops;
        for (const auto& [id, op] : by_annotator) ops.push_back(*op);
        result.push_back(build_consensus(ops, config.consensus));
    }

    auto out = open_output(out_path);
    io::write_consensus(out, result);
    std::cerr << "wrote " << result.size() << " consensus annotations to " << out_path << '\n';
    return kExitOk;
}

int cmd_qscore(const std::string& input, const std::string& truth_path, double cutoff,
               std::size_t window, bool strict) {
    io::Diagnostics diagnostics;
    auto opinions = io::load_opinions(input, {strict}, &diagnostics);
    print_warnings(diagnostics);
    const auto refs = io::load_reference_lines(truth_path, {strict});

    std::sort(opinions.begin(), opinions.end(), [](const Opinion& a, const Opinion& b) {
        if (a.timestamp_ms != b.timestamp_ms) return a.timestamp_ms < b.timestamp_ms;
        return a.annotator_id < b.annotator_id;
    });

    const SimilarityParams params{cutoff};
    QscoreLedger ledger(window);
    std::cout << "annotator_id,timestamp,case_id,dice_h,qscore_after\n";
    std::size_t unreferenced = 0;
    for (const auto& op : opinions) {
        if (op.split != Split::train) continue;
        const auto it = refs.find(op.case_id);
        if (it == refs.end()) {
            ++unreferenced;
            continue;
        }
        const double score = dice_h(op.lines, it->second, params);
        ledger.record_training_score(op.annotator_id, op.timestamp_ms, score);
        const auto trailing = ledger.qscore(op.annotator_id, op.timestamp_ms + 1, 1);
        std::cout << op.annotator_id << ',' << op.timestamp_ms << ',' << op.case_id << ','
                  << io::format_double(score) << ',' << io::format_double(trailing.value_or(score))
                  << '\n';
    }
    if (unreferenced > 0)
        std::cerr << "warning: " << unreferenced
                  << " training opinions had no reference case and were skipped\n";
    return kExitOk;
}

int cmd_evaluate(const std::string& experts_path, const std::string& crowd_path,
                 const std::string& config_path, const std::string& out_path, bool svg,
                 bool strict) {
    const RunConfig config = resolve_config(config_path, strict);
    io::Diagnostics diagnostics;
    eval::EvaluationInput input;
    input.expert_opinions = io::load_opinions(experts_path, {strict}, &diagnostics);
    input.crowd_opinions = io::load_opinions(crowd_path, {strict}, &diagnostics);
    print_warnings(diagnostics);

    const eval::EvalReport report = eval::run_evaluation(input, config);

    const fs::path report_path(out_path);
    const fs::path dir = report_path.has_parent_path() ? report_path.parent_path() : fs::path(".");
    fs::create_directories(dir);
    {
        auto out = open_output(report_path.string());
        io::write_report(out, report, config);
    }
    {
        auto out = open_output((dir / "learning_curve.csv").string());
        io::write_learning_curve_csv(out, report.curve);
    }
    {
        auto out = open_output((dir / "figure3b_bootstrap.csv").string());
        io::write_bootstrap_csv(out, report.dice_diff_replicates);
    }
    if (svg) {
        auto out = open_output((dir / "learning_curve.svg").string());
        io::write_learning_curve_svg(out, report.curve, report.expert_mean_dice);
    }

    std::cerr << "evaluated " << report.cases_evaluated << " cases ("
              << report.case_fold_comparisons << " case-fold comparisons), report at "
              << out_path << '\n';
    return kExitOk;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir, bool strict) {
    const RunConfig config = resolve_config(config_path, strict);
    const auto experts = sim::default_expert_panel(config.sim);
    const auto crowd = sim::default_crowd_population(config.sim);
    const sim::ContestResult contest = sim::run_contest(config.sim, experts, crowd, config);

    fs::create_directories(out_dir);
    const fs::path dir(out_dir);

    std::vector<Opinion> truth_records;
    for (const auto& c : contest.truth) {
        Opinion op;
        op.case_id = c.case_id;
        op.annotator_id = "truth";
        op.timestamp_ms = 0;
        op.split = c.split;
        op.lines = c.true_lines;
        truth_records.push_back(std::move(op));
    }
    io::save_opinions((dir / "truth.jsonl").string(), truth_records);
    io::save_opinions((dir / "experts.jsonl").string(), contest.expert_opinions);
    io::save_opinions((dir / "crowd.jsonl").string(), contest.crowd_opinions);

    // Provenance note: these are synthetic annotator-model streams, not
    // clinical data.
    {
        auto out = open_output((dir / "manifest.json").string());
        out << "{\n  \"generator\": \"bline simulate\",\n  \"synthetic\": true,\n"
               "  \"note\": \"opinions generated by stochastic annotator models; "
               "not clinical data\",\n  \"master_seed\": "
            << config.sim.master_seed << "\n}\n";
    }

    std::cerr << "wrote " << contest.truth.size() << " cases, "
              << contest.expert_opinions.size() << " expert opinions, "
              << contest.crowd_opinions.size() << " crowd opinions to " << out_dir << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Crowdsourced B-line annotation consensus and evaluation"};
    app.require_subcommand(1);
    bool strict = false;
    app.add_flag("--strict", strict, "Reject unknown input fields instead of warning");

    auto* diceh = app.add_subcommand("diceh", "Per-case Dice-H between two annotation files");
    std::string diceh_a, diceh_b;
    double diceh_cutoff = 5.0;
    diceh->add_option("file_a", diceh_a, "First JSONL opinion file")->required();
    diceh->add_option("file_b", diceh_b, "Second JSONL opinion file")->required();
    diceh->add_option("--cutoff", diceh_cutoff, "Similarity cutoff distance")
        ->check(CLI::PositiveNumber);

    auto* consensus_cmd = app.add_subcommand("consensus", "Consensus annotation per case");
    std::string cons_in, cons_out = "consensus.jsonl", cons_config;
    consensus_cmd->add_option("opinions", cons_in, "JSONL opinion file")->required();
    consensus_cmd->add_option("--out", cons_out, "Output JSONL path");
    consensus_cmd->add_option("--config", cons_config, "Run configuration file");

    auto* qscore_cmd = app.add_subcommand("qscore", "Per-user training-score ledger dump");
    std::string q_in, q_truth;
    double q_cutoff = 10.0;
    std::size_t q_window = 0;
    qscore_cmd->add_option("opinions", q_in, "JSONL opinion file")->required();
    qscore_cmd->add_option("--truth", q_truth, "Reference line sets (opinion or consensus JSONL)")
        ->required();
    qscore_cmd->add_option("--cutoff", q_cutoff, "Similarity cutoff distance")
        ->check(CLI::PositiveNumber);
    qscore_cmd->add_option("--window", q_window, "Trailing window (0 = all history)");

    auto* evaluate_cmd = app.add_subcommand("evaluate", "Full evaluation protocol");
    std::string ev_experts, ev_crowd, ev_config, ev_out = "report.json";
    bool ev_svg = false;
    evaluate_cmd->add_option("--experts", ev_experts, "Expert opinions JSONL")->required();
    evaluate_cmd->add_option("--crowd", ev_crowd, "Crowd opinions JSONL")->required();
    evaluate_cmd->add_option("--config", ev_config, "Run configuration file");
    evaluate_cmd->add_option("--out", ev_out, "Report output path");
    evaluate_cmd->add_flag("--svg", ev_svg, "Also render learning_curve.svg");

    auto* simulate_cmd = app.add_subcommand("simulate", "Generate a synthetic contest");
    std::string sim_config, sim_out = "runs/default";
    simulate_cmd->add_option("--config", sim_config, "Run configuration file");
    simulate_cmd->add_option("--out-dir", sim_out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (diceh->parsed()) return cmd_diceh(diceh_a, diceh_b, diceh_cutoff, strict);
        if (consensus_cmd->parsed())
            return cmd_consensus(cons_in, cons_out, resolve_config(cons_config, strict), strict);
        if (qscore_cmd->parsed()) return cmd_qscore(q_in, q_truth, q_cutoff, q_window, strict);
        if (evaluate_cmd->parsed())
            return cmd_evaluate(ev_experts, ev_crowd, ev_config, ev_out, ev_svg, strict);
        if (simulate_cmd->parsed()) return cmd_simulate(sim_config, sim_out, strict);
    } catch (const io::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitInternal;
}
