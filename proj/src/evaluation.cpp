#include "bline/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "bline/scoring.hpp"

namespace bline::eval {

ConsensusAnnotation loo_consensus(std::span<const Opinion> expert_opinions,
                                  std::size_t leave_out,
                                  const ConsensusParams& params) {
    if (expert_opinions.size() < 3)
        throw std::invalid_argument("loo_consensus: need at least 3 experts");
    if (leave_out >= expert_opinions.size())
        throw std::invalid_argument("loo_consensus: leave_out index out of range");

    std::vector<Opinion> rest;
    rest.reserve(expert_opinions.size() - 1);
    for (std::size_t i = 0; i < expert_opinions.size(); ++i)
        if (i != leave_out) rest.push_back(expert_opinions[i]);
    return build_consensus(rest, params);
}

double count_reference(std::span<const Opinion> expert_opinions) {
    if (expert_opinions.empty())
        throw std::invalid_argument("count_reference: empty expert list");
    double sum = 0.0;
    for (const auto& op : expert_opinions) sum += static_cast<double>(op.lines.size());
    return sum / static_cast<double>(expert_opinions.size());
}

ConcordanceResult concordance(std::span<const CaseBundle> bundles,
                              const SimilarityParams& metric_params,
                              const ConsensusParams& consensus_params) {
    ConcordanceResult result;
    double crowd_dice_sum = 0.0, expert_dice_sum = 0.0;
    double crowd_err_sum = 0.0, expert_err_sum = 0.0;

    for (const auto& bundle : bundles) {
        if (bundle.expert_opinions.size() < 3) {
            result.skipped.push_back({bundle.case_id, "missing expert opinions"});
            continue;
        }

        CaseEvaluation ce;
        ce.case_id = bundle.case_id;
        const double crowd_count = static_cast<double>(bundle.crowd_consensus.lines.size());
        double ce_exp_dice = 0.0, ce_crowd_dice = 0.0, ce_exp_err = 0.0, ce_crowd_err = 0.0;

        const std::size_t n_experts = bundle.expert_opinions.size();
        for (std::size_t fold = 0; fold < n_experts; ++fold) {
            const ConsensusAnnotation ref =
                loo_consensus(bundle.expert_opinions, fold, consensus_params);

            std::vector<Opinion> contributing;
            for (std::size_t i = 0; i < n_experts; ++i)
                if (i != fold) contributing.push_back(bundle.expert_opinions[i]);

            FoldResult fr;
            fr.left_out = fold;
            fr.reference_count = count_reference(contributing);
            fr.reference_line_count = ref.lines.size();
            fr.expert_dice =
                dice_h(bundle.expert_opinions[fold].lines, ref.lines, metric_params);
            fr.crowd_dice = dice_h(bundle.crowd_consensus.lines, ref.lines, metric_params);
            const double expert_count =
                static_cast<double>(bundle.expert_opinions[fold].lines.size());
            fr.expert_sq_count_err =
                (expert_count - fr.reference_count) * (expert_count - fr.reference_count);
            fr.crowd_sq_count_err =
                (crowd_count - fr.reference_count) * (crowd_count - fr.reference_count);

            ce_exp_dice += fr.expert_dice;
            ce_crowd_dice += fr.crowd_dice;
            ce_exp_err += fr.expert_sq_count_err;
            ce_crowd_err += fr.crowd_sq_count_err;
            ce.folds.push_back(fr);
        }

        const double nf = static_cast<double>(ce.folds.size());
        ce.mean_expert_dice = ce_exp_dice / nf;
        ce.mean_crowd_dice = ce_crowd_dice / nf;
        ce.mean_expert_sq_count_err = ce_exp_err / nf;
        ce.mean_crowd_sq_count_err = ce_crowd_err / nf;

        expert_dice_sum += ce_exp_dice;
        crowd_dice_sum += ce_crowd_dice;
        expert_err_sum += ce_exp_err;
        crowd_err_sum += ce_crowd_err;
        result.case_fold_comparisons += ce.folds.size();
        result.cases.push_back(std::move(ce));
    }

    if (result.case_fold_comparisons > 0) {
        const double n = static_cast<double>(result.case_fold_comparisons);
        result.crowd_mean_dice = crowd_dice_sum / n;
        result.expert_mean_dice = expert_dice_sum / n;
        result.crowd_count_mse = crowd_err_sum / n;
        result.expert_count_mse = expert_err_sum / n;
    }
    return result;
}

std::optional<double> count_match_rate(std::span<const CountMatchCase> cases) {
    std::size_t discordant = 0, matched = 0;
    for (const auto& c : cases) {
        if (std::fabs(c.crowd_count - c.full_reference_count) <= 1e-9) continue;
        ++discordant;
        for (const double e : c.expert_counts) {
            if (std::fabs(e - c.crowd_count) <= 1e-9) {
                ++matched;
                break;
            }
        }
    }
    if (discordant == 0) return std::nullopt;
    return static_cast<double>(matched) / static_cast<double>(discordant);
}

double mean_pairwise_dice(std::span<const Opinion> opinions, const SimilarityParams& params) {
    const std::size_t n = opinions.size();
    if (n < 2) throw std::invalid_argument("mean_pairwise_dice: need at least 2 opinions");
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            sum += dice_h(opinions[i].lines, opinions[j].lines, params);
            ++pairs;
        }
    }
    return sum / static_cast<double>(pairs);
}

stats::PearsonResult agreement_correlation(std::span<const AgreementCase> cases,
                                           const SimilarityParams& params) {
    std::vector<double> expert_agreement, crowd_agreement;
    for (const auto& c : cases) {
        if (c.experts.size() < 2 || c.crowd.size() < 2) continue;
        expert_agreement.push_back(mean_pairwise_dice(c.experts, params));
        crowd_agreement.push_back(mean_pairwise_dice(c.crowd, params));
    }
    if (expert_agreement.size() < 3)
        throw std::invalid_argument("agreement_correlation: fewer than 3 usable cases");
    return stats::pearson(expert_agreement, crowd_agreement);
}

std::vector<LearningCurveBin> learning_curve(std::vector<ScoredOpinion> opinions,
                                             std::size_t bin_width) {
    if (bin_width == 0) throw std::invalid_argument("learning_curve: bin_width must be >= 1");

    std::sort(opinions.begin(), opinions.end(), [](const ScoredOpinion& a, const ScoredOpinion& b) {
        if (a.annotator_id != b.annotator_id) return a.annotator_id < b.annotator_id;
        return a.timestamp_ms < b.timestamp_ms;
    });

    struct BinAccum {
        std::vector<double> scores;
        std::set<std::string> annotators;
    };
    std::map<std::size_t, BinAccum> bins;

    std::size_t index_within = 0;  // 1-based per-annotator opinion index
    for (std::size_t i = 0; i < opinions.size(); ++i) {
        if (i == 0 || opinions[i].annotator_id != opinions[i - 1].annotator_id)
            index_within = 0;
        ++index_within;
        const std::size_t bin = (index_within - 1) / bin_width;
        bins[bin].scores.push_back(opinions[i].score);
        bins[bin].annotators.insert(opinions[i].annotator_id);
    }

    std::vector<LearningCurveBin> out;
    for (const auto& [bin, accum] : bins) {
        LearningCurveBin b;
        b.bin_index = bin;
        b.first_opinion_idx = bin * bin_width + 1;
        b.last_opinion_idx = (bin + 1) * bin_width;
        b.mean_score = stats::mean(accum.scores);
        b.sem = stats::standard_error(accum.scores);
        b.annotator_count = accum.annotators.size();
        b.opinion_count = accum.scores.size();
        b.low_support = accum.annotators.size() < 2;
        out.push_back(std::move(b));
    }
    return out;
}

EvalReport run_evaluation(const EvaluationInput& input, const RunConfig& config) {
    const SimilarityParams eval_params{config.metric.eval_cutoff};
    const SimilarityParams ingame_params{config.metric.ingame_cutoff};

    // Expert panel and per-case expert opinions. Panel order is the sorted
    // annotator id order; a test case missing any panel member is skipped.
    std::set<std::string> panel_ids;
    for (const auto& op : input.expert_opinions) panel_ids.insert(op.annotator_id);
    if (panel_ids.size() < 3)
        throw std::invalid_argument("run_evaluation: need at least 3 experts");

    std::map<std::string, std::map<std::string, Opinion>> expert_by_case;  // case -> annotator -> op
    std::map<std::string, Split> case_split;
    for (const auto& op : input.expert_opinions) {
        auto& slot = expert_by_case[op.case_id][op.annotator_id];
        if (slot.annotator_id.empty() || op.timestamp_ms >= slot.timestamp_ms) slot = op;
        case_split[op.case_id] = op.split;
    }

    // Training references: all-experts consensus per training case.
    std::map<std::string, std::vector<LineSegment>> train_reference;
    for (const auto& [case_id, by_annotator] : expert_by_case) {
        if (case_split.at(case_id) != Split::train) continue;
        std::vector<Opinion> ops;
        for (const auto& [id, op] : by_annotator) ops.push_back(op);
        train_reference[case_id] = build_consensus(ops, config.consensus).lines;
    }

    EvalReport report;

    // Replay the crowd stream in time order: training opinions feed the
    // Qscore ledger (in-game cutoff) and the learning curve (eval cutoff).
    std::vector<const Opinion*> crowd_sorted;
    for (const auto& op : input.crowd_opinions) crowd_sorted.push_back(&op);
    std::sort(crowd_sorted.begin(), crowd_sorted.end(), [](const Opinion* a, const Opinion* b) {
        if (a->timestamp_ms != b->timestamp_ms) return a->timestamp_ms < b->timestamp_ms;
        return a->annotator_id < b->annotator_id;
    });

    QscoreLedger ledger(config.selection.window);
    std::vector<ScoredOpinion> scored_training;
    std::map<std::string, std::vector<Opinion>> crowd_test_by_case;
    std::set<std::string> unreferenced_training_cases;
    for (const Opinion* op : crowd_sorted) {
        if (op->split == Split::train) {
            const auto it = train_reference.find(op->case_id);
            if (it == train_reference.end()) {
                unreferenced_training_cases.insert(op->case_id);
                continue;
            }
            ledger.record_training_score(op->annotator_id, op->timestamp_ms,
                                         dice_h(op->lines, it->second, ingame_params));
            scored_training.push_back(
                {op->annotator_id, op->timestamp_ms, dice_h(op->lines, it->second, eval_params)});
        } else {
            crowd_test_by_case[op->case_id].push_back(*op);
        }
    }
    for (const auto& case_id : unreferenced_training_cases)
        report.skipped.push_back({case_id, "training case without expert reference"});
    for (const auto& [case_id, ops] : crowd_test_by_case) {
        if (expert_by_case.find(case_id) == expert_by_case.end())
            report.skipped.push_back({case_id, "no expert opinions"});
    }

    const SelectionPolicy policy{config.selection.k, config.selection.min_training_opinions,
                                 ingame_params};

    // Top-k selection and crowd consensus per test case; collect the bundles
    // for concordance and the per-case series for the statistics.
    std::vector<CaseBundle> bundles;
    std::vector<AgreementCase> agreement_cases;
    std::vector<CountMatchCase> count_cases;
    std::set<std::string> selected_users;

    for (const auto& [case_id, by_annotator] : expert_by_case) {
        if (case_split.at(case_id) != Split::test) continue;

        if (by_annotator.size() != panel_ids.size()) {
            report.skipped.push_back({case_id, "missing expert opinions"});
            continue;
        }
        const auto test_it = crowd_test_by_case.find(case_id);
        if (test_it == crowd_test_by_case.end()) {
            report.skipped.push_back({case_id, "no crowd opinions"});
            continue;
        }
        const std::vector<Opinion> selected = select_top_k(test_it->second, ledger, policy);
        if (selected.empty()) {
            report.skipped.push_back({case_id, "no eligible crowd opinions"});
            continue;
        }

        CaseBundle bundle;
        bundle.case_id = case_id;
        for (const auto& [id, op] : by_annotator) bundle.expert_opinions.push_back(op);
        bundle.crowd_consensus = build_consensus(selected, config.consensus);

        CountMatchCase cm;
        cm.crowd_count = static_cast<double>(bundle.crowd_consensus.lines.size());
        cm.full_reference_count = count_reference(bundle.expert_opinions);
        for (const auto& op : bundle.expert_opinions)
            cm.expert_counts.push_back(static_cast<double>(op.lines.size()));
        count_cases.push_back(std::move(cm));

        agreement_cases.push_back({bundle.expert_opinions, selected});
        for (const auto& op : selected) selected_users.insert(op.annotator_id);
        bundles.push_back(std::move(bundle));
    }

    ConcordanceResult conc = concordance(bundles, eval_params, config.consensus);
    for (const auto& s : conc.skipped) report.skipped.push_back(s);

    report.crowd_count_mse = conc.crowd_count_mse;
    report.expert_count_mse = conc.expert_count_mse;
    report.crowd_mean_dice = conc.crowd_mean_dice;
    report.expert_mean_dice = conc.expert_mean_dice;
    report.cases_evaluated = conc.cases.size();
    report.case_fold_comparisons = conc.case_fold_comparisons;
    report.crowd_users_selected = selected_users.size();

    // Per-case series for the paired tests and correlations.
    std::vector<double> crowd_dice, expert_dice, crowd_err, expert_err, dice_diff;
    for (const auto& ce : conc.cases) {
        crowd_dice.push_back(ce.mean_crowd_dice);
        expert_dice.push_back(ce.mean_expert_dice);
        crowd_err.push_back(ce.mean_crowd_sq_count_err);
        expert_err.push_back(ce.mean_expert_sq_count_err);
        dice_diff.push_back(ce.mean_crowd_dice - ce.mean_expert_dice);
    }

    if (crowd_err.size() >= 2) report.count_mse_test = stats::paired_t(crowd_err, expert_err);

    if (dice_diff.size() >= 10) {
        const auto mean_stat = [](std::span<const double> xs) { return stats::mean(xs); };
        report.dice_diff_replicates =
            stats::bootstrap_replicates(dice_diff, mean_stat, config.bootstrap);
        const stats::BcaResult ci = stats::bca_bootstrap(dice_diff, mean_stat, config.bootstrap);
        report.dice_diff_ci = std::make_pair(ci.low, ci.high);
    }

    if (agreement_cases.size() >= 3) {
        try {
            report.agreement_correlation = agreement_correlation(agreement_cases, eval_params);
        } catch (const stats::ZeroVarianceError&) {
            report.agreement_correlation = std::nullopt;
        } catch (const std::invalid_argument&) {
            report.agreement_correlation = std::nullopt;
        }
    }
    if (crowd_dice.size() >= 3) {
        try {
            report.concordance_correlation = stats::pearson(crowd_dice, expert_dice);
        } catch (const stats::ZeroVarianceError&) {
            report.concordance_correlation = std::nullopt;
        }
    }

    report.count_match_rate = count_match_rate(count_cases);
    report.curve = learning_curve(std::move(scored_training), config.eval.learning_bin_width);
    report.cases = std::move(conc.cases);
    return report;
}

}  // namespace bline::eval
