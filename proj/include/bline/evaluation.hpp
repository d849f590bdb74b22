#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bline/config.hpp"
#include "bline/consensus.hpp"
#include "bline/metric.hpp"
#include "bline/stats.hpp"

namespace bline::eval {

// Reference standard for one fold: the consensus of every expert except the
// one being evaluated.
ConsensusAnnotation loo_consensus(std::span<const Opinion> expert_opinions,
                                  std::size_t leave_out,
                                  const ConsensusParams& params);

// Mean line count over the contributing experts.
double count_reference(std::span<const Opinion> expert_opinions);

struct FoldResult {
    std::size_t left_out;
    double reference_count;
    std::size_t reference_line_count;
    double expert_dice;
    double crowd_dice;
    double expert_sq_count_err;
    double crowd_sq_count_err;
};

struct CaseEvaluation {
    std::string case_id;
    std::vector<FoldResult> folds;
    double mean_expert_dice;
    double mean_crowd_dice;
    double mean_expert_sq_count_err;
    double mean_crowd_sq_count_err;
};

struct SkippedCase {
    std::string case_id;
    std::string reason;
};

// All inputs needed to evaluate one test case.
struct CaseBundle {
    std::string case_id;
    std::vector<Opinion> expert_opinions;  // one per panel member, panel order
    ConsensusAnnotation crowd_consensus;
};

struct ConcordanceResult {
    std::vector<CaseEvaluation> cases;
    std::vector<SkippedCase> skipped;
    std::size_t case_fold_comparisons = 0;
    double crowd_count_mse = 0.0;
    double expert_count_mse = 0.0;
    double crowd_mean_dice = 0.0;
    double expert_mean_dice = 0.0;
};

// Leave-one-out concordance over all bundles: per case and fold, the
// left-out expert and the crowd consensus are both compared to the same
// reference; aggregates are means over every (case, fold). Cases with
// missing expert opinions are skipped and itemized, never imputed.
ConcordanceResult concordance(std::span<const CaseBundle> bundles,
                              const SimilarityParams& metric_params,
                              const ConsensusParams& consensus_params);

struct CountMatchCase {
    double crowd_count;
    double full_reference_count;        // mean count over the whole panel
    std::vector<double> expert_counts;  // individual panel counts
};

// Over cases where the crowd count differs from the full-panel reference
// count: the fraction where at least one individual expert count equals the
// crowd count. Empty restriction set -> nullopt.
std::optional<double> count_match_rate(std::span<const CountMatchCase> cases);

struct AgreementCase {
    std::vector<Opinion> experts;
    std::vector<Opinion> crowd;  // the selected top-k opinions
};

// Mean pairwise Dice-H within a group of opinions.
double mean_pairwise_dice(std::span<const Opinion> opinions, const SimilarityParams& params);

// Pearson correlation between per-case expert agreement and per-case crowd
// agreement (mean pairwise Dice-H on each side). Cases with fewer than two
// opinions on either side are dropped; fewer than 3 usable cases is an error.
stats::PearsonResult agreement_correlation(std::span<const AgreementCase> cases,
                                           const SimilarityParams& params);

struct ScoredOpinion {
    std::string annotator_id;
    std::int64_t timestamp_ms;
    double score;
};

struct LearningCurveBin {
    std::size_t bin_index;          // 0-based
    std::size_t first_opinion_idx;  // 1-based inclusive opinion index range
    std::size_t last_opinion_idx;
    double mean_score;
    double sem;
    std::size_t annotator_count;
    std::size_t opinion_count;
    bool low_support;  // fewer than 2 contributing annotators
};

// Bins each annotator's training opinions by per-annotator submission index
// and pools scores across annotators per bin.
std::vector<LearningCurveBin> learning_curve(std::vector<ScoredOpinion> opinions,
                                             std::size_t bin_width);

struct EvalReport {
    double crowd_count_mse = 0.0;
    double expert_count_mse = 0.0;
    std::optional<stats::TTestResult> count_mse_test;
    double crowd_mean_dice = 0.0;
    double expert_mean_dice = 0.0;
    std::optional<std::pair<double, double>> dice_diff_ci;
    std::optional<stats::PearsonResult> agreement_correlation;
    std::optional<stats::PearsonResult> concordance_correlation;
    std::optional<double> count_match_rate;
    std::size_t cases_evaluated = 0;
    std::size_t case_fold_comparisons = 0;
    std::size_t crowd_users_selected = 0;  // distinct users behind the consensus
    std::vector<LearningCurveBin> curve;
    std::vector<SkippedCase> skipped;
    std::vector<double> dice_diff_replicates;  // bootstrap distribution for plotting
    std::vector<CaseEvaluation> cases;
};

struct EvaluationInput {
    std::vector<Opinion> expert_opinions;  // experts over all cases, both splits
    std::vector<Opinion> crowd_opinions;   // full crowd stream, both splits
};

// The full protocol: build training references from the expert consensus,
// replay the crowd stream into a Qscore ledger, select the top-k opinions
// per test case, form crowd consensus annotations, and compare both crowd
// and individual experts against leave-one-out references.
EvalReport run_evaluation(const EvaluationInput& input, const RunConfig& config);

}  // namespace bline::eval
