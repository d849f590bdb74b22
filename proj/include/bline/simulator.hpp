#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bline/config.hpp"
#include "bline/consensus.hpp"
#include "bline/rng.hpp"
#include "bline/scoring.hpp"

namespace bline::sim {

// The synthetic stand-in for the clinical frames: per case, the "real"
// line set annotators attempt to reproduce.
struct TruthCase {
    std::string case_id;
    Split split = Split::train;
    std::vector<LineSegment> true_lines;
};

// Stochastic annotator. Skill moves exponentially from the initial values
// toward the asymptotes as training cases are seen:
//   f = exp(-n_training_seen / learning_rate)
//   detect_prob = asymptote + (initial - asymptote) * f   (same for sigma)
// Each true line is detected independently; detected endpoints get i.i.d.
// Gaussian noise; spurious lines arrive Poisson(false_positive_rate).
struct AnnotatorModel {
    double detect_prob_initial = 0.9;
    double detect_prob_asymptote = 0.9;
    double noise_sigma_initial = 1.0;
    double noise_sigma_asymptote = 1.0;
    double learning_rate = 30.0;  // training-case scale of the exponential
    double false_positive_rate = 0.0;
    std::uint64_t response_seed = 0;
};

void validate(const AnnotatorModel& model);

// Deterministic truth corpus. Training cases alternate between B-line and
// no-B-line; test cases always carry 1-5 lines. Lines are near-vertical,
// top endpoint in the y in [20,40] band, bottom at y = 100, and mutually
// separated by Hausdorff distance >= 12 so they never merge under the
// default consensus cutoff.
std::vector<TruthCase> generate_truth(const ContestConfig& cfg);

// One opinion from one annotator on one case, drawn from the given stream.
Opinion simulate_opinion(const AnnotatorModel& model, const TruthCase& truth,
                         std::size_t n_training_seen, Rng& rng,
                         std::string annotator_id, std::int64_t timestamp_ms);

// Case-draw pools for the gamified schedule: training frames at relative
// frequency ratio.first vs ratio.second for test frames, B-line and
// no-B-line training frames equally likely, test frames uniform.
struct SchedulePools {
    std::vector<std::size_t> train_with_lines;  // indices into the truth list
    std::vector<std::size_t> train_empty;
    std::vector<std::size_t> test;
};

SchedulePools make_schedule_pools(std::span<const TruthCase> truth);
std::size_t pick_case(Rng& rng, const SchedulePools& pools,
                      std::pair<unsigned, unsigned> train_test_ratio);

struct ContestResult {
    std::vector<TruthCase> truth;
    std::vector<Opinion> expert_opinions;  // every expert on every case, pre-contest
    std::vector<Opinion> crowd_opinions;   // timestamp-ordered stream
    QscoreLedger ledger;                   // in-game feedback scores (cutoff 10)
};

// Runs the full contest. Experts annotate every case once with fixed skill;
// crowd users draw randomized case sequences, and every training opinion is
// scored against the all-experts consensus and recorded into the ledger.
// All randomness is per-user, derived from (master_seed, annotator_id), so
// the result is fully deterministic and users never perturb each other.
ContestResult run_contest(const ContestConfig& cfg,
                          std::span<const AnnotatorModel> experts,
                          std::span<const AnnotatorModel> crowd,
                          const RunConfig& run);

// Stock populations for the simulate command and the test harness: a fixed
// high-skill expert panel and a heterogeneous learning crowd whose per-user
// parameters are drawn from (master_seed, user index).
std::vector<AnnotatorModel> default_expert_panel(const ContestConfig& cfg);
std::vector<AnnotatorModel> default_crowd_population(const ContestConfig& cfg);

std::string expert_id(std::size_t index, std::size_t n_experts);
std::string crowd_id(std::size_t index, std::size_t n_crowd);

}  // namespace bline::sim
