#pragma once

#include <cstdint>
#include <utility>

#include "bline/consensus.hpp"
#include "bline/metric.hpp"
#include "bline/stats.hpp"

namespace bline {

struct MetricConfig {
    double eval_cutoff = 5.0;    // concordance / reporting
    double ingame_cutoff = 10.0; // feedback scores and Qscores
};

struct SelectionConfig {
    std::size_t k = 5;
    std::size_t window = 0;  // trailing Qscore window, 0 = all history
    std::size_t min_training_opinions = 10;
};

struct EvalConfig {
    std::size_t learning_bin_width = 25;
};

struct ContestConfig {
    std::size_t n_train_cases = 200;
    std::size_t n_test_cases = 200;
    std::pair<unsigned, unsigned> train_test_ratio{1, 2};
    std::size_t n_experts = 5;
    std::size_t n_crowd = 200;
    double opinions_per_crowd_user = 99.0;  // mean draws per user
    std::uint64_t master_seed = 1789;
};

// Resolved configuration for a whole run. Defaults reproduce the standard
// operating constants: cutoffs 5 and 10, merge cutoff 10, strict majority
// at 50%, top-5 selection.
struct RunConfig {
    MetricConfig metric;
    ConsensusParams consensus;
    SelectionConfig selection;
    stats::BootstrapConfig bootstrap{10000, 0.05, 42};
    ContestConfig sim;
    EvalConfig eval;
};

}  // namespace bline
