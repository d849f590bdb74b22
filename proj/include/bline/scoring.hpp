#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bline/consensus.hpp"
#include "bline/metric.hpp"

namespace bline {

struct QscoreEntry {
    std::int64_t timestamp_ms;
    double score;  // training-case Dice-H in [0,1]
};

// Per-annotator history of training-case scores. Entries are strictly
// increasing in timestamp per annotator; the trailing window is a positive
// entry count, or 0 meaning "all history".
class QscoreLedger {
public:
    explicit QscoreLedger(std::size_t window = 0) : window_(window) {}

    // Appends one training score. Rejects non-monotonic timestamps and
    // scores outside [0,1].
    void record_training_score(const std::string& annotator_id,
                               std::int64_t timestamp_ms, double score);

    // Trailing mean of the annotator's last `window` scores strictly before
    // at_time. Empty when fewer than min_training such scores exist.
    std::optional<double> qscore(std::string_view annotator_id,
                                 std::int64_t at_time,
                                 std::size_t min_training = 1) const;

    std::size_t window() const { return window_; }
    const std::vector<QscoreEntry>* entries(std::string_view annotator_id) const;
    const std::map<std::string, std::vector<QscoreEntry>, std::less<>>& all() const {
        return entries_;
    }

private:
    std::size_t window_;
    std::map<std::string, std::vector<QscoreEntry>, std::less<>> entries_;
};

struct SelectionPolicy {
    std::size_t k = 5;
    std::size_t min_training_opinions = 10;
    SimilarityParams qscore_cutoff_params = kInGameSimilarity;
};

// Reduces the opinions on one test case to the most recent per annotator,
// drops annotators without an eligible Qscore at their submission time, and
// returns the top k ranked by Qscore (ties: later timestamp, then
// annotator_id).
std::vector<Opinion> select_top_k(std::span<const Opinion> opinions_on_case,
                                  const QscoreLedger& ledger,
                                  const SelectionPolicy& policy);

}  // namespace bline
