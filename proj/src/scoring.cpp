#include "bline/scoring.hpp"

#include <algorithm>
#include <stdexcept>

namespace bline {

void QscoreLedger::record_training_score(const std::string& annotator_id,
                                         std::int64_t timestamp_ms, double score) {
    if (score < 0.0 || score > 1.0)
        throw std::invalid_argument("record_training_score: score outside [0,1]");
    auto& history = entries_[annotator_id];
    if (!history.empty() && timestamp_ms <= history.back().timestamp_ms)
        throw std::invalid_argument("record_training_score: non-monotonic timestamp for " +
                                    annotator_id);
    history.push_back({timestamp_ms, score});
}

const std::vector<QscoreEntry>* QscoreLedger::entries(std::string_view annotator_id) const {
    const auto it = entries_.find(annotator_id);
    return it == entries_.end() ? nullptr : &it->second;
}

std::optional<double> QscoreLedger::qscore(std::string_view annotator_id,
                                           std::int64_t at_time,
                                           std::size_t min_training) const {
    const auto* history = entries(annotator_id);
    if (history == nullptr) return std::nullopt;

    // Entries are time-sorted; count those strictly before at_time.
    const auto end = std::lower_bound(history->begin(), history->end(), at_time,
                                      [](const QscoreEntry& e, std::int64_t t) {
                                          return e.timestamp_ms < t;
                                      });
    const std::size_t available = static_cast<std::size_t>(end - history->begin());
    if (available < std::max<std::size_t>(min_training, 1)) return std::nullopt;

    const std::size_t take = window_ == 0 ? available : std::min(window_, available);
    double sum = 0.0;
    for (auto it = end - static_cast<std::ptrdiff_t>(take); it != end; ++it) sum += it->score;
    return sum / static_cast<double>(take);
}

std::vector<Opinion> select_top_k(std::span<const Opinion> opinions_on_case,
                                  const QscoreLedger& ledger,
                                  const SelectionPolicy& policy) {
    if (policy.k == 0) throw std::invalid_argument("select_top_k: k must be >= 1");
    for (const auto& op : opinions_on_case) {
        if (op.case_id != opinions_on_case.front().case_id)
            throw std::invalid_argument("select_top_k: opinions mix case_ids");
        if (op.split != Split::test)
            throw std::invalid_argument("select_top_k: expected test-split opinions");
    }

    // Most recent opinion per annotator; on equal timestamps the later
    // stream position wins.
    std::map<std::string, const Opinion*> latest;
    for (const auto& op : opinions_on_case) {
        auto [it, inserted] = latest.try_emplace(op.annotator_id, &op);
        if (!inserted && op.timestamp_ms >= it->second->timestamp_ms) it->second = &op;
    }

    struct Ranked {
        double qscore;
        const Opinion* opinion;
    };
    std::vector<Ranked> ranked;
    for (const auto& [annotator, op] : latest) {
        const auto q = ledger.qscore(annotator, op->timestamp_ms, policy.min_training_opinions);
        if (q.has_value()) ranked.push_back({*q, op});
    }
    std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
        if (a.qscore != b.qscore) return a.qscore > b.qscore;
        if (a.opinion->timestamp_ms != b.opinion->timestamp_ms)
            return a.opinion->timestamp_ms > b.opinion->timestamp_ms;
        return a.opinion->annotator_id < b.opinion->annotator_id;
    });

    std::vector<Opinion> out;
    for (std::size_t i = 0; i < ranked.size() && i < policy.k; ++i)
        out.push_back(*ranked[i].opinion);
    return out;
}

}  // namespace bline
