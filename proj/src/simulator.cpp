#include "bline/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "bline/metric.hpp"

namespace bline::sim {

namespace {

constexpr std::int64_t kContestStartMs = 1'000'000;
constexpr double kMeanGapMs = 30'000.0;
constexpr double kTruthMinSeparation = 12.0;

std::string padded_id(const char* prefix, std::size_t index, std::size_t population) {
    std::size_t width = 1;
    for (std::size_t v = population > 0 ? population - 1 : 0; v >= 10; v /= 10) ++width;
    width = std::max<std::size_t>(width, 3);
    std::string digits = std::to_string(index);
    std::string out(prefix);
    out.append(width > digits.size() ? width - digits.size() : 0, '0');
    out += digits;
    return out;
}

// One plausible line: near-vertical, top in the pleural band, bottom at the
// base of the field, x jittered within +/-5 of the centre.
LineSegment draw_line(Rng& rng, double center_x) {
    const double top_y = rng.uniform(20.0, 40.0);
    const double top_x = std::clamp(center_x + rng.uniform(-5.0, 5.0), 0.0, 100.0);
    const double bottom_x = std::clamp(center_x + rng.uniform(-5.0, 5.0), 0.0, 100.0);
    return LineSegment({top_x, top_y}, {bottom_x, 100.0});
}

std::vector<LineSegment> draw_separated_lines(Rng& rng, std::size_t want) {
    std::vector<LineSegment> lines;
    int attempts = 0;
    while (lines.size() < want && attempts < 500) {
        ++attempts;
        const LineSegment cand = draw_line(rng, rng.uniform(5.0, 95.0));
        bool ok = true;
        for (const auto& l : lines) {
            if (segment_hausdorff(cand, l) < kTruthMinSeparation) {
                ok = false;
                break;
            }
        }
        if (ok) lines.push_back(cand);
    }
    return lines;
}

void validate_config(const ContestConfig& cfg) {
    if (cfg.n_train_cases == 0 || cfg.n_test_cases == 0)
        throw std::invalid_argument("contest config: case counts must be >= 1");
    if (cfg.n_experts == 0 || cfg.n_crowd == 0)
        throw std::invalid_argument("contest config: population counts must be >= 1");
    if (cfg.train_test_ratio.first == 0 || cfg.train_test_ratio.second == 0)
        throw std::invalid_argument("contest config: ratio components must be >= 1");
    if (cfg.opinions_per_crowd_user <= 0.0)
        throw std::invalid_argument("contest config: opinions_per_crowd_user must be > 0");
}

}  // namespace

void validate(const AnnotatorModel& model) {
    const auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!prob(model.detect_prob_initial) || !prob(model.detect_prob_asymptote))
        throw std::invalid_argument("annotator model: detect probabilities must be in [0,1]");
    if (model.detect_prob_asymptote < model.detect_prob_initial)
        throw std::invalid_argument("annotator model: detect asymptote below initial");
    if (model.noise_sigma_initial < 0.0 || model.noise_sigma_asymptote < 0.0)
        throw std::invalid_argument("annotator model: sigmas must be >= 0");
    if (model.noise_sigma_asymptote > model.noise_sigma_initial)
        throw std::invalid_argument("annotator model: sigma asymptote above initial");
    if (model.learning_rate <= 0.0)
        throw std::invalid_argument("annotator model: learning_rate must be > 0");
    if (model.false_positive_rate < 0.0)
        throw std::invalid_argument("annotator model: false_positive_rate must be >= 0");
}

std::vector<TruthCase> generate_truth(const ContestConfig& cfg) {
    validate_config(cfg);
    std::vector<TruthCase> cases;
    cases.reserve(cfg.n_train_cases + cfg.n_test_cases);

    for (std::size_t i = 0; i < cfg.n_train_cases; ++i) {
        Rng rng = derive_rng(cfg.master_seed, "truth-train", i);
        TruthCase c;
        c.case_id = padded_id("train_", i, cfg.n_train_cases);
        c.split = Split::train;
        // Alternate B-line and no-B-line training frames for a balanced pool.
        if (i % 2 == 0) c.true_lines = draw_separated_lines(rng, 1 + rng.below(5));
        cases.push_back(std::move(c));
    }
    for (std::size_t i = 0; i < cfg.n_test_cases; ++i) {
        Rng rng = derive_rng(cfg.master_seed, "truth-test", i);
        TruthCase c;
        c.case_id = padded_id("test_", i, cfg.n_test_cases);
        c.split = Split::test;
        c.true_lines = draw_separated_lines(rng, 1 + rng.below(5));
        cases.push_back(std::move(c));
    }
    return cases;
}

Opinion simulate_opinion(const AnnotatorModel& model, const TruthCase& truth,
                         std::size_t n_training_seen, Rng& rng,
                         std::string annotator_id, std::int64_t timestamp_ms) {
    const double f = std::exp(-static_cast<double>(n_training_seen) / model.learning_rate);
    const double detect_prob =
        model.detect_prob_asymptote + (model.detect_prob_initial - model.detect_prob_asymptote) * f;
    const double sigma =
        model.noise_sigma_asymptote + (model.noise_sigma_initial - model.noise_sigma_asymptote) * f;

    Opinion op;
    op.case_id = truth.case_id;
    op.annotator_id = std::move(annotator_id);
    op.timestamp_ms = timestamp_ms;
    op.split = truth.split;

    const auto noisy_copy = [&](const LineSegment& line) {
        // Redraw on the (vanishingly rare) degenerate outcome so emitted
        // opinions always pass ingestion validation.
        for (int attempt = 0; attempt < 8; ++attempt) {
            const Point2 a{std::clamp(rng.normal(line.top.x, sigma), 0.0, 100.0),
                           std::clamp(rng.normal(line.top.y, sigma), 0.0, 100.0)};
            const Point2 b{std::clamp(rng.normal(line.bottom.x, sigma), 0.0, 100.0),
                           std::clamp(rng.normal(line.bottom.y, sigma), 0.0, 100.0)};
            if (a != b) return LineSegment(a, b);
        }
        return line;
    };

    for (const auto& line : truth.true_lines) {
        if (rng.uniform() < detect_prob) op.lines.push_back(noisy_copy(line));
    }
    const std::uint64_t n_spurious = rng.poisson(model.false_positive_rate);
    for (std::uint64_t i = 0; i < n_spurious; ++i)
        op.lines.push_back(draw_line(rng, rng.uniform(5.0, 95.0)));
    return op;
}

SchedulePools make_schedule_pools(std::span<const TruthCase> truth) {
    SchedulePools pools;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i].split == Split::test) {
            pools.test.push_back(i);
        } else if (truth[i].true_lines.empty()) {
            pools.train_empty.push_back(i);
        } else {
            pools.train_with_lines.push_back(i);
        }
    }
    return pools;
}

std::size_t pick_case(Rng& rng, const SchedulePools& pools,
                      std::pair<unsigned, unsigned> train_test_ratio) {
    const double train_frac =
        static_cast<double>(train_test_ratio.first) /
        static_cast<double>(train_test_ratio.first + train_test_ratio.second);
    const bool have_train = !pools.train_with_lines.empty() || !pools.train_empty.empty();
    const bool have_test = !pools.test.empty();
    if (!have_train && !have_test) throw std::invalid_argument("pick_case: empty pools");

    const bool pick_train = have_train && (!have_test || rng.uniform() < train_frac);
    if (pick_train) {
        const auto& first = pools.train_with_lines;
        const auto& second = pools.train_empty;
        if (first.empty()) return second[rng.below(second.size())];
        if (second.empty()) return first[rng.below(first.size())];
        const auto& pool = rng.uniform() < 0.5 ? first : second;
        return pool[rng.below(pool.size())];
    }
    return pools.test[rng.below(pools.test.size())];
}

ContestResult run_contest(const ContestConfig& cfg,
                          std::span<const AnnotatorModel> experts,
                          std::span<const AnnotatorModel> crowd,
                          const RunConfig& run) {
    validate_config(cfg);
    if (experts.size() != cfg.n_experts)
        throw std::invalid_argument("run_contest: expert panel size mismatch");
    if (crowd.size() != cfg.n_crowd)
        throw std::invalid_argument("run_contest: crowd size mismatch");
    for (const auto& m : experts) validate(m);
    for (const auto& m : crowd) validate(m);

    ContestResult result{generate_truth(cfg), {}, {}, QscoreLedger(run.selection.window)};
    const auto& truth = result.truth;

    // Experts annotate every case once, before the contest opens.
    std::int64_t expert_ts = 1;
    for (std::size_t e = 0; e < experts.size(); ++e) {
        const std::string id = expert_id(e, cfg.n_experts);
        Rng rng = derive_rng(cfg.master_seed ^ experts[e].response_seed, id);
        for (const auto& c : truth)
            result.expert_opinions.push_back(
                simulate_opinion(experts[e], c, 0, rng, id, expert_ts++));
    }

    // All-experts consensus per training case, the in-game feedback reference.
    std::map<std::string, std::vector<LineSegment>> train_reference;
    {
        std::map<std::string, std::vector<Opinion>> by_case;
        for (const auto& op : result.expert_opinions)
            if (op.split == Split::train) by_case[op.case_id].push_back(op);
        for (auto& [case_id, ops] : by_case)
            train_reference[case_id] = build_consensus(ops, run.consensus).lines;
    }

    const SchedulePools pools = make_schedule_pools(truth);
    const SimilarityParams ingame{run.metric.ingame_cutoff};

    std::vector<Opinion> stream;
    for (std::size_t u = 0; u < crowd.size(); ++u) {
        const std::string id = crowd_id(u, cfg.n_crowd);
        Rng rng = derive_rng(cfg.master_seed ^ crowd[u].response_seed, id);
        const std::uint64_t n_opinions = rng.poisson(cfg.opinions_per_crowd_user);
        std::int64_t ts = kContestStartMs;
        std::size_t training_seen = 0;
        for (std::uint64_t k = 0; k < n_opinions; ++k) {
            ts += std::max<std::int64_t>(1, std::llround(rng.exponential(kMeanGapMs)));
            const TruthCase& c = truth[pick_case(rng, pools, cfg.train_test_ratio)];
            stream.push_back(simulate_opinion(crowd[u], c, training_seen, rng, id, ts));
            if (c.split == Split::train) ++training_seen;
        }
    }
    std::sort(stream.begin(), stream.end(), [](const Opinion& a, const Opinion& b) {
        if (a.timestamp_ms != b.timestamp_ms) return a.timestamp_ms < b.timestamp_ms;
        return a.annotator_id < b.annotator_id;
    });

    // Feedback: score each training opinion against the reference, in
    // submission order, building the Qscore ledger.
    for (const auto& op : stream) {
        if (op.split != Split::train) continue;
        const auto it = train_reference.find(op.case_id);
        if (it == train_reference.end()) continue;
        const double score = dice_h(op.lines, it->second, ingame);
        result.ledger.record_training_score(op.annotator_id, op.timestamp_ms, score);
    }

    result.crowd_opinions = std::move(stream);
    return result;
}

std::vector<AnnotatorModel> default_expert_panel(const ContestConfig& cfg) {
    std::vector<AnnotatorModel> panel;
    for (std::size_t e = 0; e < cfg.n_experts; ++e) {
        AnnotatorModel m;
        m.detect_prob_initial = 0.96;
        m.detect_prob_asymptote = 0.96;
        m.noise_sigma_initial = 0.40;
        m.noise_sigma_asymptote = 0.40;
        m.learning_rate = 1.0;  // unused: initial == asymptote
        m.false_positive_rate = 0.04;
        m.response_seed = 0;
        panel.push_back(m);
    }
    return panel;
}

std::vector<AnnotatorModel> default_crowd_population(const ContestConfig& cfg) {
    std::vector<AnnotatorModel> crowd;
    for (std::size_t u = 0; u < cfg.n_crowd; ++u) {
        Rng rng = derive_rng(cfg.master_seed, "crowd-model", u);
        AnnotatorModel m;
        m.detect_prob_initial = rng.uniform(0.45, 0.75);
        m.detect_prob_asymptote = rng.uniform(0.93, 0.998);
        m.noise_sigma_asymptote = rng.uniform(0.20, 0.70);
        m.noise_sigma_initial = m.noise_sigma_asymptote + rng.uniform(1.2, 3.0);
        m.learning_rate = rng.uniform(5.0, 18.0);
        m.false_positive_rate = rng.uniform(0.0, 0.06);
        m.response_seed = 0;
        crowd.push_back(m);
    }
    return crowd;
}

std::string expert_id(std::size_t index, std::size_t n_experts) {
    return padded_id("expert_", index, n_experts);
}

std::string crowd_id(std::size_t index, std::size_t n_crowd) {
    return padded_id("user_", index, n_crowd);
}

}  // namespace bline::sim
