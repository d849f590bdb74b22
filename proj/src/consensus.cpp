#include "bline/consensus.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

namespace bline {

namespace {

LineSegment member_mean(const std::vector<ClusterMember>& members) {
    Point2 top{0.0, 0.0}, bottom{0.0, 0.0};
    for (const auto& m : members) {
        top.x += m.line.top.x;
        top.y += m.line.top.y;
        bottom.x += m.line.bottom.x;
        bottom.y += m.line.bottom.y;
    }
    const double n = static_cast<double>(members.size());
    return LineSegment({top.x / n, top.y / n}, {bottom.x / n, bottom.y / n});
}

double linkage_update(Linkage linkage, double d_ai, double d_bi,
                      std::size_t size_a, std::size_t size_b) {
    switch (linkage) {
        case Linkage::single:
            return std::min(d_ai, d_bi);
        case Linkage::complete:
            return std::max(d_ai, d_bi);
        case Linkage::average: {
            const double na = static_cast<double>(size_a);
            const double nb = static_cast<double>(size_b);
            return (na * d_ai + nb * d_bi) / (na + nb);
        }
    }
    throw std::logic_error("linkage_update: unknown linkage");
}

}  // namespace

std::vector<Cluster> cluster_lines(std::span<const Opinion> opinions,
                                   double merge_cutoff,
                                   Linkage linkage) {
    if (merge_cutoff <= 0.0)
        throw std::invalid_argument("cluster_lines: merge_cutoff must be > 0");

    std::set<std::string> annotators;
    for (const auto& op : opinions) {
        if (op.case_id != opinions.front().case_id)
            throw std::invalid_argument("cluster_lines: opinions mix case_ids");
        if (!annotators.insert(op.annotator_id).second)
            throw std::invalid_argument("cluster_lines: more than one opinion for annotator " +
                                        op.annotator_id);
    }

    // Pool lines in canonical (annotator_id, line index) order.
    std::vector<ClusterMember> pool;
    std::vector<const Opinion*> sorted;
    for (const auto& op : opinions) sorted.push_back(&op);
    std::sort(sorted.begin(), sorted.end(), [](const Opinion* a, const Opinion* b) {
        return a->annotator_id < b->annotator_id;
    });
    for (const Opinion* op : sorted)
        for (const auto& line : op->lines) pool.push_back({op->annotator_id, line});

    const std::size_t n = pool.size();
    if (n == 0) return {};

    // Naive agglomeration on an explicit distance matrix; cases hold at most
    // a few dozen lines, so O(n^3) is plenty.
    std::vector<std::vector<std::size_t>> groups(n);
    std::vector<double> dist(n * n, 0.0);
    std::vector<char> active(n, 1);
    for (std::size_t i = 0; i < n; ++i) groups[i] = {i};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = segment_hausdorff(pool[i].line, pool[j].line);
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }

    while (true) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t a = n, b = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (!active[i]) continue;
            for (std::size_t j = i + 1; j < n; ++j) {
                if (!active[j]) continue;
                if (dist[i * n + j] < best) {
                    best = dist[i * n + j];
                    a = i;
                    b = j;
                }
            }
        }
        if (a == n || best > merge_cutoff) break;

        const std::size_t size_a = groups[a].size(), size_b = groups[b].size();
        for (std::size_t i = 0; i < n; ++i) {
            if (!active[i] || i == a || i == b) continue;
            const double d = linkage_update(linkage, dist[a * n + i], dist[b * n + i],
                                            size_a, size_b);
            dist[a * n + i] = d;
            dist[i * n + a] = d;
        }
        groups[a].insert(groups[a].end(), groups[b].begin(), groups[b].end());
        std::sort(groups[a].begin(), groups[a].end());
        active[b] = 0;
    }

    // Merges always land in the lower slot, so slot order == order of each
    // cluster's first pooled member. Emit in that order.
    std::vector<Cluster> result;
    for (std::size_t i = 0; i < n; ++i) {
        if (!active[i]) continue;
        Cluster c;
        for (const std::size_t idx : groups[i]) c.members.push_back(pool[idx]);
        c.centroid = member_mean(c.members);
        result.push_back(std::move(c));
    }
    return result;
}

Cluster dedup_within_cluster(const Cluster& c) {
    if (c.members.empty())
        throw std::invalid_argument("dedup_within_cluster: empty cluster");

    // First pass: per annotator, remember the member closest to the
    // pre-dedup centroid (earlier position wins ties).
    std::map<std::string, std::pair<std::size_t, double>> best;
    for (std::size_t i = 0; i < c.members.size(); ++i) {
        const double d = segment_hausdorff(c.members[i].line, c.centroid);
        auto it = best.find(c.members[i].annotator_id);
        if (it == best.end() || d < it->second.second)
            best[c.members[i].annotator_id] = {i, d};
    }

    Cluster out;
    for (std::size_t i = 0; i < c.members.size(); ++i) {
        if (best.at(c.members[i].annotator_id).first == i)
            out.members.push_back(c.members[i]);
    }
    out.centroid = member_mean(out.members);
    return out;
}

ConsensusAnnotation build_consensus(std::span<const Opinion> opinions,
                                    const ConsensusParams& params) {
    if (opinions.empty())
        throw std::invalid_argument("build_consensus: no opinions");
    if (params.majority_fraction <= 0.0 || params.majority_fraction > 1.0)
        throw std::invalid_argument("build_consensus: majority_fraction must be in (0,1]");

    const std::size_t n_annotators = opinions.size();
    ConsensusAnnotation out;
    out.case_id = opinions.front().case_id;
    out.contributing_annotators = n_annotators;

    const double threshold = params.majority_fraction * static_cast<double>(n_annotators);
    for (const Cluster& raw : cluster_lines(opinions, params.merge_cutoff, params.linkage)) {
        const Cluster deduped = dedup_within_cluster(raw);
        // "count <= majority_fraction * N" clusters are discarded; survival
        // requires a strict majority.
        if (static_cast<double>(deduped.members.size()) <= threshold) continue;
        out.lines.push_back(deduped.centroid);
    }

    std::sort(out.lines.begin(), out.lines.end(), [](const LineSegment& a, const LineSegment& b) {
        if (a.top.x != b.top.x) return a.top.x < b.top.x;
        if (a.top.y != b.top.y) return a.top.y < b.top.y;
        if (a.bottom.x != b.bottom.x) return a.bottom.x < b.bottom.x;
        return a.bottom.y < b.bottom.y;
    });
    return out;
}

}  // namespace bline
