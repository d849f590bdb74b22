#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bline/geometry.hpp"

namespace bline {

enum class Split { train, test };

// One annotator's full line set for one case at one time. An empty line
// list is a legitimate opinion ("no B-lines here").
struct Opinion {
    std::string case_id;
    std::string annotator_id;
    std::vector<LineSegment> lines;
    std::int64_t timestamp_ms = 0;
    Split split = Split::train;
};

enum class Linkage { single, complete, average };

struct ClusterMember {
    std::string annotator_id;
    LineSegment line;
};

// A group of near-coincident lines pooled across annotators. The centroid
// endpoints are the coordinate means of the members' canonical endpoints.
struct Cluster {
    std::vector<ClusterMember> members;
    LineSegment centroid;
};

struct ConsensusParams {
    double merge_cutoff = 10.0;
    double majority_fraction = 0.5;
    Linkage linkage = Linkage::complete;
};

struct ConsensusAnnotation {
    std::string case_id;
    std::vector<LineSegment> lines;
    std::size_t contributing_annotators = 0;
};

// Agglomerative clustering over all lines pooled from the given opinions,
// merging while the minimum inter-cluster linkage distance (on
// segment_hausdorff) stays <= merge_cutoff. Members are kept in the
// canonical (annotator_id, line index) order so downstream tie-breaks are
// deterministic.
//
// Preconditions: all opinions share one case_id and each annotator appears
// at most once; violations are rejected.
std::vector<Cluster> cluster_lines(std::span<const Opinion> opinions,
                                   double merge_cutoff,
                                   Linkage linkage = Linkage::complete);

// Collapses multiple lines from the same annotator to the single one
// closest (segment_hausdorff) to the pre-dedup centroid, ties broken by
// earlier member position. The returned cluster's centroid is recomputed
// over the survivors.
Cluster dedup_within_cluster(const Cluster& c);

// Full pipeline: cluster -> dedup -> discard clusters whose member count is
// <= majority_fraction * N (N counts every opinion, including empty ones)
// -> average each surviving cluster into one consensus line. Output lines
// sorted by top x (then top y, bottom x, bottom y).
ConsensusAnnotation build_consensus(std::span<const Opinion> opinions,
                                    const ConsensusParams& params);

}  // namespace bline
