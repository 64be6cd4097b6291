#pragma once

#include "selfclust/types.hpp"

#include <map>
#include <vector>

namespace selfclust {

/// Per-sample distance to the assigned centroid, grouped per cluster.
struct CohesionScores {
    struct Cluster {
        IndexList members;           ///< sample indices, ordered like `rho`
        std::vector<double> rho;     ///< member scores, nonincreasing
    };

    std::vector<double> score;       ///< N entries; 0 for samples outside the scored pool
    std::vector<Cluster> clusters;   ///< K entries
    std::vector<int> empty_clusters; ///< clusters with no scored member
};

/// Scores the samples in `pool` by their distance to the centroid of their label.
CohesionScores cohesion(const Matrix& features, const Labels& labels, const Matrix& centroids,
                        Distance metric, const IndexList& pool);
/// Scores every sample.
CohesionScores cohesion(const Matrix& features, const Labels& labels, const Matrix& centroids,
                        Distance metric);

/// Number of members promoted from a cluster with `n_active` scored members:
/// max(1, floor(delta * n_active)), or 0 for an empty cluster.
int ccn_count(double delta, int n_active);

/// Per cluster, the ccn_count(delta, n) members with the smallest scores; equal scores
/// are broken by lower sample index. Returned sorted ascending.
IndexList select_ccn(const CohesionScores& scores, double delta);

/// Reliable (v = 1) and active (v = 0) bookkeeping with frozen pseudo-labels.
class ReliabilityState {
public:
    explicit ReliabilityState(int n = 0);

    int size() const { return static_cast<int>(v_.size()); }
    const std::vector<unsigned char>& v() const { return v_; }
    const std::map<int, int>& frozen_labels() const { return frozen_; }
    /// Active pool X_s, ascending.
    const IndexList& active() const { return active_; }
    /// Reliable set X_l, ascending.
    IndexList reliable() const;
    int reliable_count() const { return static_cast<int>(frozen_.size()); }
    /// v snapshot after each commit.
    const std::vector<std::vector<unsigned char>>& history() const { return history_; }

    /// Marks `indices` reliable with the given labels. Every index must currently be
    /// active and the set must be nonempty; otherwise InvariantViolation is thrown.
    void commit(const IndexList& indices, const Labels& labels);

    /// Throws InvariantViolation if the history is not a strictly growing chain or the
    /// frozen map disagrees with v.
    void check_invariants() const;

private:
    std::vector<unsigned char> v_;
    std::map<int, int> frozen_;
    IndexList active_;
    std::vector<std::vector<unsigned char>> history_;
};

/// Partition of the previous active pool into newly reliable (X_st) and still
/// active (X_ss) samples.
struct Split {
    IndexList newly_reliable;
    IndexList remaining;
};

/// `previous_active` is X_s before the latest commit.
Split split(const ReliabilityState& state, const IndexList& previous_active);

/// min(1, delta + small_delta).
double advance_delta(double delta, double small_delta);

}  // namespace selfclust
