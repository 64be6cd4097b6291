#include "selfclust/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace selfclust {

CohesionScores cohesion(const Matrix& features, const Labels& labels, const Matrix& centroids, Distance metric,
                        const IndexList& pool) {
    if (labels.size() != static_cast<std::size_t>(features.rows()))
        throw std::invalid_argument("cohesion: one label per sample required");
    if (features.cols() != centroids.cols()) throw std::invalid_argument("cohesion: dimension mismatch");
    const auto k = static_cast<int>(centroids.rows());

    CohesionScores out;
    out.score.assign(features.rows(), 0.0);
    out.clusters.resize(k);
    for (int i : pool) {
        const int c = labels[i];
        if (c < 0 || c >= k) throw std::invalid_argument("cohesion: label out of range");
        out.score[i] = distance(features.row(i), centroids.row(c), metric);
        out.clusters[c].members.push_back(i);
    }
    for (int c = 0; c < k; ++c) {
        auto& cl = out.clusters[c];
        // Descending score; among equal scores the higher index comes first, so the
        // tail (the most reliable end) favours lower indices.
        std::sort(cl.members.begin(), cl.members.end(), [&](int a, int b) {
            if (out.score[a] != out.score[b]) return out.score[a] > out.score[b];
            return a > b;
        });
        cl.rho.reserve(cl.members.size());
        for (int i : cl.members) cl.rho.push_back(out.score[i]);
        if (cl.members.empty()) out.empty_clusters.push_back(c);
    }
    return out;
}

CohesionScores cohesion(const Matrix& features, const Labels& labels, const Matrix& centroids, Distance metric) {
    IndexList all(features.rows());
    std::iota(all.begin(), all.end(), 0);
    return cohesion(features, labels, centroids, metric, all);
}

int ccn_count(double delta, int n_active) {
    if (n_active <= 0) return 0;
    // The small slack keeps products such as 0.29 * 100 from flooring one short.
    const int m = static_cast<int>(std::floor(delta * n_active + 1e-9));
    return std::clamp(m, 1, n_active);
}

IndexList select_ccn(const CohesionScores& scores, double delta) {
    if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("select_ccn: delta must be in (0, 1]");
    IndexList selected;
    for (const auto& cl : scores.clusters) {
        const int n = static_cast<int>(cl.members.size());
        const int m = ccn_count(delta, n);
        selected.insert(selected.end(), cl.members.end() - m, cl.members.end());
    }
    std::sort(selected.begin(), selected.end());
    return selected;
}

ReliabilityState::ReliabilityState(int n) : v_(n, 0), active_(n) {
    std::iota(active_.begin(), active_.end(), 0);
}

IndexList ReliabilityState::reliable() const {
    IndexList out;
    out.reserve(frozen_.size());
    for (const auto& [i, label] : frozen_) out.push_back(i);
    return out;
}

void ReliabilityState::commit(const IndexList& indices, const Labels& labels) {
    if (indices.size() != labels.size()) throw std::invalid_argument("commit: one label per index required");
    if (indices.empty()) throw InvariantViolation("reliable set must grow strictly every iteration");
    for (std::size_t j = 0; j < indices.size(); ++j) {
        const int i = indices[j];
        if (i < 0 || i >= size()) throw std::out_of_range("commit: index out of range");
        if (v_[i]) throw InvariantViolation("sample " + std::to_string(i) + " is already reliable; its label is frozen");
        v_[i] = 1;
        frozen_.emplace(i, labels[j]);
    }
    std::erase_if(active_, [&](int i) { return v_[i] != 0; });
    history_.push_back(v_);
}

void ReliabilityState::check_invariants() const {
    int count = 0;
    for (int i = 0; i < size(); ++i) {
        if (v_[i]) {
            ++count;
            if (!frozen_.contains(i)) throw InvariantViolation("reliable sample without frozen label");
        }
    }
    if (count != static_cast<int>(frozen_.size())) throw InvariantViolation("frozen labels disagree with v");
    if (count + static_cast<int>(active_.size()) != size()) throw InvariantViolation("active pool disagrees with v");
    for (std::size_t t = 1; t < history_.size(); ++t) {
        int before = 0;
        int after = 0;
        for (int i = 0; i < size(); ++i) {
            if (history_[t - 1][i] && !history_[t][i]) throw InvariantViolation("a reliable sample was released");
            before += history_[t - 1][i];
            after += history_[t][i];
        }
        if (after <= before) throw InvariantViolation("reliable set did not grow");
    }
}

Split split(const ReliabilityState& state, const IndexList& previous_active) {
    Split out;
    for (int i : previous_active) (state.v()[i] ? out.newly_reliable : out.remaining).push_back(i);
    return out;
}

double advance_delta(double delta, double small_delta) {
    return std::min(1.0, delta + small_delta);
}

}  // namespace selfclust
