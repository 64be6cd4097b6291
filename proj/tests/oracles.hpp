#pragma once

// Brute-force reference implementations used as test oracles. They favour
// obviousness over speed and share no code with the library under test.

#include "selfclust/learner.hpp"
#include "selfclust/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <vector>

namespace oracle {

using selfclust::Labels;

/// Pair counts by visiting all n(n-1)/2 pairs.
inline selfclust::PairConfusion pairs(const Labels& truth, const Labels& pred) {
    selfclust::PairConfusion pc;
    for (std::size_t i = 0; i < truth.size(); ++i)
        for (std::size_t j = i + 1; j < truth.size(); ++j) {
            const bool same_t = truth[i] == truth[j];
            const bool same_p = pred[i] == pred[j];
            if (same_t && same_p) ++pc.tp;
            else if (!same_t && same_p) ++pc.fp;
            else if (same_t && !same_p) ++pc.fn;
            else ++pc.tn;
        }
    return pc;
}

inline double jc(const selfclust::PairConfusion& pc) {
    const auto d = pc.tp + pc.fp + pc.fn;
    return d == 0 ? 1.0 : static_cast<double>(pc.tp) / static_cast<double>(d);
}

inline double fmi(const selfclust::PairConfusion& pc) {
    if (pc.tp + pc.fp + pc.fn == 0) return 1.0;
    const auto a = pc.tp + pc.fp, b = pc.tp + pc.fn;
    if (a == 0 || b == 0) return 0.0;
    return static_cast<double>(pc.tp) / std::sqrt(static_cast<double>(a) * static_cast<double>(b));
}

/// Hubert-Arabie ARI written in pair counts:
/// 2 (tp tn - fn fp) / ((tp + fn)(fn + tn) + (tp + fp)(fp + tn)).
inline double ari(const selfclust::PairConfusion& pc) {
    const std::int64_t num = 2 * (pc.tp * pc.tn - pc.fn * pc.fp);
    const std::int64_t den = (pc.tp + pc.fn) * (pc.fn + pc.tn) + (pc.tp + pc.fp) * (pc.fp + pc.tn);
    if (den == 0) return 1.0;
    return static_cast<double>(num) / static_cast<double>(den);
}

/// Best accuracy over every injective cluster -> class map, by permutation.
inline double acc(const Labels& truth, const Labels& pred) {
    const int kt = *std::max_element(truth.begin(), truth.end()) + 1;
    const int kp = *std::max_element(pred.begin(), pred.end()) + 1;
    const int m = std::max(kt, kp);
    std::vector<int> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    long best = 0;
    do {
        long hit = 0;
        for (std::size_t i = 0; i < truth.size(); ++i) hit += perm[pred[i]] == truth[i];
        best = std::max(best, hit);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return static_cast<double>(best) / static_cast<double>(truth.size());
}

/// Random labels in [0, k) that use every value at least once (n >= k).
inline Labels random_labels(std::mt19937_64& gen, int n, int k) {
    Labels l(n);
    for (int i = 0; i < k; ++i) l[i] = i;
    std::uniform_int_distribution<int> d(0, k - 1);
    for (int i = k; i < n; ++i) l[i] = d(gen);
    std::shuffle(l.begin(), l.end(), gen);
    return l;
}

/// Largest relative error between the analytic learner gradient and central
/// differences with step h, over every parameter. Relative error is
/// |a - f| / max(|a| + |f|, floor).
inline double gradient_error(selfclust::LearnerModel model, const selfclust::Matrix& x, const Labels& y,
                             const std::vector<double>& w, double weight_decay, double h = 1e-5,
                             double floor = 1e-7) {
    using selfclust::loss_and_gradient;
    const auto [loss, g] = loss_and_gradient(model, x, y, w, weight_decay);
    (void)loss;
    double worst = 0;
    auto probe = [&](double& param, double analytic) {
        const double saved = param;
        param = saved + h;
        const double up = loss_and_gradient(model, x, y, w, weight_decay).first;
        param = saved - h;
        const double down = loss_and_gradient(model, x, y, w, weight_decay).first;
        param = saved;
        const double fd = (up - down) / (2 * h);
        worst = std::max(worst, std::abs(analytic - fd) / std::max(std::abs(analytic) + std::abs(fd), floor));
    };
    auto& m = model;
    for (Eigen::Index r = 0; r < m.w1.rows(); ++r)
        for (Eigen::Index c = 0; c < m.w1.cols(); ++c) probe(m.w1(r, c), g.w1(r, c));
    for (Eigen::Index r = 0; r < m.b1.size(); ++r) probe(m.b1(r), g.b1(r));
    for (Eigen::Index r = 0; r < m.w2.rows(); ++r)
        for (Eigen::Index c = 0; c < m.w2.cols(); ++c) probe(m.w2(r, c), g.w2(r, c));
    for (Eigen::Index r = 0; r < m.b2.size(); ++r) probe(m.b2(r), g.b2(r));
    return worst;
}

}  // namespace oracle
