#include "selfclust/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace selfclust {

namespace {

std::int64_t choose2(std::int64_t n) {
    return n * (n - 1) / 2;
}

void check_lengths(const Labels& truth, const Labels& pred) {
    if (truth.size() != pred.size())
        throw DataError("label length mismatch (" + std::to_string(truth.size()) + " vs " +
                        std::to_string(pred.size()) + ")");
}

std::vector<int> compact(const Labels& labels, int& count) {
    std::map<int, int> index;
    for (int l : labels) index.emplace(l, 0);
    count = 0;
    for (auto& [label, id] : index) id = count++;
    std::vector<int> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) out[i] = index[labels[i]];
    return out;
}

}  // namespace

Contingency contingency(const Labels& truth, const Labels& pred) {
    check_lengths(truth, pred);
    int rows = 0;
    int cols = 0;
    const auto t = compact(truth, rows);
    const auto p = compact(pred, cols);
    Contingency c;
    c.n = static_cast<std::int64_t>(truth.size());
    c.counts.assign(rows, std::vector<std::int64_t>(cols, 0));
    c.row_sums.assign(rows, 0);
    c.col_sums.assign(cols, 0);
    for (std::size_t i = 0; i < t.size(); ++i) {
        ++c.counts[t[i]][p[i]];
        ++c.row_sums[t[i]];
        ++c.col_sums[p[i]];
    }
    return c;
}

PairConfusion pair_confusion(const Labels& truth, const Labels& pred) {
    const auto c = contingency(truth, pred);
    if (c.n < 2) throw DataError("pair_confusion: at least two samples required");
    PairConfusion pc;
    for (const auto& row : c.counts)
        for (auto nij : row) pc.tp += choose2(nij);
    std::int64_t same_cluster = 0;
    for (auto b : c.col_sums) same_cluster += choose2(b);
    std::int64_t same_class = 0;
    for (auto a : c.row_sums) same_class += choose2(a);
    pc.fp = same_cluster - pc.tp;
    pc.fn = same_class - pc.tp;
    pc.tn = choose2(c.n) - pc.tp - pc.fp - pc.fn;
    return pc;
}

double jc(const PairConfusion& pc) {
    const auto denom = pc.tp + pc.fp + pc.fn;
    // No co-clustered pair on either side: both partitions are all singletons.
    if (denom == 0) return 1.0;
    return static_cast<double>(pc.tp) / static_cast<double>(denom);
}

double fmi(const PairConfusion& pc) {
    if (pc.tp + pc.fp + pc.fn == 0) return 1.0;
    const auto a = pc.tp + pc.fp;
    const auto b = pc.tp + pc.fn;
    if (a == 0 || b == 0) return 0.0;
    return static_cast<double>(pc.tp) / std::sqrt(static_cast<double>(a) * static_cast<double>(b));
}

double ari(const Labels& truth, const Labels& pred) {
    const auto c = contingency(truth, pred);
    if (c.n < 2) throw DataError("ari: at least two samples required");
    // (index - expected) / (max - expected), scaled by 2 * C(n, 2) so numerator and
    // denominator are exact integers.
    __int128 index = 0;
    for (const auto& row : c.counts)
        for (auto nij : row) index += choose2(nij);
    __int128 sum_a = 0;
    for (auto a : c.row_sums) sum_a += choose2(a);
    __int128 sum_b = 0;
    for (auto b : c.col_sums) sum_b += choose2(b);
    const __int128 total = choose2(c.n);
    const __int128 num = 2 * total * index - 2 * sum_a * sum_b;
    const __int128 den = total * (sum_a + sum_b) - 2 * sum_a * sum_b;
    // den == 0 only when both partitions are trivial in the same way, i.e. identical.
    if (den == 0) return 1.0;
    return static_cast<double>(num) / static_cast<double>(den);
}

double nmi(const Labels& truth, const Labels& pred) {
    const auto c = contingency(truth, pred);
    if (c.n == 0) throw DataError("nmi: empty label vectors");
    const double n = static_cast<double>(c.n);
    auto entropy = [n](const std::vector<std::int64_t>& sums) {
        double h = 0;
        for (auto s : sums)
            if (s > 0) h -= (s / n) * std::log(s / n);
        return h;
    };
    const double hu = entropy(c.row_sums);
    const double hv = entropy(c.col_sums);
    if (hu == 0.0 && hv == 0.0) return 1.0;
    if (hu == 0.0 || hv == 0.0) return 0.0;
    double mi = 0;
    for (std::size_t i = 0; i < c.counts.size(); ++i)
        for (std::size_t j = 0; j < c.counts[i].size(); ++j) {
            const auto nij = c.counts[i][j];
            if (nij == 0) continue;
            mi += (nij / n) * std::log(n * nij / (static_cast<double>(c.row_sums[i]) * c.col_sums[j]));
        }
    return std::clamp(mi / std::sqrt(hu * hv), 0.0, 1.0);
}

std::vector<int> solve_assignment(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    for (const auto& row : cost)
        if (static_cast<int>(row.size()) != n) throw std::invalid_argument("solve_assignment: cost must be square");
    const double inf = std::numeric_limits<double>::infinity();
    // Potentials formulation, 1-based with column 0 as the virtual start.
    std::vector<double> u(n + 1, 0), v(n + 1, 0);
    std::vector<int> match(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            const int i0 = match[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> assignment(n, -1);
    for (int j = 1; j <= n; ++j)
        if (match[j] > 0) assignment[match[j] - 1] = j - 1;
    return assignment;
}

double acc(const Labels& truth, const Labels& pred) {
    const auto c = contingency(truth, pred);
    if (c.n == 0) throw DataError("acc: empty label vectors");
    const auto classes = c.counts.size();
    const auto clusters = c.row_sums.empty() ? 0 : c.counts.front().size();
    const auto size = std::max(classes, clusters);
    // Rows: predicted clusters, columns: classes; padding rows/columns cost nothing.
    std::vector<std::vector<double>> cost(size, std::vector<double>(size, 0.0));
    for (std::size_t t = 0; t < classes; ++t)
        for (std::size_t p = 0; p < clusters; ++p) cost[p][t] = -static_cast<double>(c.counts[t][p]);
    const auto match = solve_assignment(cost);
    std::int64_t matched = 0;
    for (std::size_t p = 0; p < clusters; ++p) {
        const auto t = static_cast<std::size_t>(match[p]);
        if (t < classes) matched += c.counts[t][p];
    }
    return static_cast<double>(matched) / static_cast<double>(c.n);
}

double dbi(const Matrix& features, const Labels& labels) {
    if (labels.size() != static_cast<std::size_t>(features.rows())) throw DataError("dbi: one label per sample");
    int k = 0;
    const auto compacted = compact(labels, k);
    if (k < 2) throw DataError("dbi: at least two nonempty clusters required");
    Matrix centroids = Matrix::Zero(k, features.cols());
    std::vector<int> counts(k, 0);
    for (std::size_t i = 0; i < compacted.size(); ++i) {
        centroids.row(compacted[i]) += features.row(static_cast<Eigen::Index>(i));
        ++counts[compacted[i]];
    }
    for (int c = 0; c < k; ++c) centroids.row(c) /= counts[c];
    std::vector<double> scatter(k, 0.0);
    for (std::size_t i = 0; i < compacted.size(); ++i)
        scatter[compacted[i]] += (features.row(static_cast<Eigen::Index>(i)) - centroids.row(compacted[i])).norm();
    for (int c = 0; c < k; ++c) scatter[c] /= counts[c];

    double total = 0;
    for (int a = 0; a < k; ++a) {
        double worst = 0;
        for (int b = 0; b < k; ++b) {
            if (a == b) continue;
            const double sep = (centroids.row(a) - centroids.row(b)).norm();
            if (sep == 0.0) throw DataError("dbi: two clusters share a centroid");
            worst = std::max(worst, (scatter[a] + scatter[b]) / sep);
        }
        total += worst;
    }
    return total / k;
}

double dbi_normalized(double dbi_final, double dbi_boot) {
    if (!(dbi_boot > 0.0)) throw DataError("dbi_normalized: boot DBI must be positive");
    return dbi_final / dbi_boot;
}

double tau(const std::vector<double>& eta, StdMode mode) {
    if (eta.size() < 2) throw std::invalid_argument("tau: at least two values required");
    for (double x : eta)
        if (!std::isfinite(x)) throw std::invalid_argument("tau: non-finite value");
    const double n = static_cast<double>(eta.size());
    const double mean = std::accumulate(eta.begin(), eta.end(), 0.0) / n;
    if (mean == 0.0) throw std::invalid_argument("tau: zero mean");
    double ss = 0;
    for (double x : eta) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / (mode == StdMode::sample ? n - 1 : n));
    return sd / mean;
}

EvalReport evaluate(const Labels& truth, const Labels& pred, const Matrix* features) {
    EvalReport r;
    const auto pc = pair_confusion(truth, pred);
    r.jc = jc(pc);
    r.fmi = fmi(pc);
    r.nmi = nmi(truth, pred);
    r.ari = ari(truth, pred);
    r.acc = acc(truth, pred);
    if (features) {
        try {
            r.dbi = dbi(*features, pred);
        } catch (const DataError&) {
            r.dbi.reset();
        }
    }
    return r;
}

}  // namespace selfclust
