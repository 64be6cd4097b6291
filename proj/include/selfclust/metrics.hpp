#pragma once

#include "selfclust/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace selfclust {

/// Sample-pair agreement counts between a reference and a predicted partition.
struct PairConfusion {
    std::int64_t tp = 0;  ///< same class, same cluster
    std::int64_t fp = 0;  ///< different class, same cluster
    std::int64_t fn = 0;  ///< same class, different cluster
    std::int64_t tn = 0;  ///< different class, different cluster

    bool operator==(const PairConfusion&) const = default;
};

/// Dense contingency counts: rows index truth classes, columns predicted clusters,
/// both compacted to 0..n-1 in ascending label order.
struct Contingency {
    std::vector<std::vector<std::int64_t>> counts;
    std::vector<std::int64_t> row_sums;
    std::vector<std::int64_t> col_sums;
    std::int64_t n = 0;
};

Contingency contingency(const Labels& truth, const Labels& pred);

PairConfusion pair_confusion(const Labels& truth, const Labels& pred);

double jc(const PairConfusion& pc);
double fmi(const PairConfusion& pc);
double ari(const Labels& truth, const Labels& pred);
double nmi(const Labels& truth, const Labels& pred);
double acc(const Labels& truth, const Labels& pred);

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method, O(n^3)).
/// Returns assignment[row] = column.
std::vector<int> solve_assignment(const std::vector<std::vector<double>>& cost);

double dbi(const Matrix& features, const Labels& labels);
double dbi_normalized(double dbi_final, double dbi_boot);

enum class StdMode { population, sample };

/// Index difference rate: standard deviation over mean of one index across feature
/// variants.
double tau(const std::vector<double>& eta, StdMode mode = StdMode::sample);

struct EvalReport {
    double jc = 0;
    double fmi = 0;
    double nmi = 0;
    double ari = 0;
    double acc = 0;
    std::optional<double> dbi;
    std::optional<double> dbi_normalized;
};

/// External indices against `truth`; DBI on `features` when given.
EvalReport evaluate(const Labels& truth, const Labels& pred, const Matrix* features = nullptr);

}  // namespace selfclust
