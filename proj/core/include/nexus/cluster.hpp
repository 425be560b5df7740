#pragma once

#include <string>
#include <utility>
#include <vector>

#include "nexus/matrix.hpp"
#include "nexus/mvtboost.hpp"

namespace nexus {

enum class Linkage { average, complete };

struct Merge {
    int cluster_a = 0; // cluster ids: 0..m-1 are leaves, merge i creates id m+i
    int cluster_b = 0;
    double height = 0.0;
};

struct Dendrogram {
    std::vector<Merge> merges;
    std::vector<int> leaf_order; // left-to-right traversal of the final tree

    std::string to_json() const;
};

// Naive agglomerative clustering under euclidean distance: repeatedly merge
// the closest active pair, ties broken toward the lexicographically lowest
// id pair. Merge heights are non-decreasing for both linkages.
Dendrogram hier_cluster(const Matrix& rows, Linkage linkage = Linkage::average);

// Row order clusters predictors on their pair profiles; column order clusters
// pairs on their predictor profiles. Both feed the heat-map emitter.
std::pair<std::vector<int>, std::vector<int>> cluster_order(
    const CovarianceExplainedMatrix& matrix, Linkage linkage = Linkage::average);

} // namespace nexus
