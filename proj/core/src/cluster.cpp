#include "nexus/cluster.hpp"

#include <cmath>
#include <limits>

#include <json.hpp>

#include "nexus/errors.hpp"

namespace nexus {

namespace {

double euclidean(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

// Linkage over explicit member lists; m is at most the predictor count here
// so the cubic scan is fine.
double linkage_distance(const Matrix& rows, const std::vector<int>& a,
                        const std::vector<int>& b, Linkage linkage) {
    double worst = 0.0;
    double sum = 0.0;
    for (int i : a) {
        for (int j : b) {
            double d = euclidean(rows.row(static_cast<std::size_t>(i)),
                                 rows.row(static_cast<std::size_t>(j)));
            worst = std::max(worst, d);
            sum += d;
        }
    }
    if (linkage == Linkage::complete) return worst;
    return sum / static_cast<double>(a.size() * b.size());
}

void collect_leaves(const std::vector<Merge>& merges, int id, int m, std::vector<int>& out) {
    if (id < m) {
        out.push_back(id);
        return;
    }
    const Merge& merge = merges[static_cast<std::size_t>(id - m)];
    collect_leaves(merges, merge.cluster_a, m, out);
    collect_leaves(merges, merge.cluster_b, m, out);
}

} // namespace

Dendrogram hier_cluster(const Matrix& rows, Linkage linkage) {
    const int m = static_cast<int>(rows.rows());
    if (m == 0) throw InsufficientDataError("hier_cluster: no rows");
    if (!rows.all_finite()) throw ValidationError("hier_cluster: non-finite value");

    Dendrogram out;
    if (m == 1) {
        out.leaf_order = {0};
        return out;
    }

    struct Cluster {
        int id;
        std::vector<int> members;
    };
    std::vector<Cluster> active;
    for (int i = 0; i < m; ++i) active.push_back({i, {i}});

    int next_id = m;
    while (active.size() > 1) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = 0;
        std::size_t bj = 1;
        for (std::size_t i = 0; i + 1 < active.size(); ++i) {
            for (std::size_t j = i + 1; j < active.size(); ++j) {
                double d = linkage_distance(rows, active[i].members, active[j].members, linkage);
                // Strict < plus ascending-id iteration realizes the
                // lowest-index-pair tie-break.
                if (d < best) {
                    best = d;
                    bi = i;
                    bj = j;
                }
            }
        }

        Cluster merged;
        merged.id = next_id++;
        merged.members = active[bi].members;
        merged.members.insert(merged.members.end(), active[bj].members.begin(),
                              active[bj].members.end());
        out.merges.push_back({active[bi].id, active[bj].id, best});

        active.erase(active.begin() + static_cast<std::ptrdiff_t>(bj));
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(bi));
        active.push_back(std::move(merged));
    }

    collect_leaves(out.merges, next_id - 1, m, out.leaf_order);
    return out;
}

std::pair<std::vector<int>, std::vector<int>> cluster_order(
    const CovarianceExplainedMatrix& matrix, Linkage linkage) {
    const std::size_t p = matrix.entries.rows();
    const std::size_t pairs = matrix.entries.cols();

    Dendrogram row_d = hier_cluster(matrix.entries, linkage);

    Matrix transposed(pairs, p);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < pairs; ++j) transposed(j, i) = matrix.entries(i, j);
    }
    Dendrogram col_d = hier_cluster(transposed, linkage);

    return {row_d.leaf_order, col_d.leaf_order};
}

std::string Dendrogram::to_json() const {
    nlohmann::json j;
    auto merges_json = nlohmann::json::array();
    for (const Merge& m : merges) {
        merges_json.push_back({{"a", m.cluster_a}, {"b", m.cluster_b}, {"height", m.height}});
    }
    j["merges"] = merges_json;
    j["leaf_order"] = leaf_order;
    return j.dump();
}

} // namespace nexus
