/**
 * @file preference.hpp
 * @brief Converts a population into preference-conditioned training examples.
 *
 * The population is sorted by descending accuracy and split into N_c
 * contiguous clusters of near-equal size; cluster index lambda acts as the
 * preference condition. Within a cluster, each item appearing in any member
 * list gets a soft label: the softmax (over the cluster's distinct items) of
 * its presence frequency. An example pairs the item's feature vector with a
 * one-hot encoding of lambda; the owning user is carried alongside so the
 * scorer can attach its user embedding.
 */

#ifndef PREFERREC_PREFERENCE_HPP
#define PREFERREC_PREFERENCE_HPP

#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "core.hpp"
#include "errors.hpp"
#include "evolution.hpp"

namespace preferrec {

/// One soft-labeled training example for the preference scorer.
struct PreferenceExample {
    UserId user = -1;
    int lambda = 0;               ///< preference cluster index in [0, N_c)
    ItemId item = -1;
    std::vector<double> features; ///< [x_i || one-hot(lambda)]
    double label = 0.0;           ///< softmax presence frequency within the cluster
};

/**
 * @brief Splits a population into N_c contiguous accuracy-ordered clusters.
 *
 * Members are ordered by descending accuracy (ties toward the lower original
 * index). Cluster sizes differ by at most one, with the remainder going to
 * the earliest clusters; every cluster is non-empty. Returns member indices
 * per cluster.
 */
[[nodiscard]] inline std::vector<std::vector<std::size_t>>
partition_population(const Population& pop, std::size_t n_clusters) {
    const std::size_t n = pop.members.size();
    if (n_clusters == 0) throw config_error("cluster count must be positive");
    if (n < n_clusters)
        throw config_error("population of " + std::to_string(n) +
                           " cannot form " + std::to_string(n_clusters) + " clusters");
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double va = pop.members[a].objectives.acc;
        const double vb = pop.members[b].objectives.acc;
        if (va != vb) return va > vb;
        return a < b;
    });

    std::vector<std::vector<std::size_t>> clusters(n_clusters);
    const std::size_t base = n / n_clusters;
    const std::size_t extra = n % n_clusters;
    std::size_t cursor = 0;
    for (std::size_t c = 0; c < n_clusters; ++c) {
        const std::size_t size = base + (c < extra ? 1 : 0);
        for (std::size_t i = 0; i < size; ++i) clusters[c].push_back(order[cursor++]);
    }
    return clusters;
}

/// Presence frequency of every item appearing in the cluster's member lists.
[[nodiscard]] inline std::map<ItemId, int>
item_frequencies(const Population& pop, const std::vector<std::size_t>& cluster) {
    std::map<ItemId, int> freq;
    for (std::size_t idx : cluster)
        for (ItemId item : pop.members[idx].list) ++freq[item];
    return freq;
}

/// Softmax over presence frequencies, stabilized by max subtraction.
/// Labels are positive and sum to 1 over the cluster's distinct items.
[[nodiscard]] inline std::map<ItemId, double>
soft_labels(const std::map<ItemId, int>& frequencies) {
    if (frequencies.empty()) throw config_error("cannot label an empty item set");
    int max_count = frequencies.begin()->second;
    for (const auto& [item, count] : frequencies) max_count = std::max(max_count, count);
    double denom = 0.0;
    std::map<ItemId, double> labels;
    for (const auto& [item, count] : frequencies) {
        const double e = std::exp(static_cast<double>(count - max_count));
        labels[item] = e;
        denom += e;
    }
    for (auto& [item, v] : labels) v /= denom;
    return labels;
}

/**
 * @brief Builds the full example set of one population.
 *
 * Output is cluster-major and item-id-minor, so the example order is
 * deterministic. Item features must already be assembled in the catalog.
 */
[[nodiscard]] inline std::vector<PreferenceExample>
build_examples(const Population& pop, const ItemCatalog& catalog, std::size_t n_clusters) {
    const auto clusters = partition_population(pop, n_clusters);
    std::vector<PreferenceExample> examples;
    for (std::size_t lambda = 0; lambda < n_clusters; ++lambda) {
        const auto labels = soft_labels(item_frequencies(pop, clusters[lambda]));
        for (const auto& [item, label] : labels) {
            PreferenceExample ex;
            ex.user = pop.user;
            ex.lambda = static_cast<int>(lambda);
            ex.item = item;
            ex.label = label;
            const std::vector<double>& x = catalog.feature(item);
            ex.features.reserve(x.size() + n_clusters);
            ex.features.insert(ex.features.end(), x.begin(), x.end());
            for (std::size_t c = 0; c < n_clusters; ++c)
                ex.features.push_back(c == lambda ? 1.0 : 0.0);
            examples.push_back(std::move(ex));
        }
    }
    return examples;
}

/// Debug dump of examples as tab-separated text (features space-joined).
inline void write_examples_tsv(const std::string& path,
                               const std::vector<PreferenceExample>& examples) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw data_error("cannot open " + path + " for writing");
    std::fputs("user\tlambda\titem\tlabel\tfeatures\n", f);
    for (const auto& ex : examples) {
        std::fprintf(f, "%lld\t%d\t%lld\t%.17g\t", static_cast<long long>(ex.user), ex.lambda,
                     static_cast<long long>(ex.item), ex.label);
        for (std::size_t i = 0; i < ex.features.size(); ++i)
            std::fprintf(f, "%s%.17g", i ? " " : "", ex.features[i]);
        std::fputc('\n', f);
    }
    std::fclose(f);
}

} // namespace preferrec

#endif // PREFERREC_PREFERENCE_HPP
