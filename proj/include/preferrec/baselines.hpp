/**
 * @file baselines.hpp
 * @brief Reference re-rankers: plain top-K by relevance, and maximal marginal
 *        relevance with Jaccard category similarity.
 *
 * Both break ties toward the earlier candidate position, so MMR with
 * trade-off 1.0 reproduces top-K exactly.
 */

#ifndef PREFERREC_BASELINES_HPP
#define PREFERREC_BASELINES_HPP

#include <algorithm>
#include <vector>

#include "core.hpp"
#include "errors.hpp"

namespace preferrec {

/// Top k candidates by descending base score; ties keep candidate order.
[[nodiscard]] inline SolutionList topk_list(const CandidateSet& cand, std::size_t k) {
    if (k == 0 || k > cand.size())
        throw config_error("list length " + std::to_string(k) + " must lie in [1, " +
                           std::to_string(cand.size()) + "]");
    std::vector<std::size_t> order(cand.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&cand](std::size_t a, std::size_t b) {
        return cand.score_at(a) > cand.score_at(b);
    });
    SolutionList list;
    list.reserve(k);
    for (std::size_t i = 0; i < k; ++i) list.push_back(cand.item_at(order[i]));
    return list;
}

/// Jaccard similarity of two items' category sets (both sorted, non-empty).
[[nodiscard]] inline double category_jaccard(const ItemMeta& a, const ItemMeta& b) {
    std::size_t inter = 0, ia = 0, ib = 0;
    while (ia < a.categories.size() && ib < b.categories.size()) {
        if (a.categories[ia] == b.categories[ib]) { ++inter; ++ia; ++ib; }
        else if (a.categories[ia] < b.categories[ib]) ++ia;
        else ++ib;
    }
    const std::size_t uni = a.categories.size() + b.categories.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

/**
 * @brief Maximal marginal relevance re-ranking.
 *
 * Greedily picks argmax of trade_off * score(i) - (1 - trade_off) *
 * max_{j in S} jaccard(i, j); the similarity term is zero while the selection
 * is empty, so the first pick is the most relevant candidate. Ties keep the
 * earliest candidate position.
 */
[[nodiscard]] inline SolutionList mmr_list(const CandidateSet& cand, const ItemCatalog& catalog,
                                           std::size_t k, double trade_off = 0.7) {
    if (k == 0 || k > cand.size())
        throw config_error("list length " + std::to_string(k) + " must lie in [1, " +
                           std::to_string(cand.size()) + "]");
    if (trade_off < 0.0 || trade_off > 1.0)
        throw config_error("MMR trade-off must lie in [0, 1]");

    SolutionList selected;
    std::vector<bool> used(cand.size(), false);
    for (std::size_t step = 0; step < k; ++step) {
        std::size_t best = cand.size();
        double best_value = 0.0;
        for (std::size_t i = 0; i < cand.size(); ++i) {
            if (used[i]) continue;
            double max_sim = 0.0;
            for (ItemId s : selected)
                max_sim = std::max(max_sim, category_jaccard(catalog.meta(cand.item_at(i)),
                                                             catalog.meta(s)));
            const double value = trade_off * cand.score_at(i) - (1.0 - trade_off) * max_sim;
            if (best == cand.size() || value > best_value) {
                best = i;
                best_value = value;
            }
        }
        used[best] = true;
        selected.push_back(cand.item_at(best));
    }
    return selected;
}

} // namespace preferrec

#endif // PREFERREC_BASELINES_HPP
