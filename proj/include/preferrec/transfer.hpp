/**
 * @file transfer.hpp
 * @brief Knowledge transfer: scorer-synthesized anchor solutions merged back
 *        into user populations.
 *
 * For each preference condition lambda the trained scorer ranks the user's
 * candidates; the top K become an anchor solution whose evaluated fitness
 * also serves as the reference vector for final selection. Anchors are merged
 * into the population as a union with exact ordered-duplicate removal and no
 * truncation; capacity is restored by the next environmental selection.
 */

#ifndef PREFERREC_TRANSFER_HPP
#define PREFERREC_TRANSFER_HPP

#include <algorithm>
#include <vector>

#include "core.hpp"
#include "evolution.hpp"
#include "objectives.hpp"
#include "pareto_net.hpp"

namespace preferrec {

/// One synthesized solution with its preference condition and fitness.
struct Anchor {
    int lambda = 0;
    SolutionList list;
    ObjectiveVector fitness;
};

/// All anchors of one user, in ascending lambda order.
struct AnchorSet {
    UserId user = -1;
    std::vector<Anchor> anchors;
};

/**
 * @brief Top-K list under the scorer for (user, lambda).
 *
 * Candidates are ordered by descending predicted score, ties toward the lower
 * item id; the first K form the solution (so the list itself is ordered by
 * descending score). Requires K <= candidate count.
 */
[[nodiscard]] inline SolutionList synthesize_solution(const ScorerParams& params, UserId user,
                                                      int lambda, std::size_t n_clusters,
                                                      std::size_t k, const CandidateSet& cand,
                                                      const ItemCatalog& catalog) {
    if (k == 0 || k > cand.size())
        throw config_error("list length " + std::to_string(k) + " must lie in [1, " +
                           std::to_string(cand.size()) + "]");
    const auto scores = predict_scores(params, user, lambda, n_clusters, cand, catalog);
    std::vector<ItemId> order;
    order.reserve(scores.size());
    for (const auto& [item, s] : scores) order.push_back(item);
    std::sort(order.begin(), order.end(), [&scores](ItemId a, ItemId b) {
        const double sa = scores.at(a);
        const double sb = scores.at(b);
        if (sa != sb) return sa > sb;
        return a < b;
    });
    order.resize(k);
    return order;
}

/// Synthesizes and evaluates one anchor per lambda in [0, n_clusters).
[[nodiscard]] inline AnchorSet knowledge_transfer(const ScorerParams& params, UserId user,
                                                  std::size_t n_clusters, std::size_t k,
                                                  const EvalContext& ctx) {
    if (n_clusters == 0) throw config_error("cluster count must be positive");
    AnchorSet set;
    set.user = user;
    set.anchors.reserve(n_clusters);
    for (std::size_t lambda = 0; lambda < n_clusters; ++lambda) {
        Anchor a;
        a.lambda = static_cast<int>(lambda);
        a.list = synthesize_solution(params, user, a.lambda, n_clusters, k, *ctx.cand,
                                     *ctx.catalog);
        a.fitness = evaluate(a.list, ctx);
        set.anchors.push_back(std::move(a));
    }
    return set;
}

/**
 * @brief Union-merge of anchors into a population.
 *
 * Existing members are never removed; an anchor is appended unless its
 * ordered list exactly equals an existing member's (or an earlier anchor's).
 * The population may exceed capacity afterwards.
 */
[[nodiscard]] inline Population merge(Population pop, const AnchorSet& anchors) {
    for (const Anchor& a : anchors.anchors) {
        bool seen = false;
        for (const Individual& m : pop.members) {
            if (m.list == a.list) {
                seen = true;
                break;
            }
        }
        if (seen) continue;
        Individual ind;
        ind.list = a.list;
        ind.objectives = a.fitness;
        pop.members.push_back(std::move(ind));
    }
    return pop;
}

} // namespace preferrec

#endif // PREFERREC_TRANSFER_HPP
