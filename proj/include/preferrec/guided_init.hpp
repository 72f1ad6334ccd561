/**
 * @file guided_init.hpp
 * @brief Cluster-guided population initialization.
 *
 * Users are grouped by the category-frequency distribution of their candidate
 * pools (k-means). For each cluster, the user closest to the center is
 * pre-optimized with a plain evolution run, and the resulting Pareto front is
 * projected onto every cluster member's own candidate pool to seed its
 * population; remaining slots are filled with uniform random solutions.
 */

#ifndef PREFERREC_GUIDED_INIT_HPP
#define PREFERREC_GUIDED_INIT_HPP

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "core.hpp"
#include "evolution.hpp"
#include "objectives.hpp"
#include "rng.hpp"

namespace preferrec {

struct GuidedInitConfig {
    std::size_t user_clusters = 10;  ///< k-means cluster count (capped at user count)
    int init_generations = 10;       ///< generations of centroid pre-optimization

    void validate() const {
        if (user_clusters < 1) throw config_error("user_clusters must be at least 1");
        if (init_generations < 0) throw config_error("init_generations must be non-negative");
    }
};

/// Normalized distribution over the catalog's category universe, counting how
/// often each category appears among the user's candidate items.
[[nodiscard]] inline std::vector<double> user_category_distribution(const CandidateSet& cand,
                                                                    const ItemCatalog& catalog) {
    std::vector<double> freq(catalog.total_categories(), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < cand.size(); ++i) {
        for (CategoryId c : catalog.meta(cand.item_at(i)).categories) {
            freq[static_cast<std::size_t>(catalog.category_index(c))] += 1.0;
            total += 1.0;
        }
    }
    if (total > 0.0)
        for (double& f : freq) f /= total;
    return freq;
}

struct KMeansResult {
    std::vector<std::size_t> assignment;       ///< point index -> cluster index
    std::vector<std::vector<double>> centers;  ///< cluster centers (means)
};

namespace detail {

[[nodiscard]] inline double squared_distance(const std::vector<double>& a,
                                             const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

} // namespace detail

/**
 * @brief Plain k-means with deterministic tie-breaking.
 *
 * Centers start from k distinct points drawn by the given stream; assignment
 * ties go to the lower center index; iteration stops when assignments repeat
 * or after 100 rounds. Clusters may end up empty.
 */
[[nodiscard]] inline KMeansResult kmeans(const std::vector<std::vector<double>>& points,
                                         std::size_t k, Rng& rng) {
    if (points.empty()) throw config_error("kmeans requires at least one point");
    k = std::min(k, points.size());

    std::vector<std::size_t> order(points.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);

    KMeansResult res;
    res.centers.reserve(k);
    for (std::size_t c = 0; c < k; ++c) res.centers.push_back(points[order[c]]);
    res.assignment.assign(points.size(), 0);

    for (int round = 0; round < 100; ++round) {
        bool changed = false;
        for (std::size_t p = 0; p < points.size(); ++p) {
            std::size_t best = 0;
            double best_d = detail::squared_distance(points[p], res.centers[0]);
            for (std::size_t c = 1; c < k; ++c) {
                const double d = detail::squared_distance(points[p], res.centers[c]);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (res.assignment[p] != best) {
                res.assignment[p] = best;
                changed = true;
            }
        }
        if (!changed && round > 0) break;

        std::vector<std::vector<double>> sums(k, std::vector<double>(points[0].size(), 0.0));
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t p = 0; p < points.size(); ++p) {
            ++counts[res.assignment[p]];
            for (std::size_t d = 0; d < points[p].size(); ++d)
                sums[res.assignment[p]][d] += points[p][d];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) continue; // empty cluster keeps its stale center
            for (double& v : sums[c]) v /= static_cast<double>(counts[c]);
            res.centers[c] = std::move(sums[c]);
        }
    }
    return res;
}

/**
 * @brief Projects a solution onto another user's candidate pool.
 *
 * Items already in the pool stay at their positions; absent items are
 * replaced, left to right, by the pool's highest-base-score items not yet in
 * the projected list (score ties toward the lower item id). The result is a
 * valid K-distinct-items list.
 */
[[nodiscard]] inline SolutionList project_solution(const SolutionList& source,
                                                   const CandidateSet& cand) {
    if (source.size() > cand.size())
        throw invalid_solution_error("projection target pool of user " +
                                     std::to_string(cand.user()) + " is smaller than the list");
    SolutionList out(source.size(), -1);
    std::vector<std::size_t> vacancies;
    for (std::size_t i = 0; i < source.size(); ++i) {
        bool duplicate = false;
        for (std::size_t j = 0; j < i; ++j)
            if (out[j] == source[i]) duplicate = true;
        if (cand.contains(source[i]) && !duplicate) {
            out[i] = source[i];
        } else {
            vacancies.push_back(i);
        }
    }
    if (vacancies.empty()) return out;

    std::vector<std::size_t> pool(cand.size());
    for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
    std::sort(pool.begin(), pool.end(), [&](std::size_t a, std::size_t b) {
        if (cand.score_at(a) != cand.score_at(b)) return cand.score_at(a) > cand.score_at(b);
        return cand.item_at(a) < cand.item_at(b);
    });
    std::size_t next = 0;
    for (std::size_t v : vacancies) {
        while (next < pool.size()) {
            const ItemId candidate_item = cand.item_at(pool[next]);
            ++next;
            if (std::find(out.begin(), out.end(), candidate_item) == out.end()) {
                out[v] = candidate_item;
                break;
            }
        }
        if (out[v] < 0)
            throw invalid_solution_error("projection ran out of replacement items for user " +
                                         std::to_string(cand.user()));
    }
    return out;
}

/**
 * @brief Builds every user's initial population.
 *
 * Per cluster: the member nearest the center is pre-optimized for
 * init_generations; the final rank-0 front is projected onto each member's
 * pool (exact duplicate projections collapsed), then topped up with uniform
 * random solutions from the user's own init stream. Users left without seeds
 * (empty clusters) fall back to pure random initialization.
 */
[[nodiscard]] inline std::map<UserId, Population>
guided_init(const std::map<UserId, CandidateSet>& candidates, const ItemCatalog& catalog,
            NoveltyMode novelty, std::size_t pop_size, std::size_t list_length,
            const EvolutionConfig& evo, const GuidedInitConfig& ginit,
            std::uint64_t global_seed) {
    ginit.validate();
    if (candidates.empty()) throw config_error("guided_init requires at least one user");

    std::vector<UserId> users;
    users.reserve(candidates.size());
    std::vector<std::vector<double>> points;
    points.reserve(candidates.size());
    for (const auto& [user, cand] : candidates) {
        users.push_back(user);
        points.push_back(user_category_distribution(cand, catalog));
    }

    Rng cluster_rng = Rng::for_stream(global_seed, "guided-init");
    const KMeansResult km = kmeans(points, ginit.user_clusters, cluster_rng);
    const std::size_t k = km.centers.size();

    std::vector<std::vector<std::size_t>> cluster_members(k);
    for (std::size_t p = 0; p < users.size(); ++p)
        cluster_members[km.assignment[p]].push_back(p);

    std::map<UserId, Population> result;
    EvolutionConfig pre = evo;
    pre.pop_size = pop_size;
    pre.generations = ginit.init_generations;

    for (std::size_t c = 0; c < k; ++c) {
        if (cluster_members[c].empty()) continue; // nothing to seed

        // Representative: cluster member nearest the center, ties to lower user id.
        std::size_t rep = cluster_members[c][0];
        double rep_d = detail::squared_distance(points[rep], km.centers[c]);
        for (std::size_t m : cluster_members[c]) {
            const double d = detail::squared_distance(points[m], km.centers[c]);
            if (d < rep_d || (d == rep_d && users[m] < users[rep])) {
                rep_d = d;
                rep = m;
            }
        }

        const CandidateSet& rep_cand = candidates.at(users[rep]);
        EvalContext rep_ctx{&rep_cand, &catalog, novelty};
        Rng rep_rng = Rng::for_stream(global_seed, "guided-init-centroid-" + std::to_string(c));
        Population centroid = random_init(rep_cand, pop_size, list_length, rep_ctx, rep_rng);
        for (int g = 0; g < pre.generations; ++g)
            centroid = evolve_generation(std::move(centroid), rep_cand, rep_ctx, pre, rep_rng);
        auto fronts = fast_nondominated_sort(centroid.members);

        for (std::size_t m : cluster_members[c]) {
            const UserId user = users[m];
            const CandidateSet& cand = candidates.at(user);
            EvalContext ctx{&cand, &catalog, novelty};
            Rng user_rng = Rng::for_user(global_seed, user, "init");

            Population pop;
            pop.user = user;
            pop.capacity = pop_size;
            for (std::size_t idx : fronts[0]) {
                if (pop.members.size() == pop_size) break;
                Individual ind;
                ind.list = project_solution(centroid.members[idx].list, cand);
                bool duplicate = false;
                for (const Individual& existing : pop.members)
                    if (existing.list == ind.list) duplicate = true;
                if (duplicate) continue;
                ind.objectives = evaluate(ind.list, ctx);
                pop.members.push_back(std::move(ind));
            }
            while (pop.members.size() < pop_size) {
                Individual ind;
                ind.list = random_solution(cand, list_length, user_rng);
                ind.objectives = evaluate(ind.list, ctx);
                pop.members.push_back(std::move(ind));
            }
            result.emplace(user, std::move(pop));
        }
    }

    // Safety net: any user not covered above gets a random population.
    for (const auto& [user, cand] : candidates) {
        if (result.count(user)) continue;
        EvalContext ctx{&cand, &catalog, novelty};
        Rng user_rng = Rng::for_user(global_seed, user, "init");
        result.emplace(user, random_init(cand, pop_size, list_length, ctx, user_rng));
    }
    return result;
}

} // namespace preferrec

#endif // PREFERREC_GUIDED_INIT_HPP
