/**
 * @file evolution.hpp
 * @brief Per-user NSGA-II over fixed-length recommendation lists.
 *
 * Solutions are permutation-coded: an individual is an ordered list of K
 * distinct candidate items. Variation operators are a two-point subsequence
 * exchange crossover and a swap/replacement mutation, both followed by a
 * repair step that restores the K-distinct-items invariant.
 *
 * Every routine consumes randomness only from the caller-supplied stream and
 * breaks all comparison ties by original index, so a whole evolution run is a
 * pure function of (population, data, config, stream).
 */

#ifndef PREFERREC_EVOLUTION_HPP
#define PREFERREC_EVOLUTION_HPP

#include <algorithm>
#include <limits>
#include <utility>
#include <vector>

#include "core.hpp"
#include "errors.hpp"
#include "objectives.hpp"
#include "rng.hpp"

namespace preferrec {

struct EvolutionConfig {
    std::size_t pop_size = 50;
    int generations = 10;
    double crossover_prob = 0.9;
    double mutation_prob = 0.2;

    void validate() const {
        if (pop_size < 2) throw config_error("pop_size must be at least 2");
        if (generations < 0) throw config_error("generations must be non-negative");
        if (crossover_prob < 0.0 || crossover_prob > 1.0)
            throw config_error("crossover_prob must lie in [0, 1]");
        if (mutation_prob < 0.0 || mutation_prob > 1.0)
            throw config_error("mutation_prob must lie in [0, 1]");
    }
};

/// One candidate solution plus its cached fitness and sort bookkeeping.
struct Individual {
    SolutionList list;
    ObjectiveVector objectives;
    int rank = 0;         ///< front index from the last non-dominated sort
    double crowding = 0.0;///< crowding distance within that front
};

/// One user's population. members.size() may temporarily exceed capacity
/// between an anchor merge and the next environmental selection.
struct Population {
    UserId user = -1;
    std::size_t capacity = 0;
    std::vector<Individual> members;
};

/// Uniform random list of k distinct candidates (partial Fisher-Yates).
[[nodiscard]] inline SolutionList random_solution(const CandidateSet& cand, std::size_t k,
                                                  Rng& rng) {
    const std::size_t n = cand.size();
    if (k == 0 || k > n)
        throw config_error("list length " + std::to_string(k) +
                           " must lie in [1, " + std::to_string(n) + "]");
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    SolutionList list;
    list.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + rng.uniform_index(n - i);
        std::swap(idx[i], idx[j]);
        list.push_back(cand.item_at(idx[i]));
    }
    return list;
}

/// Population of n independent uniform random individuals, evaluated.
[[nodiscard]] inline Population random_init(const CandidateSet& cand, std::size_t n,
                                            std::size_t k, const EvalContext& ctx, Rng& rng) {
    Population pop;
    pop.user = cand.user();
    pop.capacity = n;
    pop.members.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Individual ind;
        ind.list = random_solution(cand, k, rng);
        ind.objectives = evaluate(ind.list, ctx);
        pop.members.push_back(std::move(ind));
    }
    return pop;
}

/**
 * @brief Restores validity of a raw list of candidate items.
 *
 * Each duplicated item is kept once at its first position; later occurrences
 * become vacancies, refilled in place with uniformly drawn unused candidates.
 * The list length is unchanged.
 */
inline void repair(SolutionList& list, const CandidateSet& cand, Rng& rng) {
    thread_local std::vector<std::uint64_t> stamp;
    thread_local std::uint64_t epoch = 0;
    if (stamp.size() < cand.size()) stamp.assign(cand.size(), 0);
    ++epoch;

    std::vector<std::size_t> vacancies;
    for (std::size_t i = 0; i < list.size(); ++i) {
        const std::size_t ci = cand.index_of(list[i]); // throws if not a candidate
        if (stamp[ci] == epoch) {
            vacancies.push_back(i);
        } else {
            stamp[ci] = epoch;
        }
    }
    if (vacancies.empty()) return;

    // Unused candidates in candidate order; draws are uniform over the pool.
    std::vector<ItemId> unused;
    for (std::size_t ci = 0; ci < cand.size(); ++ci)
        if (stamp[ci] != epoch) unused.push_back(cand.item_at(ci));
    if (unused.size() < vacancies.size())
        throw invalid_solution_error("candidate pool of user " +
                                     std::to_string(cand.user()) +
                                     " too small to repair the list");
    for (std::size_t v : vacancies) {
        const std::size_t j = rng.uniform_index(unused.size());
        list[v] = unused[j];
        unused[j] = unused.back();
        unused.pop_back();
    }
}

/**
 * @brief Two-point subsequence exchange crossover.
 *
 * Cut positions 0 <= i < j <= K are drawn uniformly; the children swap the
 * segment [i, j) and are then repaired. With i = 0, j = K the children are
 * full copies of the opposite parent.
 */
[[nodiscard]] inline std::pair<SolutionList, SolutionList> crossover(const SolutionList& a,
                                                                     const SolutionList& b,
                                                                     const CandidateSet& cand,
                                                                     Rng& rng) {
    if (a.size() != b.size())
        throw invalid_solution_error("crossover parents differ in length");
    const std::size_t k = a.size();
    std::size_t i = rng.uniform_index(k + 1);
    std::size_t j = rng.uniform_index(k + 1);
    while (i == j) j = rng.uniform_index(k + 1);
    if (i > j) std::swap(i, j);

    SolutionList ca = a, cb = b;
    for (std::size_t p = i; p < j; ++p) std::swap(ca[p], cb[p]);
    repair(ca, cand, rng);
    repair(cb, cand, rng);
    return {std::move(ca), std::move(cb)};
}

/**
 * @brief Swap/replacement mutation.
 *
 * With probability p_m the individual is mutated: a fair coin selects either
 * a swap of two distinct positions or the replacement of one position with a
 * uniformly drawn candidate not already in the list; the result is repaired
 * and re-evaluated. Otherwise the individual is returned untouched.
 */
inline void mutate(Individual& ind, const CandidateSet& cand, const EvalContext& ctx,
                   double p_m, Rng& rng) {
    if (!rng.bernoulli(p_m)) return;
    SolutionList& list = ind.list;
    const std::size_t k = list.size();
    if (rng.bernoulli(0.5)) {
        if (k >= 2) {
            std::size_t i = rng.uniform_index(k);
            std::size_t j = rng.uniform_index(k);
            while (j == i) j = rng.uniform_index(k);
            std::swap(list[i], list[j]);
        }
    } else {
        std::vector<ItemId> unused;
        for (std::size_t ci = 0; ci < cand.size(); ++ci) {
            const ItemId it = cand.item_at(ci);
            if (std::find(list.begin(), list.end(), it) == list.end()) unused.push_back(it);
        }
        if (!unused.empty()) {
            const std::size_t pos = rng.uniform_index(k);
            list[pos] = unused[rng.uniform_index(unused.size())];
        }
    }
    repair(list, cand, rng);
    ind.objectives = evaluate(list, ctx);
}

/**
 * @brief Fast non-dominated sort.
 *
 * Assigns each member its front index (rank 0 = Pareto front) and returns the
 * fronts as index lists in ascending rank, each front in ascending original
 * index. O(n^2) dominance comparisons.
 */
[[nodiscard]] inline std::vector<std::vector<std::size_t>>
fast_nondominated_sort(std::vector<Individual>& members) {
    const std::size_t n = members.size();
    std::vector<std::vector<std::size_t>> fronts;
    if (n == 0) return fronts;

    std::vector<int> domination_count(n, 0);
    std::vector<std::vector<std::size_t>> dominated(n);
    fronts.emplace_back();
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = 0; q < n; ++q) {
            if (p == q) continue;
            if (dominates(members[p].objectives, members[q].objectives))
                dominated[p].push_back(q);
            else if (dominates(members[q].objectives, members[p].objectives))
                ++domination_count[p];
        }
        if (domination_count[p] == 0) {
            members[p].rank = 0;
            fronts[0].push_back(p);
        }
    }
    std::size_t current = 0;
    while (current < fronts.size()) {
        std::vector<std::size_t> next;
        for (std::size_t p : fronts[current]) {
            for (std::size_t q : dominated[p]) {
                if (--domination_count[q] == 0) {
                    members[q].rank = static_cast<int>(current) + 1;
                    next.push_back(q);
                }
            }
        }
        if (!next.empty()) {
            std::sort(next.begin(), next.end());
            fronts.push_back(std::move(next));
        }
        ++current;
    }
    return fronts;
}

/**
 * @brief Crowding distance of one front.
 *
 * Boundary members of each objective get infinity; interior members sum
 * (next - prev) / (max - min) over objectives. An objective with max == min
 * contributes nothing. Fronts of size <= 2 are all-infinite.
 */
inline void crowding_distance(std::vector<Individual>& members,
                              const std::vector<std::size_t>& front) {
    const double inf = std::numeric_limits<double>::infinity();
    const std::size_t m = front.size();
    for (std::size_t idx : front) members[idx].crowding = 0.0;
    if (m <= 2) {
        for (std::size_t idx : front) members[idx].crowding = inf;
        return;
    }
    std::vector<std::size_t> order(front);
    for (std::size_t obj = 0; obj < 3; ++obj) {
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const double va = members[a].objectives[obj];
            const double vb = members[b].objectives[obj];
            if (va != vb) return va < vb;
            return a < b;
        });
        const double lo = members[order.front()].objectives[obj];
        const double hi = members[order.back()].objectives[obj];
        members[order.front()].crowding = inf;
        members[order.back()].crowding = inf;
        if (hi == lo) continue;
        for (std::size_t r = 1; r + 1 < m; ++r) {
            const double gap = members[order[r + 1]].objectives[obj] -
                               members[order[r - 1]].objectives[obj];
            members[order[r]].crowding += gap / (hi - lo);
        }
    }
}

/**
 * @brief Elitist truncation of a combined pool down to capacity.
 *
 * Fills by ascending front index; the last admitted front is truncated by
 * descending crowding distance, ties resolved toward the lower original
 * index. Requires |combined| >= capacity.
 */
[[nodiscard]] inline Population environmental_selection(std::vector<Individual> combined,
                                                        UserId user, std::size_t capacity) {
    if (combined.size() < capacity)
        throw config_error("environmental selection needs at least capacity=" +
                           std::to_string(capacity) + " members, got " +
                           std::to_string(combined.size()));
    auto fronts = fast_nondominated_sort(combined);
    for (const auto& front : fronts) crowding_distance(combined, front);

    Population out;
    out.user = user;
    out.capacity = capacity;
    out.members.reserve(capacity);
    for (const auto& front : fronts) {
        if (out.members.size() == capacity) break;
        if (out.members.size() + front.size() <= capacity) {
            for (std::size_t idx : front) out.members.push_back(combined[idx]);
        } else {
            std::vector<std::size_t> order(front);
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                if (combined[a].crowding != combined[b].crowding)
                    return combined[a].crowding > combined[b].crowding;
                return a < b;
            });
            const std::size_t need = capacity - out.members.size();
            for (std::size_t r = 0; r < need; ++r) out.members.push_back(combined[order[r]]);
        }
    }
    return out;
}

/// Binary tournament on (rank ascending, crowding descending, index ascending).
[[nodiscard]] inline std::size_t tournament_select(const std::vector<Individual>& members,
                                                   Rng& rng) {
    const std::size_t n = members.size();
    std::size_t a = rng.uniform_index(n);
    std::size_t b = rng.uniform_index(n);
    if (members[a].rank != members[b].rank) return members[a].rank < members[b].rank ? a : b;
    if (members[a].crowding != members[b].crowding)
        return members[a].crowding > members[b].crowding ? a : b;
    return std::min(a, b);
}

namespace detail {

/// Removes exact ordered-duplicate lists (keeping first occurrences). If that
/// drops the pool below `floor_size`, skipped duplicates are re-added in their
/// original order until the floor is met.
[[nodiscard]] inline std::vector<Individual> dedup_pool(std::vector<Individual> pool,
                                                        std::size_t floor_size) {
    std::vector<Individual> unique_members;
    std::vector<Individual> duplicates;
    unique_members.reserve(pool.size());
    for (auto& ind : pool) {
        bool seen = false;
        for (const auto& u : unique_members) {
            if (u.list == ind.list) {
                seen = true;
                break;
            }
        }
        (seen ? duplicates : unique_members).push_back(std::move(ind));
    }
    for (auto& d : duplicates) {
        if (unique_members.size() >= floor_size) break;
        unique_members.push_back(std::move(d));
    }
    return unique_members;
}

} // namespace detail

/**
 * @brief One NSGA-II generation.
 *
 * Ranks the parents, breeds capacity offspring via binary tournaments,
 * crossover (probability crossover_prob) and mutation (probability
 * mutation_prob each child), then applies environmental selection to the
 * deduplicated parents-plus-offspring pool. Exact ordered-duplicate lists are
 * collapsed before selection so copies cannot distort crowding; with both
 * variation probabilities at zero the population is returned unchanged as a
 * set.
 */
[[nodiscard]] inline Population evolve_generation(Population parents, const CandidateSet& cand,
                                                  const EvalContext& ctx,
                                                  const EvolutionConfig& config, Rng& rng) {
    config.validate();
    if (parents.members.empty()) throw config_error("cannot evolve an empty population");
    const std::size_t capacity = parents.capacity ? parents.capacity : parents.members.size();

    auto fronts = fast_nondominated_sort(parents.members);
    for (const auto& front : fronts) crowding_distance(parents.members, front);

    std::vector<Individual> offspring;
    offspring.reserve(capacity + 1);
    while (offspring.size() < capacity) {
        const Individual& p1 = parents.members[tournament_select(parents.members, rng)];
        const Individual& p2 = parents.members[tournament_select(parents.members, rng)];
        Individual c1, c2;
        if (rng.bernoulli(config.crossover_prob)) {
            auto [la, lb] = crossover(p1.list, p2.list, cand, rng);
            c1.list = std::move(la);
            c2.list = std::move(lb);
            c1.objectives = evaluate(c1.list, ctx);
            c2.objectives = evaluate(c2.list, ctx);
        } else {
            c1 = p1;
            c2 = p2;
        }
        mutate(c1, cand, ctx, config.mutation_prob, rng);
        mutate(c2, cand, ctx, config.mutation_prob, rng);
        offspring.push_back(std::move(c1));
        if (offspring.size() < capacity) offspring.push_back(std::move(c2));
    }

    std::vector<Individual> combined = std::move(parents.members);
    combined.insert(combined.end(), std::make_move_iterator(offspring.begin()),
                    std::make_move_iterator(offspring.end()));
    combined = detail::dedup_pool(std::move(combined), capacity);
    return environmental_selection(std::move(combined), parents.user, capacity);
}

} // namespace preferrec

#endif // PREFERREC_EVOLUTION_HPP
