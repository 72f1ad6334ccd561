/**
 * @file synthetic.hpp
 * @brief Deterministic synthetic dataset generator for desk-scale runs.
 *
 * Item popularity follows a power law (Zipf exponent 1.1 over item rank);
 * each user draws a latent category affinity and samples interactions
 * proportional to affinity times popularity. Base relevance scores combine
 * affinity with a per-item quality plus noise, and are emitted for every
 * (user, item) pair so any candidate sample is covered. Regenerating with the
 * same spec is byte-identical.
 */

#ifndef PREFERREC_SYNTHETIC_HPP
#define PREFERREC_SYNTHETIC_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "core.hpp"
#include "data.hpp"
#include "errors.hpp"
#include "rng.hpp"

namespace preferrec {

struct SyntheticSpec {
    std::size_t users = 200;
    std::size_t items = 500;
    std::size_t categories = 20;
    std::uint64_t seed = 7;
    std::size_t min_interactions = 5;  ///< per user, at least 3
    std::size_t max_interactions = 30; ///< per user

    void validate() const {
        if (users < 1) throw config_error("synthetic spec needs at least one user");
        if (items < 120)
            throw config_error("synthetic spec needs at least 120 items to support "
                               "99-negative candidate pools");
        if (categories < 2) throw config_error("synthetic spec needs at least 2 categories");
        if (min_interactions < 3)
            throw config_error("synthetic users need at least 3 interactions each");
        if (max_interactions < min_interactions)
            throw config_error("max_interactions must be >= min_interactions");
        if (max_interactions + 100 > items)
            throw config_error("history plus a 100-item candidate pool must fit the catalog");
    }
};

/// In-memory synthetic dataset; scores are stored user-major over all items.
struct SyntheticDataset {
    SyntheticSpec spec;
    std::vector<Interaction> interactions;
    std::vector<std::vector<CategoryId>> item_categories; ///< per item id 0..items-1
    std::vector<double> scores;                           ///< users x items

    [[nodiscard]] double score(UserId user, ItemId item) const {
        return scores[static_cast<std::size_t>(user) * spec.items +
                      static_cast<std::size_t>(item)];
    }
};

[[nodiscard]] inline SyntheticDataset generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    SyntheticDataset data;
    data.spec = spec;
    Rng rng = Rng::for_stream(spec.seed, "synthetic");

    // Item side: 1-2 categories each, Zipf popularity weight by id rank,
    // and a latent quality. Category assignment cycles so every category
    // is populated, with a second uniform category 30% of the time.
    data.item_categories.resize(spec.items);
    std::vector<double> quality(spec.items);
    std::vector<double> pop_weight(spec.items);
    for (std::size_t i = 0; i < spec.items; ++i) {
        const auto primary = static_cast<CategoryId>(i % spec.categories);
        data.item_categories[i].push_back(primary);
        if (rng.bernoulli(0.3)) {
            auto extra = static_cast<CategoryId>(rng.uniform_index(spec.categories));
            if (extra != primary) data.item_categories[i].push_back(extra);
        }
        std::sort(data.item_categories[i].begin(), data.item_categories[i].end());
        quality[i] = 0.5 + 0.5 * rng.uniform_real();
        pop_weight[i] = 1.0 / std::pow(static_cast<double>(i + 1), 1.1);
    }

    // Taste archetypes: small shared sets of loved categories. Each user
    // draws one archetype plus one personal loved category, so preferences
    // overlap across the user base instead of being drawn independently —
    // that shared structure is what cross-user aggregation can pick up at
    // this scale.
    const std::size_t n_archetypes = std::max<std::size_t>(2, spec.categories / 4);
    const std::size_t cats_per_archetype = std::min<std::size_t>(3, spec.categories);
    std::vector<std::vector<std::size_t>> archetypes(n_archetypes);
    for (auto& cats : archetypes) {
        while (cats.size() < cats_per_archetype) {
            const std::size_t c = rng.uniform_index(spec.categories);
            if (std::find(cats.begin(), cats.end(), c) == cats.end()) cats.push_back(c);
        }
    }

    // User side: archetype-driven category affinity, then interactions
    // sampled without replacement by affinity x popularity.
    data.scores.resize(spec.users * spec.items);
    for (std::size_t u = 0; u < spec.users; ++u) {
        std::vector<double> affinity(spec.categories, 0.05);
        for (std::size_t c : archetypes[rng.uniform_index(n_archetypes)]) affinity[c] = 1.0;
        affinity[rng.uniform_index(spec.categories)] = 1.0; // personal loved category

        std::vector<double> item_affinity(spec.items);
        for (std::size_t i = 0; i < spec.items; ++i) {
            double best = 0.0;
            for (CategoryId c : data.item_categories[i])
                best = std::max(best, affinity[static_cast<std::size_t>(c)]);
            item_affinity[i] = best;
        }

        const std::size_t n_inter =
            spec.min_interactions +
            rng.uniform_index(spec.max_interactions - spec.min_interactions + 1);
        std::vector<double> weight(spec.items);
        for (std::size_t i = 0; i < spec.items; ++i)
            weight[i] = pop_weight[i] * item_affinity[i];
        std::vector<bool> taken(spec.items, false);
        for (std::size_t t = 0; t < n_inter; ++t) {
            double total = 0.0;
            for (std::size_t i = 0; i < spec.items; ++i)
                if (!taken[i]) total += weight[i];
            double draw = rng.uniform_real() * total;
            std::size_t chosen = spec.items;
            for (std::size_t i = 0; i < spec.items; ++i) {
                if (taken[i]) continue;
                draw -= weight[i];
                if (draw <= 0.0) {
                    chosen = i;
                    break;
                }
            }
            if (chosen == spec.items) { // numeric edge: take the last free item
                for (std::size_t i = spec.items; i-- > 0;)
                    if (!taken[i]) { chosen = i; break; }
            }
            taken[chosen] = true;
            Interaction it;
            it.user = static_cast<UserId>(u);
            it.item = static_cast<ItemId>(chosen);
            it.timestamp = static_cast<std::int64_t>(t);
            it.categories = data.item_categories[chosen];
            data.interactions.push_back(std::move(it));
        }

        for (std::size_t i = 0; i < spec.items; ++i) {
            const double noise = rng.uniform_real();
            data.scores[u * spec.items + i] =
                0.9 * item_affinity[i] * quality[i] + 0.1 * noise;
        }
    }

    // Guarantee catalog coverage: every item must occur in some history so
    // downstream candidate pools can draw from the full catalog. Unseen items
    // are assigned round-robin with pre-history timestamps, which keeps them
    // on the training side of a time-ordered split.
    std::vector<bool> seen(spec.items, false);
    for (const auto& it : data.interactions) seen[static_cast<std::size_t>(it.item)] = true;
    std::vector<std::int64_t> extra(spec.users, 0);
    std::size_t next_user = 0;
    for (std::size_t i = 0; i < spec.items; ++i) {
        if (seen[i]) continue;
        const std::size_t u = next_user++ % spec.users;
        Interaction it;
        it.user = static_cast<UserId>(u);
        it.item = static_cast<ItemId>(i);
        it.timestamp = -1 - extra[u]++;
        it.categories = data.item_categories[i];
        data.interactions.push_back(std::move(it));
    }
    return data;
}

/// Writes the interaction log in the loader's format.
inline void write_interactions_tsv(const std::string& path, const SyntheticDataset& data) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw data_error("cannot open " + path + " for writing");
    std::fputs("user_id\titem_id\ttimestamp\tcategories\n", f);
    for (const auto& it : data.interactions) {
        std::fprintf(f, "%lld\t%lld\t%lld\t", static_cast<long long>(it.user),
                     static_cast<long long>(it.item), static_cast<long long>(it.timestamp));
        for (std::size_t c = 0; c < it.categories.size(); ++c)
            std::fprintf(f, "%s%d", c ? "|" : "", it.categories[c]);
        std::fputc('\n', f);
    }
    std::fclose(f);
}

/// Writes base scores for every (user, item) pair in the loader's format.
inline void write_scores_tsv(const std::string& path, const SyntheticDataset& data) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw data_error("cannot open " + path + " for writing");
    std::fputs("user_id\titem_id\tscore\n", f);
    for (std::size_t u = 0; u < data.spec.users; ++u)
        for (std::size_t i = 0; i < data.spec.items; ++i)
            std::fprintf(f, "%zu\t%zu\t%.17g\n", u, i, data.scores[u * data.spec.items + i]);
    std::fclose(f);
}

} // namespace preferrec

#endif // PREFERREC_SYNTHETIC_HPP
