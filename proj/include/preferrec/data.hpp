/**
 * @file data.hpp
 * @brief Dataset ingestion: interaction logs, leave-one-out splitting,
 *        candidate construction, base-score loading, and feature assembly.
 *
 * Input files are delimited text (tab or comma), UTF-8, with an optional
 * header row. Categories within a field are pipe-separated. All loaders
 * report malformed rows by line number and fail once a tolerance threshold is
 * exceeded.
 */

#ifndef PREFERREC_DATA_HPP
#define PREFERREC_DATA_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "core.hpp"
#include "errors.hpp"
#include "rng.hpp"

namespace preferrec {

struct Interaction {
    UserId user = -1;
    ItemId item = -1;
    std::int64_t timestamp = 0;
    std::vector<CategoryId> categories;
};

struct LoadOptions {
    char delimiter = '\t';
    std::size_t max_malformed = 0; ///< rows tolerated (reported) before failing
};

namespace detail {

inline std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, delim)) fields.push_back(field);
    if (!line.empty() && line.back() == delim) fields.push_back("");
    return fields;
}

inline bool parse_i64(const std::string& s, std::int64_t& out) {
    if (s.empty()) return false;
    std::size_t pos = 0;
    try {
        out = std::stoll(s, &pos);
    } catch (...) {
        return false;
    }
    return pos == s.size();
}

inline bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    std::size_t pos = 0;
    try {
        out = std::stod(s, &pos);
    } catch (...) {
        return false;
    }
    return pos == s.size();
}

inline bool parse_categories(const std::string& s, std::vector<CategoryId>& out) {
    out.clear();
    if (s.empty()) return false;
    std::string part;
    std::istringstream ss(s);
    while (std::getline(ss, part, '|')) {
        std::int64_t v = 0;
        if (!parse_i64(part, v)) return false;
        out.push_back(static_cast<CategoryId>(v));
    }
    return !out.empty();
}

inline std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

} // namespace detail

/**
 * @brief Loads an interaction log.
 *
 * Row format: user, item, timestamp, pipe-separated category ids. A header
 * row (non-numeric first field) is skipped. Duplicate (user, item, timestamp)
 * rows are deduplicated, keeping the first. Malformed rows are collected into
 * `warnings` with their line numbers; more than options.max_malformed of them
 * is an error. An empty file yields an empty set (with a warning).
 */
[[nodiscard]] inline std::vector<Interaction>
load_interactions(const std::string& path, const LoadOptions& options = {},
                  std::vector<std::string>* warnings = nullptr) {
    std::ifstream f(path);
    if (!f) throw data_error("cannot open " + path);
    std::vector<Interaction> rows;
    std::set<std::tuple<UserId, ItemId, std::int64_t>> seen;
    std::size_t malformed = 0;
    auto warn = [&warnings](const std::string& msg) {
        if (warnings) warnings->push_back(msg);
    };

    std::string line;
    std::size_t line_no = 0;
    bool first_content_line = true;
    while (std::getline(f, line)) {
        ++line_no;
        line = detail::strip_cr(line);
        if (line.empty()) continue;
        const auto fields = detail::split_line(line, options.delimiter);
        Interaction it;
        bool ok = fields.size() == 4 && detail::parse_i64(fields[0], it.user) &&
                  detail::parse_i64(fields[1], it.item) &&
                  detail::parse_i64(fields[2], it.timestamp) &&
                  detail::parse_categories(fields[3], it.categories) && it.user >= 0 &&
                  it.item >= 0;
        if (!ok) {
            if (first_content_line) { // header row
                first_content_line = false;
                continue;
            }
            ++malformed;
            warn(path + ":" + std::to_string(line_no) + ": malformed row");
            if (malformed > options.max_malformed)
                throw data_error(path + ":" + std::to_string(line_no) +
                                 ": malformed row (tolerance " +
                                 std::to_string(options.max_malformed) + " exceeded)");
            continue;
        }
        first_content_line = false;
        if (!seen.emplace(it.user, it.item, it.timestamp).second) continue;
        rows.push_back(std::move(it));
    }
    if (rows.empty()) warn(path + ": no interactions loaded");
    return rows;
}

/// Leave-one-out split of one interaction log.
struct SplitResult {
    std::vector<Interaction> train;
    std::map<UserId, Interaction> validation; ///< second-most-recent per user
    std::map<UserId, Interaction> test;       ///< most recent per user
    std::vector<UserId> dropped;              ///< users with fewer than min_history rows
};

/**
 * @brief Chronological leave-one-out split.
 *
 * Per user, interactions are ordered by timestamp (input order breaks ties);
 * the most recent becomes test, the second most recent validation, the rest
 * training. Users with fewer than min_history interactions are dropped.
 */
[[nodiscard]] inline SplitResult leave_one_out(const std::vector<Interaction>& interactions,
                                               std::size_t min_history = 3) {
    if (min_history < 3) throw config_error("min_history must be at least 3");
    std::map<UserId, std::vector<Interaction>> by_user;
    for (const auto& it : interactions) by_user[it.user].push_back(it);

    SplitResult out;
    for (auto& [user, rows] : by_user) {
        if (rows.size() < min_history) {
            out.dropped.push_back(user);
            continue;
        }
        std::stable_sort(rows.begin(), rows.end(),
                         [](const Interaction& a, const Interaction& b) {
                             return a.timestamp < b.timestamp;
                         });
        out.test.emplace(user, rows.back());
        out.validation.emplace(user, rows[rows.size() - 2]);
        for (std::size_t i = 0; i + 2 < rows.size(); ++i) out.train.push_back(rows[i]);
    }
    return out;
}

enum class SplitRole { validation, test };

struct CandidateOptions {
    std::size_t negatives = 99; ///< uniformly sampled per user
    std::uint64_t seed = 0;
};

/**
 * @brief Builds each user's candidate pool for the chosen split side.
 *
 * The pool holds the held-out positive plus `negatives` items sampled
 * uniformly (without replacement) from the catalog excluding the user's
 * entire interaction history; the pool order is then shuffled. Scores start
 * as NaN and are attached by load_scores or uniform_fallback_scores.
 * Sampling draws from a per-user stream, so the result is independent of
 * user iteration order and thread count.
 */
[[nodiscard]] inline std::map<UserId, CandidateSet>
build_candidates(const SplitResult& split, const std::vector<Interaction>& all_interactions,
                 const std::vector<ItemId>& catalog_items, SplitRole role,
                 const CandidateOptions& options = {}) {
    const auto& held_out = (role == SplitRole::test) ? split.test : split.validation;
    std::unordered_map<UserId, std::unordered_set<ItemId>> history;
    for (const auto& it : all_interactions) history[it.user].insert(it.item);

    std::vector<ItemId> sorted_catalog = catalog_items;
    std::sort(sorted_catalog.begin(), sorted_catalog.end());

    const char* role_tag = (role == SplitRole::test) ? "cand-test" : "cand-val";
    std::map<UserId, CandidateSet> result;
    for (const auto& [user, positive_row] : held_out) {
        const auto& hist = history.at(user);
        std::vector<ItemId> pool;
        pool.reserve(sorted_catalog.size());
        for (ItemId item : sorted_catalog)
            if (hist.count(item) == 0) pool.push_back(item);
        if (pool.size() < options.negatives)
            throw data_error("user " + std::to_string(user) + " has only " +
                             std::to_string(pool.size()) +
                             " items outside their history; need " +
                             std::to_string(options.negatives) + " negatives");

        Rng rng = Rng::for_user(options.seed, user, role_tag);
        std::vector<ItemId> items;
        items.reserve(options.negatives + 1);
        items.push_back(positive_row.item);
        for (std::size_t i = 0; i < options.negatives; ++i) {
            const std::size_t j = i + rng.uniform_index(pool.size() - i);
            std::swap(pool[i], pool[j]);
            items.push_back(pool[i]);
        }
        rng.shuffle(items);
        const std::vector<double> scores(items.size(),
                                         std::numeric_limits<double>::quiet_NaN());
        result.emplace(user, CandidateSet(user, std::move(items), scores, positive_row.item));
    }
    return result;
}

/**
 * @brief Attaches base scores from a delimited file (user, item, score).
 *
 * Rows naming non-candidate pairs are ignored. Every candidate of every user
 * must end up scored; otherwise the error names up to 20 missing pairs.
 */
inline void load_scores(const std::string& path, std::map<UserId, CandidateSet>& candidates,
                        const LoadOptions& options = {}) {
    std::ifstream f(path);
    if (!f) throw data_error("cannot open " + path);
    std::string line;
    std::size_t line_no = 0;
    std::size_t malformed = 0;
    bool first_content_line = true;
    while (std::getline(f, line)) {
        ++line_no;
        line = detail::strip_cr(line);
        if (line.empty()) continue;
        const auto fields = detail::split_line(line, options.delimiter);
        UserId user = -1;
        ItemId item = -1;
        double score = 0.0;
        bool ok = fields.size() == 3 && detail::parse_i64(fields[0], user) &&
                  detail::parse_i64(fields[1], item) && detail::parse_double(fields[2], score);
        if (!ok) {
            if (first_content_line) {
                first_content_line = false;
                continue;
            }
            ++malformed;
            if (malformed > options.max_malformed)
                throw data_error(path + ":" + std::to_string(line_no) + ": malformed score row");
            continue;
        }
        first_content_line = false;
        auto it = candidates.find(user);
        if (it == candidates.end()) continue;
        if (!it->second.contains(item)) continue;
        it->second.set_score(item, score);
    }

    std::vector<std::string> missing;
    std::size_t missing_count = 0;
    for (const auto& [user, cand] : candidates) {
        for (std::size_t i = 0; i < cand.size(); ++i) {
            if (std::isnan(cand.score_at(i))) {
                ++missing_count;
                if (missing.size() < 20)
                    missing.push_back("(" + std::to_string(user) + ", " +
                                      std::to_string(cand.item_at(i)) + ")");
            }
        }
    }
    if (missing_count > 0) {
        std::string msg = path + " is missing scores for " + std::to_string(missing_count) +
                          " candidate pairs:";
        for (const auto& m : missing) msg += " " + m;
        throw data_error(msg);
    }
}

/// Smoke-test fallback: the candidate at position j scores 1 / (j + 1).
inline void uniform_fallback_scores(std::map<UserId, CandidateSet>& candidates) {
    for (auto& [user, cand] : candidates)
        for (std::size_t j = 0; j < cand.size(); ++j)
            cand.set_score(cand.item_at(j), 1.0 / static_cast<double>(j + 1));
}

/**
 * @brief Loads item embeddings: item id followed by a fixed number of floats.
 */
[[nodiscard]] inline std::map<ItemId, std::vector<double>>
load_embeddings(const std::string& path, const LoadOptions& options = {}) {
    std::ifstream f(path);
    if (!f) throw data_error("cannot open " + path);
    std::map<ItemId, std::vector<double>> out;
    std::string line;
    std::size_t line_no = 0;
    std::size_t dim = 0;
    bool first_content_line = true;
    while (std::getline(f, line)) {
        ++line_no;
        line = detail::strip_cr(line);
        if (line.empty()) continue;
        const auto fields = detail::split_line(line, options.delimiter);
        ItemId item = -1;
        bool ok = fields.size() >= 2 && detail::parse_i64(fields[0], item);
        std::vector<double> vec;
        if (ok) {
            vec.reserve(fields.size() - 1);
            for (std::size_t i = 1; i < fields.size() && ok; ++i) {
                double v = 0.0;
                ok = detail::parse_double(fields[i], v);
                vec.push_back(v);
            }
        }
        if (!ok) {
            if (first_content_line) {
                first_content_line = false;
                continue;
            }
            throw data_error(path + ":" + std::to_string(line_no) + ": malformed embedding row");
        }
        first_content_line = false;
        if (dim == 0) dim = vec.size();
        if (vec.size() != dim)
            throw data_error(path + ":" + std::to_string(line_no) +
                             ": embedding dimension mismatch");
        out[item] = std::move(vec);
    }
    return out;
}

/**
 * @brief Builds catalog metadata (categories + training popularity) from the
 *        split, covering every item seen anywhere in the log.
 *
 * Popularity is the training-set interaction count, clamped to at least 1 so
 * inverse popularity stays defined for items only seen in held-out rows.
 */
[[nodiscard]] inline ItemCatalog build_catalog(const std::vector<Interaction>& all_interactions,
                                               const SplitResult& split) {
    std::map<ItemId, std::vector<CategoryId>> cats;
    for (const auto& it : all_interactions) {
        auto& c = cats[it.item];
        c.insert(c.end(), it.categories.begin(), it.categories.end());
    }
    std::map<ItemId, std::int64_t> pop;
    for (const auto& it : split.train) ++pop[it.item];

    std::vector<ItemMeta> metas;
    metas.reserve(cats.size());
    for (auto& [item, c] : cats) {
        ItemMeta m;
        m.item = item;
        m.categories = std::move(c);
        auto p = pop.find(item);
        m.pop_count = (p == pop.end()) ? 1 : std::max<std::int64_t>(1, p->second);
        metas.push_back(std::move(m));
    }
    return ItemCatalog(std::move(metas));
}

/**
 * @brief Assembles per-item scorer features x_i = [e_i || p_i || div_i].
 *
 * e_i comes from the embeddings map, or falls back to a category multi-hot
 * when the map is empty; p_i is popularity normalized by the maximum count;
 * div_i is the item's own category coverage. With embeddings present, every
 * catalog item must be covered.
 */
inline void assemble_features(ItemCatalog& catalog,
                              const std::map<ItemId, std::vector<double>>& embeddings = {}) {
    const double max_pop = static_cast<double>(catalog.max_pop());
    const double n_cats = static_cast<double>(catalog.total_categories());
    for (ItemId item : catalog.sorted_items()) {
        const ItemMeta& m = catalog.meta(item);
        std::vector<double> x;
        if (embeddings.empty()) {
            x.assign(catalog.total_categories(), 0.0);
            for (CategoryId c : m.categories)
                x[static_cast<std::size_t>(catalog.category_index(c))] = 1.0;
        } else {
            auto it = embeddings.find(item);
            if (it == embeddings.end())
                throw data_error("no embedding provided for item " + std::to_string(item));
            x = it->second;
        }
        x.push_back(static_cast<double>(m.pop_count) / max_pop);
        x.push_back(static_cast<double>(m.categories.size()) / n_cats);
        catalog.set_feature(item, std::move(x));
    }
}

} // namespace preferrec

#endif // PREFERREC_DATA_HPP
