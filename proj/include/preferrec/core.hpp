/**
 * @file core.hpp
 * @brief Domain types: identifiers, objective vectors, item metadata,
 *        per-user candidate sets, and solution-list validity.
 *
 * A solution is an ordered list of exactly K distinct item ids drawn from one
 * user's candidate set. Fitness is a three-component objective vector
 * (accuracy, diversity, novelty), all maximized.
 */

#ifndef PREFERREC_CORE_HPP
#define PREFERREC_CORE_HPP

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "errors.hpp"

namespace preferrec {

using UserId = std::int64_t;
using ItemId = std::int64_t;
using CategoryId = std::int32_t;

/// An ordered recommendation list; validity is relative to a candidate set.
using SolutionList = std::vector<ItemId>;

/// Fitness under the three maximized objectives.
struct ObjectiveVector {
    double acc = 0.0; ///< mean base relevance of the list
    double div = 0.0; ///< category coverage of the list
    double nov = 0.0; ///< inverse-popularity novelty of the list

    [[nodiscard]] std::array<double, 3> as_array() const { return {acc, div, nov}; }

    [[nodiscard]] double operator[](std::size_t i) const {
        return i == 0 ? acc : (i == 1 ? div : nov);
    }

    friend bool operator==(const ObjectiveVector& a, const ObjectiveVector& b) {
        return a.acc == b.acc && a.div == b.div && a.nov == b.nov;
    }
};

/**
 * @brief Pareto dominance for maximization.
 *
 * a dominates b iff a is no worse on every objective and strictly better on
 * at least one. Irreflexive and asymmetric; equal vectors never dominate.
 */
[[nodiscard]] inline bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
    bool strictly_better = false;
    for (std::size_t i = 0; i < 3; ++i) {
        if (a[i] < b[i]) return false;
        if (a[i] > b[i]) strictly_better = true;
    }
    return strictly_better;
}

/// Static per-item facts shared by all users.
struct ItemMeta {
    ItemId item = -1;
    std::vector<CategoryId> categories; ///< sorted, deduplicated, non-empty
    std::int64_t pop_count = 1;         ///< training-set interaction count, >= 1
    std::vector<double> feature;        ///< scorer input x_i; empty until assembled
};

/**
 * @brief Immutable catalog of item metadata plus dataset-level aggregates.
 *
 * Construction validates every entry, indexes the distinct category universe,
 * and records the maximum popularity count (used by normalized novelty).
 */
class ItemCatalog {
public:
    ItemCatalog() = default;

    explicit ItemCatalog(std::vector<ItemMeta> items) {
        for (ItemMeta& m : items) {
            if (m.item < 0)
                throw data_error("catalog item id must be non-negative, got " +
                                 std::to_string(m.item));
            std::sort(m.categories.begin(), m.categories.end());
            m.categories.erase(std::unique(m.categories.begin(), m.categories.end()),
                               m.categories.end());
            if (m.categories.empty())
                throw data_error("item " + std::to_string(m.item) +
                                 " has an empty category set");
            if (m.pop_count < 1)
                throw data_error("item " + std::to_string(m.item) +
                                 " has non-positive popularity count");
            max_pop_ = std::max(max_pop_, m.pop_count);
            for (CategoryId c : m.categories) category_index_.emplace(c, 0);
            ItemId id = m.item;
            if (!index_.emplace(id, metas_.size()).second)
                throw data_error("duplicate catalog entry for item " + std::to_string(id));
            metas_.push_back(std::move(m));
        }
        // Dense category indices in ascending category-id order.
        std::vector<CategoryId> cats;
        cats.reserve(category_index_.size());
        for (const auto& [c, unused] : category_index_) cats.push_back(c);
        std::sort(cats.begin(), cats.end());
        for (std::size_t i = 0; i < cats.size(); ++i) category_index_[cats[i]] = static_cast<int>(i);
        category_ids_ = std::move(cats);
    }

    [[nodiscard]] std::size_t size() const { return metas_.size(); }
    [[nodiscard]] std::size_t total_categories() const { return category_ids_.size(); }
    [[nodiscard]] std::int64_t max_pop() const { return max_pop_; }
    [[nodiscard]] const std::vector<CategoryId>& category_ids() const { return category_ids_; }

    [[nodiscard]] bool contains(ItemId item) const { return index_.count(item) != 0; }

    [[nodiscard]] const ItemMeta& meta(ItemId item) const {
        auto it = index_.find(item);
        if (it == index_.end())
            throw data_error("item " + std::to_string(item) + " is not in the catalog");
        return metas_[it->second];
    }

    /// Dense index of a category id within the catalog's category universe.
    [[nodiscard]] int category_index(CategoryId c) const {
        auto it = category_index_.find(c);
        if (it == category_index_.end())
            throw data_error("category " + std::to_string(c) + " is not in the catalog");
        return it->second;
    }

    /// Items in ascending id order (for deterministic sweeps and sampling pools).
    [[nodiscard]] std::vector<ItemId> sorted_items() const {
        std::vector<ItemId> ids;
        ids.reserve(metas_.size());
        for (const ItemMeta& m : metas_) ids.push_back(m.item);
        std::sort(ids.begin(), ids.end());
        return ids;
    }

    /// Scorer input width d_x; zero until features are assembled.
    [[nodiscard]] std::size_t feature_dim() const { return feature_dim_; }

    /// Installs the assembled feature vector of one item. All items must end
    /// up with the same dimension.
    void set_feature(ItemId item, std::vector<double> x) {
        auto it = index_.find(item);
        if (it == index_.end())
            throw data_error("item " + std::to_string(item) + " is not in the catalog");
        if (feature_dim_ == 0) feature_dim_ = x.size();
        if (x.size() != feature_dim_)
            throw data_error("feature dimension mismatch for item " + std::to_string(item));
        metas_[it->second].feature = std::move(x);
    }

    /// Assembled feature of one item; throws if features were never assembled.
    [[nodiscard]] const std::vector<double>& feature(ItemId item) const {
        const ItemMeta& m = meta(item);
        if (m.feature.empty())
            throw data_error("features not assembled for item " + std::to_string(item));
        return m.feature;
    }

private:
    std::vector<ItemMeta> metas_;
    std::unordered_map<ItemId, std::size_t> index_;
    std::unordered_map<CategoryId, int> category_index_;
    std::vector<CategoryId> category_ids_;
    std::int64_t max_pop_ = 1;
    std::size_t feature_dim_ = 0;
};

/**
 * @brief One user's scored candidate pool.
 *
 * Holds the N candidate items in their (randomized, but fixed) order, a base
 * relevance score per item, and optionally the held-out positive item.
 */
class CandidateSet {
public:
    CandidateSet() = default;

    CandidateSet(UserId user, std::vector<ItemId> items, std::vector<double> scores,
                 ItemId positive = -1)
        : user_(user), items_(std::move(items)), scores_(std::move(scores)),
          positive_(positive) {
        if (items_.empty()) throw data_error("empty candidate set for user " +
                                             std::to_string(user));
        if (items_.size() != scores_.size())
            throw data_error("candidate/score length mismatch for user " +
                             std::to_string(user));
        for (std::size_t i = 0; i < items_.size(); ++i) {
            if (!pos_.emplace(items_[i], i).second)
                throw data_error("duplicate candidate item " + std::to_string(items_[i]) +
                                 " for user " + std::to_string(user));
        }
        if (positive_ >= 0 && pos_.count(positive_) == 0)
            throw data_error("positive item " + std::to_string(positive_) +
                             " missing from candidates of user " + std::to_string(user));
    }

    [[nodiscard]] UserId user() const { return user_; }
    [[nodiscard]] std::size_t size() const { return items_.size(); }
    [[nodiscard]] ItemId item_at(std::size_t i) const { return items_[i]; }
    [[nodiscard]] double score_at(std::size_t i) const { return scores_[i]; }
    [[nodiscard]] ItemId positive() const { return positive_; }
    [[nodiscard]] const std::vector<ItemId>& items() const { return items_; }

    [[nodiscard]] bool contains(ItemId item) const { return pos_.count(item) != 0; }

    [[nodiscard]] std::size_t index_of(ItemId item) const {
        auto it = pos_.find(item);
        if (it == pos_.end())
            throw invalid_solution_error("item " + std::to_string(item) +
                                         " is not a candidate of user " +
                                         std::to_string(user_));
        return it->second;
    }

    [[nodiscard]] double score(ItemId item) const { return scores_[index_of(item)]; }

    /// Overwrites the base score of one candidate (used when scores arrive
    /// in a second pass after candidate construction).
    void set_score(ItemId item, double s) { scores_[index_of(item)] = s; }

private:
    UserId user_ = -1;
    std::vector<ItemId> items_;
    std::vector<double> scores_;
    std::unordered_map<ItemId, std::size_t> pos_;
    ItemId positive_ = -1;
};

/// True iff the list has exactly k distinct items, all candidates of the user.
[[nodiscard]] inline bool is_valid_solution(const SolutionList& list,
                                            const CandidateSet& cand, std::size_t k) {
    if (list.size() != k) return false;
    for (std::size_t i = 0; i < list.size(); ++i) {
        if (!cand.contains(list[i])) return false;
        for (std::size_t j = i + 1; j < list.size(); ++j)
            if (list[i] == list[j]) return false;
    }
    return true;
}

/// Throws invalid_solution_error (naming the first offending item) if invalid.
inline void require_valid_solution(const SolutionList& list, const CandidateSet& cand,
                                   std::size_t k) {
    if (list.size() != k)
        throw invalid_solution_error("list for user " + std::to_string(cand.user()) +
                                     " has length " + std::to_string(list.size()) +
                                     ", expected " + std::to_string(k));
    for (std::size_t i = 0; i < list.size(); ++i) {
        if (!cand.contains(list[i]))
            throw invalid_solution_error("item " + std::to_string(list[i]) +
                                         " is not a candidate of user " +
                                         std::to_string(cand.user()));
        for (std::size_t j = i + 1; j < list.size(); ++j)
            if (list[i] == list[j])
                throw invalid_solution_error("duplicate item " + std::to_string(list[i]) +
                                             " in list for user " +
                                             std::to_string(cand.user()));
    }
}

} // namespace preferrec

#endif // PREFERREC_CORE_HPP
