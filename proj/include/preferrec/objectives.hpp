/**
 * @file objectives.hpp
 * @brief The three list-level objectives and their joint evaluation.
 *
 * All objectives are maximized:
 *  - accuracy: mean base relevance score of the listed items;
 *  - diversity: fraction of the catalog's category universe covered by the
 *    union of the listed items' categories;
 *  - novelty: mean per-item novelty, either literal inverse popularity
 *    (1 / pop_count) or normalized complement (1 - pop_count / max_pop).
 *
 * Literal novelty is the published formulation; normalized novelty keeps all
 * three objectives on a [0, 1] scale and is the default for experiments. The
 * mode is a configuration switch and is honored consistently by evolution,
 * transfer, and evaluation.
 */

#ifndef PREFERREC_OBJECTIVES_HPP
#define PREFERREC_OBJECTIVES_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "core.hpp"
#include "errors.hpp"

namespace preferrec {

enum class NoveltyMode {
    literal,    ///< mean of 1 / pop_count
    normalized, ///< mean of 1 - pop_count / max_pop
};

[[nodiscard]] inline NoveltyMode parse_novelty_mode(const std::string& s) {
    if (s == "literal") return NoveltyMode::literal;
    if (s == "normalized") return NoveltyMode::normalized;
    throw config_error("unknown novelty mode '" + s + "' (expected literal|normalized)");
}

/// Mean base relevance of the listed items. Empty list is a contract violation.
[[nodiscard]] inline double eval_accuracy(const SolutionList& list, const CandidateSet& cand) {
    if (list.empty()) throw invalid_solution_error("cannot score an empty list");
    double sum = 0.0;
    for (ItemId item : list) sum += cand.score(item);
    return sum / static_cast<double>(list.size());
}

/// Fraction of all catalog categories covered by the list's category union.
[[nodiscard]] inline double eval_diversity(const SolutionList& list, const ItemCatalog& catalog) {
    if (list.empty()) throw invalid_solution_error("cannot score an empty list");
    const std::size_t n_cats = catalog.total_categories();
    // Epoch-stamped scratch avoids clearing a buffer on every call.
    thread_local std::vector<std::uint64_t> stamp;
    thread_local std::uint64_t epoch = 0;
    if (stamp.size() < n_cats) stamp.assign(n_cats, 0);
    ++epoch;
    std::size_t covered = 0;
    for (ItemId item : list) {
        for (CategoryId c : catalog.meta(item).categories) {
            const std::size_t idx = static_cast<std::size_t>(catalog.category_index(c));
            if (stamp[idx] != epoch) {
                stamp[idx] = epoch;
                ++covered;
            }
        }
    }
    return static_cast<double>(covered) / static_cast<double>(n_cats);
}

/// Mean per-item novelty under the selected mode.
[[nodiscard]] inline double eval_novelty(const SolutionList& list, const ItemCatalog& catalog,
                                         NoveltyMode mode) {
    if (list.empty()) throw invalid_solution_error("cannot score an empty list");
    const double max_pop = static_cast<double>(catalog.max_pop());
    double sum = 0.0;
    for (ItemId item : list) {
        const double pop = static_cast<double>(catalog.meta(item).pop_count);
        sum += (mode == NoveltyMode::literal) ? 1.0 / pop : 1.0 - pop / max_pop;
    }
    return sum / static_cast<double>(list.size());
}

/// Everything one objective evaluation needs; a cheap copyable view.
struct EvalContext {
    const CandidateSet* cand = nullptr;
    const ItemCatalog* catalog = nullptr;
    NoveltyMode novelty = NoveltyMode::normalized;
};

[[nodiscard]] inline ObjectiveVector evaluate(const SolutionList& list, const EvalContext& ctx) {
    ObjectiveVector f;
    f.acc = eval_accuracy(list, *ctx.cand);
    f.div = eval_diversity(list, *ctx.catalog);
    f.nov = eval_novelty(list, *ctx.catalog, ctx.novelty);
    return f;
}

} // namespace preferrec

#endif // PREFERREC_OBJECTIVES_HPP
