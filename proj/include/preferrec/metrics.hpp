/**
 * @file metrics.hpp
 * @brief Offline evaluation: hit ratio, NDCG, list diversity/novelty at a
 *        cutoff, the combined F-measure, and exact 3D hypervolume.
 *
 * Ranking metrics average over users in ascending user-id order. The
 * F-measure combines aggregate-level HR/Div/Nov (not per-user values).
 */

#ifndef PREFERREC_METRICS_HPP
#define PREFERREC_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "core.hpp"
#include "errors.hpp"
#include "objectives.hpp"
#include "selection.hpp"

namespace preferrec {

namespace detail {

[[nodiscard]] inline SolutionList top_prefix(const SolutionList& list, std::size_t k) {
    if (list.empty()) throw data_error("empty recommendation list in evaluation");
    SolutionList prefix(list.begin(),
                        list.begin() + static_cast<std::ptrdiff_t>(std::min(k, list.size())));
    return prefix;
}

} // namespace detail

/// Fraction of users whose held-out positive appears in the top k.
[[nodiscard]] inline double hr_at_k(const std::map<UserId, SolutionList>& lists,
                                    const std::map<UserId, ItemId>& positives, std::size_t k) {
    if (lists.empty()) throw data_error("hr_at_k over an empty user set");
    double hits = 0.0;
    for (const auto& [user, list] : lists) {
        auto it = positives.find(user);
        if (it == positives.end())
            throw data_error("no positive item recorded for user " + std::to_string(user));
        const auto prefix = detail::top_prefix(list, k);
        if (std::find(prefix.begin(), prefix.end(), it->second) != prefix.end()) hits += 1.0;
    }
    return hits / static_cast<double>(lists.size());
}

/// Mean of 1 / log2(rank + 1) over users, zero when the positive is absent
/// from the top k (single relevant item per user; ranks are 1-based).
[[nodiscard]] inline double ndcg_at_k(const std::map<UserId, SolutionList>& lists,
                                      const std::map<UserId, ItemId>& positives, std::size_t k) {
    if (lists.empty()) throw data_error("ndcg_at_k over an empty user set");
    double sum = 0.0;
    for (const auto& [user, list] : lists) {
        auto it = positives.find(user);
        if (it == positives.end())
            throw data_error("no positive item recorded for user " + std::to_string(user));
        const auto prefix = detail::top_prefix(list, k);
        for (std::size_t r = 0; r < prefix.size(); ++r) {
            if (prefix[r] == it->second) {
                sum += 1.0 / std::log2(static_cast<double>(r + 1) + 1.0);
                break;
            }
        }
    }
    return sum / static_cast<double>(lists.size());
}

/// Mean per-user category coverage of the top-k prefixes.
[[nodiscard]] inline double mean_div_at_k(const std::map<UserId, SolutionList>& lists,
                                          const ItemCatalog& catalog, std::size_t k) {
    if (lists.empty()) throw data_error("mean_div_at_k over an empty user set");
    double sum = 0.0;
    for (const auto& [user, list] : lists)
        sum += eval_diversity(detail::top_prefix(list, k), catalog);
    return sum / static_cast<double>(lists.size());
}

/// Mean per-user novelty of the top-k prefixes under the selected mode.
[[nodiscard]] inline double mean_nov_at_k(const std::map<UserId, SolutionList>& lists,
                                          const ItemCatalog& catalog, std::size_t k,
                                          NoveltyMode mode) {
    if (lists.empty()) throw data_error("mean_nov_at_k over an empty user set");
    double sum = 0.0;
    for (const auto& [user, list] : lists)
        sum += eval_novelty(detail::top_prefix(list, k), catalog, mode);
    return sum / static_cast<double>(lists.size());
}

/**
 * @brief Exact hypervolume dominated by a 3D point set (maximization).
 *
 * Measures the volume of the union of boxes [ref, p] over all points. Every
 * point must be componentwise >= ref. Computed by a sweep over descending
 * third coordinates, accumulating staircase areas of the active points; the
 * result is exact, and duplicate or dominated points contribute nothing new.
 */
[[nodiscard]] inline double hypervolume_3d(const std::vector<ObjectiveVector>& points,
                                           const ObjectiveVector& ref = {0.0, 0.0, 0.0}) {
    if (points.empty()) return 0.0;
    struct P3 { double x, y, z; };
    std::vector<P3> pts;
    pts.reserve(points.size());
    for (const auto& p : points) {
        if (p.acc < ref.acc || p.div < ref.div || p.nov < ref.nov)
            throw config_error("hypervolume point lies below the reference point");
        pts.push_back({p.acc - ref.acc, p.div - ref.div, p.nov - ref.nov});
    }
    std::sort(pts.begin(), pts.end(), [](const P3& a, const P3& b) { return a.z > b.z; });

    double volume = 0.0;
    std::size_t i = 0;
    std::vector<P3> active;
    while (i < pts.size()) {
        const double z_top = pts[i].z;
        while (i < pts.size() && pts[i].z == z_top) active.push_back(pts[i++]);
        const double z_next = (i < pts.size()) ? pts[i].z : 0.0;
        if (z_top == z_next) continue;
        // Staircase area of union of [0,x] x [0,y] over the active points.
        std::sort(active.begin(), active.end(), [](const P3& a, const P3& b) {
            if (a.x != b.x) return a.x > b.x;
            return a.y > b.y;
        });
        double area = 0.0;
        double best_y = 0.0;
        for (const P3& p : active) {
            if (p.y > best_y) {
                area += p.x * (p.y - best_y);
                best_y = p.y;
            }
        }
        volume += area * (z_top - z_next);
    }
    return volume;
}

} // namespace preferrec

#endif // PREFERREC_METRICS_HPP
