/**
 * @file selection.hpp
 * @brief Angle-based final list selection against anchor fitness vectors.
 *
 * For each preference condition lambda, the front member whose objective
 * vector forms the smallest angle with the anchor's fitness vector is
 * selected. One of the per-lambda picks is promoted to the user's default
 * list: the lambda whose anchor fitness maximizes the balanced F-measure of
 * (acc, div, nov), unless the configuration pins a lambda explicitly.
 */

#ifndef PREFERREC_SELECTION_HPP
#define PREFERREC_SELECTION_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "core.hpp"
#include "errors.hpp"
#include "evolution.hpp"
#include "transfer.hpp"

namespace preferrec {

/// Indices of the non-dominated members (rank-0 front), ascending.
[[nodiscard]] inline std::vector<std::size_t>
pareto_front_indices(const std::vector<Individual>& members) {
    if (members.empty()) throw config_error("empty population has no front");
    std::vector<Individual> copy = members;
    auto fronts = fast_nondominated_sort(copy);
    return fronts.front();
}

/**
 * @brief Angle in radians between an objective vector and an anchor vector.
 *
 * The cosine is clamped to [-1, 1] before arccos. A zero-norm candidate
 * vector is defined to be maximally distant (pi); a zero-norm anchor is a
 * configuration error.
 */
[[nodiscard]] inline double angle_between(const ObjectiveVector& v, const ObjectiveVector& anchor) {
    const double nv = std::sqrt(v.acc * v.acc + v.div * v.div + v.nov * v.nov);
    const double na = std::sqrt(anchor.acc * anchor.acc + anchor.div * anchor.div +
                                anchor.nov * anchor.nov);
    if (na == 0.0) throw config_error("anchor fitness vector has zero norm");
    if (nv == 0.0) return std::acos(-1.0);
    const double dot = v.acc * anchor.acc + v.div * anchor.div + v.nov * anchor.nov;
    const double cosine = std::clamp(dot / (nv * na), -1.0, 1.0);
    return std::acos(cosine);
}

/// Balanced F-measure of three non-negative components; beta weights the
/// diversity and novelty terms. Zero denominator yields zero.
[[nodiscard]] inline double f_beta(double hr, double div, double nov, double beta) {
    const double b2 = beta * beta;
    const double den = hr + b2 * div + b2 * nov;
    if (den == 0.0) return 0.0;
    return (1.0 + 2.0 * b2) * hr * div * nov / den;
}

struct SelectionPolicy {
    int pinned_lambda = -1; ///< fixed default condition; -1 selects by anchor F-measure
};

/// Per-lambda selected front positions plus the promoted default lambda.
struct SelectedLists {
    std::map<int, std::size_t> by_lambda; ///< lambda -> index into the front vector
    int default_lambda = -1;
};

/**
 * @brief Chooses one front member per anchor and the default lambda.
 *
 * Angle ties break toward higher accuracy, then the lower front index. The
 * default is the lambda whose anchor fitness maximizes f_beta(., 1), ties
 * toward the lower lambda.
 */
[[nodiscard]] inline SelectedLists select_final(const std::vector<Individual>& front,
                                                const AnchorSet& anchors,
                                                const SelectionPolicy& policy = {}) {
    if (front.empty()) throw config_error("cannot select from an empty front");
    if (anchors.anchors.empty()) throw config_error("cannot select without anchors");

    SelectedLists out;
    double best_quality = -1.0;
    for (const Anchor& a : anchors.anchors) {
        std::size_t best = 0;
        double best_angle = angle_between(front[0].objectives, a.fitness);
        for (std::size_t i = 1; i < front.size(); ++i) {
            const double ang = angle_between(front[i].objectives, a.fitness);
            if (ang < best_angle ||
                (ang == best_angle && front[i].objectives.acc > front[best].objectives.acc)) {
                best_angle = ang;
                best = i;
            }
        }
        out.by_lambda[a.lambda] = best;

        const double quality = f_beta(a.fitness.acc, a.fitness.div, a.fitness.nov, 1.0);
        if (quality > best_quality) {
            best_quality = quality;
            out.default_lambda = a.lambda;
        }
    }
    if (policy.pinned_lambda >= 0) {
        if (out.by_lambda.count(policy.pinned_lambda) == 0)
            throw config_error("pinned lambda " + std::to_string(policy.pinned_lambda) +
                               " has no anchor");
        out.default_lambda = policy.pinned_lambda;
    }
    return out;
}

} // namespace preferrec

#endif // PREFERREC_SELECTION_HPP
