#include <gtest/gtest.h>

#include <preferrec/objectives.hpp>

#include <vector>

using namespace preferrec;

namespace {

ItemCatalog tiny_catalog() {
    std::vector<ItemMeta> metas;
    metas.push_back({0, {0}, 1, {}});
    metas.push_back({1, {0, 1}, 2, {}});
    metas.push_back({2, {2}, 4, {}});
    metas.push_back({3, {1}, 2, {}});
    return ItemCatalog(std::move(metas));
}

CandidateSet tiny_candidates() {
    return CandidateSet(7, {0, 1, 2, 3}, {0.5, 0.25, 1.0, 0.75}, 2);
}

} // namespace

TEST(Objectives, AccuracyIsMeanBaseScore) {
    const auto cand = tiny_candidates();
    EXPECT_DOUBLE_EQ(eval_accuracy({0, 1}, cand), (0.5 + 0.25) / 2.0);
    EXPECT_DOUBLE_EQ(eval_accuracy({2}, cand), 1.0);
    EXPECT_DOUBLE_EQ(eval_accuracy({0, 1, 2, 3}, cand), (0.5 + 0.25 + 1.0 + 0.75) / 4.0);
}

TEST(Objectives, DiversityCountsDistinctCategories) {
    const auto catalog = tiny_catalog(); // categories {0,1,2} -> total 3
    EXPECT_DOUBLE_EQ(eval_diversity({0}, catalog), 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(eval_diversity({0, 1}, catalog), 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(eval_diversity({0, 1, 2}, catalog), 1.0);
    EXPECT_DOUBLE_EQ(eval_diversity({0, 3}, catalog), 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(eval_diversity({1, 3}, catalog), 2.0 / 3.0); // overlapping sets
}

TEST(Objectives, NoveltyLiteralIsMeanReciprocalPopularity) {
    const auto catalog = tiny_catalog(); // pops 1, 2, 4, 2
    EXPECT_DOUBLE_EQ(eval_novelty({0, 1, 2}, catalog, NoveltyMode::literal),
                     (1.0 / 1 + 1.0 / 2 + 1.0 / 4) / 3.0);
}

TEST(Objectives, NoveltyNormalizedUsesMaxPopularity) {
    const auto catalog = tiny_catalog(); // max pop = 4
    EXPECT_DOUBLE_EQ(eval_novelty({0, 1, 2}, catalog, NoveltyMode::normalized),
                     ((1 - 1.0 / 4) + (1 - 2.0 / 4) + (1 - 4.0 / 4)) / 3.0);
}

TEST(Objectives, EvaluateBundlesAllThree) {
    const auto catalog = tiny_catalog();
    const auto cand = tiny_candidates();
    EvalContext ctx{&cand, &catalog, NoveltyMode::normalized};
    const ObjectiveVector o = evaluate({0, 1}, ctx);
    EXPECT_DOUBLE_EQ(o.acc, eval_accuracy({0, 1}, cand));
    EXPECT_DOUBLE_EQ(o.div, eval_diversity({0, 1}, catalog));
    EXPECT_DOUBLE_EQ(o.nov, eval_novelty({0, 1}, catalog, NoveltyMode::normalized));
}

TEST(Objectives, DominatesIsStrictSomewhereWeakEverywhere) {
    const ObjectiveVector a{1.0, 1.0, 1.0};
    const ObjectiveVector b{1.0, 1.0, 0.5};
    const ObjectiveVector c{0.5, 1.0, 1.0};
    EXPECT_TRUE(dominates(a, b));
    EXPECT_FALSE(dominates(b, a));
    EXPECT_FALSE(dominates(a, a)); // equality never dominates
    EXPECT_FALSE(dominates(b, c)); // incomparable
    EXPECT_FALSE(dominates(c, b));
}

TEST(Objectives, NoveltyModeParsing) {
    EXPECT_EQ(parse_novelty_mode("literal"), NoveltyMode::literal);
    EXPECT_EQ(parse_novelty_mode("normalized"), NoveltyMode::normalized);
    EXPECT_THROW((void)parse_novelty_mode("other"), config_error);
}

TEST(Objectives, EmptyListRejected) {
    const auto catalog = tiny_catalog();
    const auto cand = tiny_candidates();
    EXPECT_THROW((void)eval_accuracy({}, cand), invalid_solution_error);
    EXPECT_THROW((void)eval_diversity({}, catalog), invalid_solution_error);
    EXPECT_THROW((void)eval_novelty({}, catalog, NoveltyMode::literal), invalid_solution_error);
}
