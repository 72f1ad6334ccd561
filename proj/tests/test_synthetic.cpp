#include <gtest/gtest.h>

#include <preferrec/data.hpp>
#include <preferrec/synthetic.hpp>

#include <cstdio>
#include <filesystem>
#include <map>
#include <set>
#include <vector>

using namespace preferrec;

namespace {

SyntheticSpec small_spec() {
    SyntheticSpec spec;
    spec.users = 40;
    spec.items = 160;
    spec.categories = 6;
    spec.seed = 3;
    return spec;
}

} // namespace

TEST(Synthetic, SpecValidation) {
    SyntheticSpec spec = small_spec();
    EXPECT_NO_THROW(spec.validate());
    spec.items = 100; // fewer than the floor
    EXPECT_THROW(spec.validate(), config_error);
    spec = small_spec();
    spec.categories = 1;
    EXPECT_THROW(spec.validate(), config_error);
    spec = small_spec();
    spec.min_interactions = 2;
    EXPECT_THROW(spec.validate(), config_error);
    spec = small_spec();
    spec.max_interactions = 100; // 100 + 100 > 160
    EXPECT_THROW(spec.validate(), config_error);
}

TEST(Synthetic, Deterministic) {
    const auto a = generate_synthetic(small_spec());
    const auto b = generate_synthetic(small_spec());
    ASSERT_EQ(a.interactions.size(), b.interactions.size());
    for (std::size_t i = 0; i < a.interactions.size(); ++i) {
        EXPECT_EQ(a.interactions[i].user, b.interactions[i].user);
        EXPECT_EQ(a.interactions[i].item, b.interactions[i].item);
        EXPECT_EQ(a.interactions[i].timestamp, b.interactions[i].timestamp);
    }
    EXPECT_EQ(a.scores, b.scores);
}

TEST(Synthetic, EveryItemAppearsInSomeHistory) {
    const auto spec = small_spec();
    const auto data = generate_synthetic(spec);
    std::set<ItemId> seen;
    for (const auto& it : data.interactions) seen.insert(it.item);
    EXPECT_EQ(seen.size(), spec.items);
}

TEST(Synthetic, EveryCategoryIsPopulated) {
    const auto spec = small_spec();
    const auto data = generate_synthetic(spec);
    std::set<CategoryId> cats;
    for (const auto& cs : data.item_categories)
        for (CategoryId c : cs) cats.insert(c);
    EXPECT_EQ(cats.size(), spec.categories);
}

TEST(Synthetic, PerUserInteractionCountsRespectBounds) {
    const auto spec = small_spec();
    const auto data = generate_synthetic(spec);
    std::map<UserId, std::size_t> organic;
    for (const auto& it : data.interactions)
        if (it.timestamp >= 0) ++organic[it.user];
    ASSERT_EQ(organic.size(), spec.users);
    for (const auto& [user, n] : organic) {
        EXPECT_GE(n, spec.min_interactions);
        EXPECT_LE(n, spec.max_interactions);
    }
}

TEST(Synthetic, NoDuplicateUserItemPairs) {
    const auto data = generate_synthetic(small_spec());
    std::set<std::pair<UserId, ItemId>> pairs;
    for (const auto& it : data.interactions) {
        const auto inserted = pairs.emplace(it.user, it.item).second;
        ASSERT_TRUE(inserted);
    }
}

TEST(Synthetic, PopularItemsDominateInteractions) {
    // Item ids are popularity-ranked; the top decile should absorb a clearly
    // outsized share of organic interactions.
    SyntheticSpec spec;
    spec.users = 200;
    spec.items = 500;
    spec.categories = 20;
    spec.seed = 7;
    const auto data = generate_synthetic(spec);
    std::size_t organic = 0, top_decile = 0;
    for (const auto& it : data.interactions) {
        if (it.timestamp < 0) continue;
        ++organic;
        if (it.item < static_cast<ItemId>(spec.items / 10)) ++top_decile;
    }
    EXPECT_GE(static_cast<double>(top_decile) / static_cast<double>(organic), 0.40);
}

TEST(Synthetic, ScoresCoverAllPairsWithinUnitRange) {
    const auto spec = small_spec();
    const auto data = generate_synthetic(spec);
    ASSERT_EQ(data.scores.size(), spec.users * spec.items);
    for (double s : data.scores) {
        ASSERT_GE(s, 0.0);
        ASSERT_LT(s, 1.0);
    }
    EXPECT_DOUBLE_EQ(data.score(3, 14), data.scores[3 * spec.items + 14]);
}

TEST(Synthetic, WrittenFilesRoundTripThroughLoaders) {
    const auto spec = small_spec();
    const auto data = generate_synthetic(spec);
    const auto dir = std::filesystem::temp_directory_path();
    const std::string ipath = (dir / "preferrec_synth_inter.tsv").string();
    const std::string spath = (dir / "preferrec_synth_scores.tsv").string();
    write_interactions_tsv(ipath, data);
    write_scores_tsv(spath, data);

    const auto rows = load_interactions(ipath);
    EXPECT_EQ(rows.size(), data.interactions.size());
    const SplitResult split = leave_one_out(rows, 3);
    EXPECT_FALSE(split.test.empty());

    const ItemCatalog catalog = build_catalog(rows, split);
    EXPECT_EQ(catalog.size(), spec.items);

    CandidateOptions options;
    options.negatives = 99;
    options.seed = spec.seed;
    auto candidates =
        build_candidates(split, rows, catalog.sorted_items(), SplitRole::test, options);
    load_scores(spath, candidates);
    for (const auto& [user, cand] : candidates)
        for (std::size_t j = 0; j < cand.size(); ++j)
            ASSERT_DOUBLE_EQ(cand.score_at(j), data.score(user, cand.item_at(j)));

    std::remove(ipath.c_str());
    std::remove(spath.c_str());
}
