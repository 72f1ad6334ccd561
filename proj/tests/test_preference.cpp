#include <gtest/gtest.h>

#include <preferrec/preference.hpp>

#include <cmath>
#include <map>
#include <vector>

using namespace preferrec;

namespace {

Population make_population(const std::vector<double>& accuracies,
                           const std::vector<SolutionList>& lists) {
    Population pop;
    pop.user = 42;
    pop.capacity = accuracies.size();
    for (std::size_t i = 0; i < accuracies.size(); ++i) {
        Individual ind;
        ind.objectives = {accuracies[i], 0.0, 0.0};
        ind.list = lists.empty() ? SolutionList{static_cast<ItemId>(i)} : lists[i];
        pop.members.push_back(std::move(ind));
    }
    return pop;
}

ItemCatalog features_catalog(std::size_t n_items, std::size_t feat_dim) {
    std::vector<ItemMeta> metas;
    for (std::size_t i = 0; i < n_items; ++i)
        metas.push_back({static_cast<ItemId>(i), {static_cast<CategoryId>(i % 3)}, 1, {}});
    ItemCatalog catalog(std::move(metas));
    for (std::size_t i = 0; i < n_items; ++i) {
        std::vector<double> x(feat_dim, 0.0);
        x[i % feat_dim] = 1.0 + static_cast<double>(i);
        catalog.set_feature(static_cast<ItemId>(i), std::move(x));
    }
    return catalog;
}

} // namespace

TEST(Preference, PartitionSizesDifferByAtMostOne) {
    const auto pop = make_population({9, 8, 7, 6, 5, 4, 3}, {});
    const auto clusters = partition_population(pop, 2);
    ASSERT_EQ(clusters.size(), 2u);
    EXPECT_EQ(clusters[0].size(), 4u); // remainder goes to the earliest cluster
    EXPECT_EQ(clusters[1].size(), 3u);
}

TEST(Preference, PartitionOrdersByAccuracyDescending) {
    // Accuracies out of order; cluster 0 must hold the highest-accuracy members.
    const auto pop = make_population({0.1, 0.9, 0.5, 0.7}, {});
    const auto clusters = partition_population(pop, 2);
    // Sorted by acc desc: indices 1 (0.9), 3 (0.7), 2 (0.5), 0 (0.1).
    EXPECT_EQ(clusters[0], (std::vector<std::size_t>{1, 3}));
    EXPECT_EQ(clusters[1], (std::vector<std::size_t>{2, 0}));
}

TEST(Preference, PartitionTiesKeepLowerIndexFirst) {
    const auto pop = make_population({0.5, 0.5, 0.5}, {});
    const auto clusters = partition_population(pop, 3);
    EXPECT_EQ(clusters[0], (std::vector<std::size_t>{0}));
    EXPECT_EQ(clusters[1], (std::vector<std::size_t>{1}));
    EXPECT_EQ(clusters[2], (std::vector<std::size_t>{2}));
}

TEST(Preference, PartitionRejectsTooManyClusters) {
    const auto pop = make_population({1, 2}, {});
    EXPECT_THROW((void)partition_population(pop, 3), config_error);
    EXPECT_THROW((void)partition_population(pop, 0), config_error);
}

TEST(Preference, ItemFrequenciesCountOccurrences) {
    const auto pop = make_population({3, 2, 1}, {{1, 2}, {2, 3}, {9, 8}});
    const auto freq = item_frequencies(pop, {0, 1});
    EXPECT_EQ(freq.at(1), 1);
    EXPECT_EQ(freq.at(2), 2);
    EXPECT_EQ(freq.at(3), 1);
    EXPECT_EQ(freq.count(9), 0u);
}

TEST(Preference, SoftLabelsMatchFrozenSoftmax) {
    // exp(2)/(exp(2)+exp(1)) computed independently: 0.7310585786300049.
    const auto labels = soft_labels({{10, 2}, {20, 1}});
    EXPECT_NEAR(labels.at(10), 0.7310585786300049, 1e-12);
    EXPECT_NEAR(labels.at(20), 0.2689414213699951, 1e-12);
}

TEST(Preference, SoftLabelsStableForHugeCounts) {
    // Max subtraction keeps exp() in range; ratios depend only on differences.
    const auto labels = soft_labels({{1, 1000}, {2, 999}});
    EXPECT_NEAR(labels.at(1), 0.7310585786300049, 1e-12);
    EXPECT_NEAR(labels.at(2), 0.2689414213699951, 1e-12);
    EXPECT_TRUE(std::isfinite(labels.at(1)));
}

TEST(Preference, SoftLabelsSumToOne) {
    Rng rng(6);
    for (int t = 0; t < 50; ++t) {
        std::map<ItemId, int> freq;
        const std::size_t n = 1 + rng.uniform_index(30);
        for (std::size_t i = 0; i < n; ++i)
            freq[static_cast<ItemId>(i)] = static_cast<int>(1 + rng.uniform_index(20));
        const auto labels = soft_labels(freq);
        double sum = 0.0;
        for (const auto& [item, l] : labels) sum += l;
        EXPECT_NEAR(sum, 1.0, 1e-12);
    }
}

TEST(Preference, BuildExamplesLayoutAndLabels) {
    const auto catalog = features_catalog(10, 4);
    const auto pop = make_population({4, 3, 2, 1},
                                     {{5, 1}, {1, 2}, {7, 3}, {3, 9}});
    const std::size_t n_clusters = 2;
    const auto examples = build_examples(pop, catalog, n_clusters);

    // Cluster-major, item-id-minor: lambda 0 covers members {0,1} -> items
    // {1,2,5}; lambda 1 covers members {2,3} -> items {3,7,9}.
    ASSERT_EQ(examples.size(), 6u);
    EXPECT_EQ(examples[0].lambda, 0);
    EXPECT_EQ(examples[0].item, 1);
    EXPECT_EQ(examples[1].item, 2);
    EXPECT_EQ(examples[2].item, 5);
    EXPECT_EQ(examples[3].lambda, 1);
    EXPECT_EQ(examples[3].item, 3);
    EXPECT_EQ(examples[4].item, 7);
    EXPECT_EQ(examples[5].item, 9);

    // Features are the item features followed by a one-hot cluster encoding.
    const auto& x = examples[0].features;
    ASSERT_EQ(x.size(), 4u + n_clusters);
    const auto& item_x = catalog.feature(1);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(x[i], item_x[i]);
    EXPECT_DOUBLE_EQ(x[4], 1.0);
    EXPECT_DOUBLE_EQ(x[5], 0.0);
    EXPECT_DOUBLE_EQ(examples[3].features[4], 0.0);
    EXPECT_DOUBLE_EQ(examples[3].features[5], 1.0);

    // Every example carries the population's user and labels sum to 1 per lambda.
    std::map<int, double> sums;
    for (const auto& ex : examples) {
        EXPECT_EQ(ex.user, 42);
        sums[ex.lambda] += ex.label;
    }
    EXPECT_NEAR(sums[0], 1.0, 1e-12);
    EXPECT_NEAR(sums[1], 1.0, 1e-12);
}

TEST(Preference, LabelSumsOverRandomPopulations) {
    Rng rng(17);
    const auto catalog = features_catalog(30, 5);
    for (int t = 0; t < 25; ++t) {
        const std::size_t n = 10 + rng.uniform_index(20);
        std::vector<double> accs(n);
        std::vector<SolutionList> lists(n);
        for (std::size_t i = 0; i < n; ++i) {
            accs[i] = rng.uniform_real();
            std::vector<ItemId> all(30);
            for (std::size_t j = 0; j < 30; ++j) all[j] = static_cast<ItemId>(j);
            rng.shuffle(all);
            lists[i] = SolutionList(all.begin(), all.begin() + 6);
        }
        const auto pop = make_population(accs, lists);
        const std::size_t n_clusters = 1 + rng.uniform_index(5);
        const auto examples = build_examples(pop, catalog, n_clusters);
        std::map<int, double> sums;
        for (const auto& ex : examples) sums[ex.lambda] += ex.label;
        ASSERT_EQ(sums.size(), n_clusters);
        for (const auto& [lambda, sum] : sums) ASSERT_NEAR(sum, 1.0, 1e-12);
    }
}
