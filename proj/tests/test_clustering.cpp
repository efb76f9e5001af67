#include <gtest/gtest.h>

#include <random>

#include "fakestream/kmeans.hpp"
#include "fakestream/model_bank.hpp"

using namespace fakestream;

namespace {

using Vec = std::vector<double>;

OnlineKMeans seeded(std::initializer_list<Vec> centers) {
    OnlineKMeans km(centers.size());
    for (const auto& c : centers) km.update(c, km.assign(c));
    return km;
}

}  // namespace

TEST(KMeans, NearestCentroid) {
    const auto km = seeded({{0, 0}, {10, 10}});
    EXPECT_EQ(km.assign(Vec{1, 1}), 0u);
    EXPECT_EQ(km.assign(Vec{9, 8}), 1u);
}

TEST(KMeans, TieGoesToLowerId) {
    const auto km = seeded({{0, 0}, {2, 0}});
    EXPECT_EQ(km.assign(Vec{1, 0}), 0u);
}

TEST(KMeans, SeedsFromFirstDistinctInputs) {
    OnlineKMeans km(3);
    const Vec a{1, 1};
    km.update(a, km.assign(a));
    EXPECT_EQ(km.assign(a), 0u);  // duplicate does not seed
    km.update(a, km.assign(a));
    EXPECT_EQ(km.initialized(), 1u);
    EXPECT_EQ(km.count(0), 2u);
    const Vec b{5, 5};
    EXPECT_EQ(km.assign(b), 1u);
}

TEST(KMeans, UpdateMovesToRunningMean) {
    OnlineKMeans km(1);
    km.update(Vec{0, 0}, 0);
    km.update(Vec{2, 2}, 0);
    EXPECT_EQ(km.centroid(0), (Vec{1, 1}));
    for (int i = 0; i < 50; ++i) km.update(Vec{1, 1}, 0);
    EXPECT_EQ(km.centroid(0), (Vec{1, 1}));
}

TEST(KMeansProperty, SingleClusterIsBatchMean) {
    std::mt19937_64 gen(14);
    std::normal_distribution<double> nd(3.0, 5.0);
    OnlineKMeans km(1);
    Vec sum(4, 0.0);
    for (int n = 1; n <= 2000; ++n) {
        const Vec x = {nd(gen), nd(gen), nd(gen), nd(gen)};
        ASSERT_EQ(km.assign(x), 0u);
        km.update(x, 0);
        for (int i = 0; i < 4; ++i) sum[i] += x[i];
        for (int i = 0; i < 4; ++i) ASSERT_NEAR(km.centroid(0)[i], sum[i] / n, 1e-9);
    }
}

TEST(KMeans, TwoSeparatedBlobs) {
    std::mt19937_64 gen(15);
    std::normal_distribution<double> nd(0.0, 0.1);
    OnlineKMeans km(2);
    std::vector<std::pair<Vec, int>> pts;
    for (int i = 0; i < 1000; ++i) {
        const int blob = static_cast<int>(gen() % 2);
        const double c = blob ? 10.0 : 0.0;
        pts.push_back({Vec{c + nd(gen), c + nd(gen)}, blob});
    }
    std::array<std::array<int, 2>, 2> table{};
    for (const auto& [x, blob] : pts) {
        const auto id = km.assign(x);
        km.update(x, id);
        ++table[blob][id];
    }
    const int agree = std::max(table[0][0] + table[1][1], table[0][1] + table[1][0]);
    EXPECT_GE(agree, 990);
}

TEST(KMeansProperty, CentroidsAreMeansOfAssignedPoints) {
    std::mt19937_64 gen(16);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    OnlineKMeans km(4);
    std::vector<Vec> sums(4, Vec(3, 0.0));
    std::vector<int> counts(4, 0);
    double within = 0.0;
    std::vector<Vec> all;
    for (int i = 0; i < 1500; ++i) {
        const Vec x = {u(gen), u(gen), u(gen)};
        const auto id = km.assign(x);
        km.update(x, id);
        for (int d = 0; d < 3; ++d) sums[id][d] += x[d];
        ++counts[id];
        all.push_back(x);
    }
    for (std::size_t c = 0; c < 4; ++c)
        for (int d = 0; d < 3; ++d) EXPECT_NEAR(km.centroid(c)[d], sums[c][d] / counts[c], 1e-6);

    // Replay to assignment only against the frozen centroids.
    Vec grand(3, 0.0);
    for (const auto& x : all)
        for (int d = 0; d < 3; ++d) grand[d] += x[d] / static_cast<double>(all.size());
    double single = 0.0;
    for (const auto& x : all) {
        within += OnlineKMeans::squared_distance(x, km.centroid(km.assign(x)));
        single += OnlineKMeans::squared_distance(x, grand);
    }
    EXPECT_LE(within, single);
}

TEST(ModelBank, OneClassifierPerCluster) {
    ModelConfig cfg;
    cfg.family = ClassifierFamily::gnb;
    ModelBank bank(cfg, 1);
    EXPECT_EQ(bank.size(), 10u);
}

TEST(ModelBank, ColdClusterIsUniformAndFlagged) {
    ModelConfig cfg;
    cfg.family = ClassifierFamily::htc;
    ModelBank bank(cfg, 1);
    const Vec x{0.3, 0.7};
    const auto p = bank.predict(x, bank.route(x));
    EXPECT_TRUE(p.cold);
    EXPECT_EQ(p.dist[0], 0.5);
    EXPECT_EQ(p.dist[1], 0.5);
}

TEST(ModelBank, PredictThenLearnRoutesToTheSameClassifier) {
    ModelConfig cfg;
    cfg.family = ClassifierFamily::gnb;
    cfg.k = 2;
    ModelBank bank(cfg, 1);
    const Vec a{0, 0}, b{10, 10};
    bank.learn(a, a, Label::fake, bank.route(a));
    bank.learn(b, b, Label::non_fake, bank.route(b));
    EXPECT_EQ(bank.route(Vec{1, 1}), 0u);
    const auto p = bank.predict(Vec{1, 1}, 0);
    EXPECT_FALSE(p.cold);
    EXPECT_EQ(p.label, Label::fake);  // cluster 0 has only seen fake
    EXPECT_EQ(std::get<GaussianNB>(bank.model(1)).class_weights()[class_index(Label::fake)], 0.0);
}

TEST(ModelBank, LabelIsArgmaxConfidenceIsMax) {
    Prediction p;
    p.dist = {0.19, 0.81};
    p.label = label_from_index(argmax(p.dist));
    EXPECT_EQ(p.label, Label::fake);
    EXPECT_DOUBLE_EQ(p.confidence(), 0.81);
}

TEST(ModelBankProperty, SameSeedSameBank) {
    ModelConfig cfg;
    cfg.family = ClassifierFamily::arfc;
    cfg.arfc.n_models = 5;
    cfg.arfc.max_features = 2;
    ModelBank a(cfg, 77), b(cfg, 77);
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 800; ++i) {
        const Vec x{u(gen), u(gen), u(gen)};
        const Label y = x[0] > x[1] ? Label::fake : Label::non_fake;
        const auto pa = a.predict(x, a.route(x));
        const auto pb = b.predict(x, b.route(x));
        ASSERT_EQ(pa.dist, pb.dist);
        ASSERT_NEAR(pa.dist[0] + pa.dist[1], 1.0, 1e-9);
        a.learn(x, x, y, pa.cluster);
        b.learn(x, x, y, pb.cluster);
    }
}
