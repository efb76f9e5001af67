#include <gtest/gtest.h>

#include <deque>
#include <random>
#include <set>

#include "fakestream/forest.hpp"
#include "fakestream/model_bank.hpp"

using namespace fakestream;

namespace {

ForestConfig small_forest(std::size_t n = 10) {
    ForestConfig c;
    c.n_models = n;
    c.max_features = 3;
    return c;
}

std::vector<double> point(std::mt19937_64& gen) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return {u(gen), u(gen), u(gen), u(gen), u(gen), u(gen)};
}

Label rule(const std::vector<double>& x, bool flipped) {
    const bool pos = x[0] + x[2] > 1.0;
    return pos != flipped ? Label::fake : Label::non_fake;
}

}  // namespace

TEST(Forest, DefaultsMatchBestConfiguration) {
    const ForestConfig c;
    EXPECT_EQ(c.n_models, 200u);
    EXPECT_EQ(c.max_features, 50u);
    EXPECT_DOUBLE_EQ(c.lambda, 50.0);
    EXPECT_DOUBLE_EQ(c.warning_delta, 0.01);
    EXPECT_DOUBLE_EQ(c.drift_delta, 0.002);
}

TEST(Forest, SingleUnsampledMemberIsAPlainTree) {
    ForestConfig c;
    c.n_models = 1;
    c.max_features = 6;
    c.resampling = false;
    c.drift_detection = false;
    c.tree = htc_defaults();
    AdaptiveRandomForest f(c, 17);
    HoeffdingTree t(htc_defaults(), 17);
    std::mt19937_64 gen(10);
    for (int i = 0; i < 3000; ++i) {
        const auto x = point(gen);
        ASSERT_EQ(f.predict_proba(x), t.predict_proba(x)) << i;
        f.learn(x, rule(x, false));
        t.learn(x, rule(x, false));
    }
    EXPECT_EQ(f.member_tree(0).node_count(), t.node_count());
}

TEST(ForestProperty, VoteIsOnTheSimplex) {
    AdaptiveRandomForest f(small_forest(), 3);
    std::mt19937_64 gen(1);
    for (int i = 0; i < 1500; ++i) {
        const auto x = point(gen);
        const auto d = f.predict_proba(x);
        ASSERT_NEAR(d[0] + d[1], 1.0, 1e-9);
        ASSERT_GE(std::min(d[0], d[1]), 0.0);
        f.learn(x, rule(x, false));
    }
}

TEST(Forest, LearnsASimpleConcept) {
    AdaptiveRandomForest f(small_forest(), 5);
    std::mt19937_64 gen(2);
    std::size_t correct = 0;
    for (int i = 0; i < 4000; ++i) {
        const auto x = point(gen);
        const Label y = rule(x, false);
        if (i >= 2000) correct += label_from_index(argmax(f.predict_proba(x))) == y;
        f.learn(x, y);
    }
    EXPECT_GE(correct / 2000.0, 0.85);
}

TEST(Forest, MembersDiffer) {
    AdaptiveRandomForest f(small_forest(), 9);
    std::mt19937_64 gen(3);
    for (int i = 0; i < 2000; ++i) {
        const auto x = point(gen);
        f.learn(x, rule(x, false));
    }
    std::set<double> weights;
    for (std::size_t i = 0; i < f.size(); ++i) weights.insert(f.member_tree(i).weight_seen());
    EXPECT_GT(weights.size(), 1u);
}

TEST(Forest, SameSeedSameModel) {
    AdaptiveRandomForest a(small_forest(), 42), b(small_forest(), 42);
    std::mt19937_64 gen(4);
    for (int i = 0; i < 1000; ++i) {
        const auto x = point(gen);
        ASSERT_EQ(a.predict_proba(x), b.predict_proba(x));
        a.learn(x, rule(x, false));
        b.learn(x, rule(x, false));
    }
}

TEST(Forest, RecoversAfterLabelFlip) {
    AdaptiveRandomForest f(small_forest(), 11);
    std::mt19937_64 gen(5);
    std::deque<int> trailing;
    int sum = 0;
    double best_after = 0.0;
    for (int i = 0; i < 7000; ++i) {
        const auto x = point(gen);
        const Label y = rule(x, i >= 5000);
        const int ok = label_from_index(argmax(f.predict_proba(x))) == y;
        f.learn(x, y);
        trailing.push_back(ok);
        sum += ok;
        if (trailing.size() > 500) {
            sum -= trailing.front();
            trailing.pop_front();
        }
        if (i >= 5500) best_after = std::max(best_after, sum / 500.0);
    }
    EXPECT_GE(best_after, 0.85);
    EXPECT_GT(f.total_drifts(), 0u);
}

TEST(Forest, ExplainingMemberAgreesWithTheLabel) {
    AdaptiveRandomForest f(small_forest(), 13);
    std::mt19937_64 gen(6);
    for (int i = 0; i < 2000; ++i) {
        const auto x = point(gen);
        f.learn(x, rule(x, false));
    }
    for (int i = 0; i < 200; ++i) {
        const auto x = point(gen);
        const Label predicted = label_from_index(argmax(f.predict_proba(x)));
        const auto& tree = f.member_tree(f.explaining_member(x, predicted));
        EXPECT_EQ(label_from_index(argmax(tree.predict_proba(x))), predicted);
    }
}
