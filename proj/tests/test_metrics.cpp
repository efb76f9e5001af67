#include <gtest/gtest.h>

#include <random>

#include "fakestream/engine.hpp"
#include "fakestream/metrics.hpp"
#include "support.hpp"

using namespace fakestream;

TEST(Metrics, AllCorrect) {
    MetricsWindow w;
    for (int i = 0; i < 10; ++i) w.add(i % 2 ? Label::fake : Label::non_fake, i % 2 ? Label::fake : Label::non_fake);
    const auto m = compute_metrics(w);
    ASSERT_TRUE(m);
    EXPECT_EQ(m->accuracy, 1.0);
    EXPECT_EQ(m->macro_f, 1.0);
}

TEST(Metrics, AllPositiveOnBalancedWindow) {
    MetricsWindow w;
    for (int i = 0; i < 50; ++i) w.add(Label::fake, Label::fake);
    for (int i = 0; i < 50; ++i) w.add(Label::fake, Label::non_fake);
    const auto m = compute_metrics(w);
    ASSERT_TRUE(m);
    EXPECT_NEAR(m->f_fake, 2.0 / 3.0, 1e-12);
    EXPECT_EQ(m->f_non_fake, 0.0);
    EXPECT_NEAR(m->macro_f, 1.0 / 3.0, 1e-12);
    EXPECT_EQ(m->accuracy, 0.5);
}

TEST(Metrics, EmptyWindowIsAbsent) {
    MetricsWindow w;
    EXPECT_FALSE(compute_metrics(w));
    RunReport r;
    EXPECT_TRUE(r.to_json()["accuracy"].is_null());
}

TEST(Metrics, MajorityBaselineOnPhemeCounts) {
    MetricsWindow w;
    for (int i = 0; i < 4022; ++i) w.add(Label::non_fake, Label::non_fake);
    for (int i = 0; i < 2402; ++i) w.add(Label::non_fake, Label::fake);
    const auto m = compute_metrics(w);
    ASSERT_TRUE(m);
    EXPECT_NEAR(m->accuracy * 100.0, 62.61, 0.01);
    EXPECT_DOUBLE_EQ(m->accuracy, 4022.0 / 6424.0);
}

TEST(Window, Capacities) {
    WindowSpec full;
    EXPECT_EQ(full.capacity(6424), 0u);
    WindowSpec frac{WindowMode::fraction, 0.2, 0};
    EXPECT_EQ(frac.capacity(6424), 1285u);
    EXPECT_EQ(frac.describe(), "fraction:0.2");
    WindowSpec count{WindowMode::count, 1.0, 300};
    EXPECT_EQ(count.capacity(6424), 300u);
}

TEST(WindowProperty, ConfusionEqualsRecount) {
    std::mt19937 gen(12);
    for (std::uint64_t cap : {0u, 1u, 7u, 100u}) {
        MetricsWindow w(cap);
        std::vector<std::pair<Label, Label>> all;
        for (int i = 0; i < 1000; ++i) {
            const Label p = gen() % 2 ? Label::fake : Label::non_fake;
            const Label a = gen() % 3 ? Label::fake : Label::non_fake;
            w.add(p, a);
            all.emplace_back(p, a);
            ASSERT_EQ(w.confusion(), recount(w));
            if (cap) {
                ASSERT_LE(w.size(), cap);
            }
        }
        // The window holds exactly the most recent pairs.
        const std::size_t n = cap ? cap : all.size();
        Confusion tail{};
        for (std::size_t i = all.size() - n; i < all.size(); ++i)
            ++tail[class_index(all[i].second)][class_index(all[i].first)];
        EXPECT_EQ(w.confusion(), tail);
        const auto m = compute_metrics(w);
        ASSERT_TRUE(m);
        for (double v : {m->accuracy, m->f_fake, m->f_non_fake, m->macro_f}) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
    }
}

namespace {

std::shared_ptr<const TextResources> resources() {
    static auto r = std::make_shared<const TextResources>(TextResources::load(ResourcePaths::defaults()));
    return r;
}

PrequentialRunner runner(ClassifierFamily family, std::uint64_t n) {
    EngineConfig cfg;
    cfg.model.family = family;
    cfg.model.arfc.n_models = 5;
    cfg.lexicon.expected_stream_size = n;
    return PrequentialRunner(Engine(cfg, resources()), WindowSpec{}, n, 50);
}

}  // namespace

TEST(Prequential, MajorityBaselineEqualsPrevalence) {
    fixtures::StreamShape shape;
    shape.events = 300;
    const auto events = fixtures::synthetic_stream(shape);
    auto r = runner(ClassifierFamily::majority, events.size());
    std::size_t non_fake = 0;
    for (const auto& e : events) {
        r.step(e);
        non_fake += *e.label == Label::non_fake;
    }
    EXPECT_DOUBLE_EQ(r.report().metrics->accuracy, static_cast<double>(non_fake) / 300.0);
    EXPECT_EQ(r.series().size(), 6u);
}

TEST(Prequential, UnlabeledEventRejected) {
    auto r = runner(ClassifierFamily::gnb, 10);
    fixtures::StreamShape shape;
    shape.events = 1;
    auto e = fixtures::synthetic_stream(shape)[0];
    e.label.reset();
    EXPECT_THROW(r.step(e), Error);
}

TEST(PrequentialProperty, FutureEventsNeverChangePastPredictions) {
    fixtures::StreamShape shape;
    shape.events = 160;
    const auto events = fixtures::synthetic_stream(shape);
    auto mutated = events;
    for (std::size_t i = 100; i < mutated.size(); ++i) {
        mutated[i].text = "completely different words here " + std::to_string(i);
        mutated[i].label = *mutated[i].label == Label::fake ? Label::non_fake : Label::fake;
        mutated[i].creator.follower_count *= 7;
    }
    for (auto family : {ClassifierFamily::gnb, ClassifierFamily::htc, ClassifierFamily::arfc}) {
        auto a = runner(family, events.size());
        auto b = runner(family, events.size());
        for (std::size_t i = 0; i < events.size(); ++i) {
            const auto pa = a.step(events[i]);
            const auto pb = b.step(mutated[i]);
            if (i < 100) {
                ASSERT_EQ(pa.dist, pb.dist) << family_name(family) << " at " << i;
                ASSERT_EQ(pa.cluster, pb.cluster);
            }
        }
    }
}

TEST(Prequential, IdenticalSeedsIdenticalReports) {
    fixtures::StreamShape shape;
    shape.events = 200;
    const auto events = fixtures::synthetic_stream(shape);
    auto a = runner(ClassifierFamily::arfc, events.size());
    auto b = runner(ClassifierFamily::arfc, events.size());
    for (const auto& e : events) {
        a.step(e);
        b.step(e);
    }
    EXPECT_EQ(a.report().to_json().dump(), b.report().to_json().dump());
    EXPECT_EQ(series_csv(a.series()), series_csv(b.series()));
}
