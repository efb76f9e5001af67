#include <gtest/gtest.h>

#include <random>
#include <set>
#include <sstream>

#include "fakestream/engine.hpp"
#include "fakestream/explain.hpp"
#include "support.hpp"

using namespace fakestream;
using nlohmann::json;

namespace {

std::shared_ptr<const TextResources> resources() {
    static auto r = std::make_shared<const TextResources>(TextResources::load(ResourcePaths::defaults()));
    return r;
}

struct Collected {
    Explanation explanation;
    std::vector<double> selected;
    Prediction prediction;
};

/// Explanations for every event of a synthetic run, captured before learning,
/// together with a structural check against the live model at that moment.
std::vector<Collected> explained_run(ClassifierFamily family, std::size_t n, bool* paths_consistent) {
    EngineConfig cfg;
    cfg.model.family = family;
    cfg.model.arfc.n_models = 8;
    cfg.model.htc.grace_period = 30;
    cfg.model.hatc.grace_period = 30;
    cfg.model.arfc.tree.grace_period = 30;
    cfg.lexicon.expected_stream_size = n;
    cfg.lexicon.rebuild_every = 10;
    PrequentialRunner runner(Engine(cfg, resources()), WindowSpec{}, n, 0);
    fixtures::StreamShape shape;
    shape.events = n;
    std::vector<Collected> out;
    *paths_consistent = true;
    for (const auto& e : fixtures::synthetic_stream(shape)) {
        runner.step(e, true, [&](const Observation& o, const Explanation* ex) {
            const auto& model = runner.engine().bank().model(o.prediction.cluster);
            if (const HoeffdingTree* tree = explaining_tree(model, o.selected.values, o.prediction.label);
                tree && !o.prediction.cold) {
                const TreeNode* leaf = replay_path(*tree, ex->path);
                if (!leaf || leaf != &tree->leaf_for(o.selected.values) ||
                    label_from_index(argmax(tree->leaf_prediction(*leaf, o.selected.values))) != ex->label)
                    *paths_consistent = false;
            }
            out.push_back({*ex, o.selected.values, o.prediction});
        });
    }
    return out;
}

Explanation sample_explanation() {
    Explanation e;
    e.tweet_id = "42";
    e.user_id = "u";
    e.timestamp = "2015-01-07T11:06:08.000Z";
    e.classifier = "htc";
    e.feature_set = "C";
    e.label = Label::fake;
    e.probability = 0.81;
    e.confidence_percent = confidence_percent(0.81);
    e.distribution = {0.19, 0.81};
    e.cold = false;
    e.has_tree = true;
    e.features = {{0, "has_description", ProfileClass::creator, 1.0, std::nullopt, false},
                  {3, "surprise", ProfileClass::content, 0.3, 0.1, true}};
    e.fake_lexicon = {{"gunman inside", 9}, {"breaking gunman", 4}};
    e.non_fake_lexicon = {{"police statement", 7}};
    e.cluster_features = {{5, "hashtag_count", 3.0, 2.5}};
    e.path = {{3, "surprise", 0.55, 0.3, true}};
    e.transcript = render_text(e);
    return e;
}

}  // namespace

TEST(Explain, ConfidenceRendering) {
    EXPECT_EQ(confidence_percent(0.81), 81);
    EXPECT_EQ(confidence_percent(0.5), 50);
    EXPECT_EQ(confidence_percent(1.0), 100);
    const auto e = sample_explanation();
    EXPECT_NE(prediction_sentence(e).find("fake with 81% confidence"), std::string::npos);
}

TEST(Explain, SentenceTemplate) {
    const auto e = sample_explanation();
    ASSERT_EQ(e.transcript.size(), e.path.size() + 1);
    EXPECT_EQ(e.transcript[0], "Because surprise was 0.30, which is ≤ 0.55, the model followed the left branch.");
}

TEST(Explain, EmptyPathTemplate) {
    auto e = sample_explanation();
    e.path.clear();
    EXPECT_EQ(render_text(e), std::vector<std::string>{"The model predicted from overall class frequencies (no splits yet)."});
}

TEST(Explain, SingleLeafTreeHasEmptyPath) {
    HoeffdingTree t;
    EXPECT_TRUE(decision_path(t, std::vector<double>{1.0, 2.0}).empty());
    EXPECT_EQ(replay_path(t, {}), &t.root());
}

TEST(Explain, DecisionPathFollowsTheTree) {
    TreeConfig cfg;
    cfg.grace_period = 50;
    HoeffdingTree t(cfg, 1);
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 3000; ++i) {
        std::vector<double> x = {u(gen), u(gen)};
        t.learn(x, (x[0] > 0.55) != (x[1] > 0.3) ? Label::fake : Label::non_fake);
    }
    ASSERT_FALSE(t.root().is_leaf);
    for (int i = 0; i < 200; ++i) {
        std::vector<double> x = {u(gen), u(gen)};
        const auto path = decision_path(t, x);
        ASSERT_FALSE(path.empty());
        EXPECT_EQ(path[0].left, x[path[0].feature] <= path[0].threshold);
        EXPECT_EQ(replay_path(t, path), &t.leaf_for(x));
    }
}

TEST(Explain, ClusterRankingByAbsoluteZ) {
    Standardizer global;
    std::mt19937_64 gen(5);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (int i = 0; i < 500; ++i) global.update(std::vector<double>{nd(gen), nd(gen) * 2.0, nd(gen), 5.0});
    const std::vector<double> centroid = {0.1, -6.0, 1.5, 5.0};
    // brute force oracle
    std::vector<std::pair<double, FeatureId>> oracle;
    for (FeatureId j = 0; j < 4; ++j) {
        const auto& s = global.stats(j);
        const double sd = s.population_std();
        oracle.push_back({sd > 0 ? std::fabs((centroid[j] - s.mean()) / sd) : 0.0, j});
    }
    std::stable_sort(oracle.begin(), oracle.end(), [](auto& a, auto& b) { return a.first > b.first; });
    const auto ranked = rank_centroid_features(centroid, global, 10);
    ASSERT_EQ(ranked.size(), 4u);  // K above the dimension count
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(ranked[i].feature, oracle[i].second);
    EXPECT_EQ(ranked[0].feature, 1u);
    EXPECT_EQ(rank_centroid_features(centroid, global, 2).size(), 2u);
    EXPECT_EQ(rank_centroid_features(centroid, global, 3), rank_centroid_features(centroid, global, 3));
}

TEST(Explain, EmptyClusterMarker) {
    OnlineKMeans km(3);
    Standardizer s;
    EXPECT_TRUE(cluster_characteristic_features(km, 2, s, 5).empty());
}

TEST(Explain, StructuredRoundTripIsByteIdentical) {
    const auto e = sample_explanation();
    const std::string a = emit_structured(e);
    const auto back = explanation_from_json(json::parse(a));
    EXPECT_EQ(back, e);
    EXPECT_EQ(emit_structured(back), a);
}

TEST(Explain, HtmlHasTheFourBlocks) {
    const std::string html = emit_html(sample_explanation());
    for (const char* id : {"id=\"features\"", "id=\"prediction\"", "id=\"lexicon\"", "id=\"cluster\""})
        EXPECT_NE(html.find(id), std::string::npos) << id;
    EXPECT_NE(html.find("81% confidence"), std::string::npos);
}

TEST(Explain, TextFitsTheTerminal) {
    auto e = sample_explanation();
    for (int i = 0; i < 30; ++i) e.fake_lexicon.push_back({"a rather long lexicon entry number " + std::to_string(i), 3});
    e.features.push_back({9, std::string(70, 'x'), ProfileClass::context, 123456.0, 1.0, true});
    const std::string text = emit_text(e);
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::size_t cols = 0;
        for (unsigned char c : line) cols += (c & 0xC0) != 0x80;
        EXPECT_LE(cols, 100u) << line;
    }
    EXPECT_NE(text.find("WARNING"), std::string::npos);
    EXPECT_NE(text.find("OK"), std::string::npos);
}

TEST(Explain, UnknownFormatRejected) {
    EXPECT_FALSE(parse_report_format("pdf"));
    EXPECT_EQ(parse_report_format("html"), ReportFormat::html);
}

TEST(ExplainProperty, RunExplanationsAreConsistent) {
    for (auto family : {ClassifierFamily::htc, ClassifierFamily::hatc, ClassifierFamily::arfc, ClassifierFamily::gnb}) {
        bool consistent = false;
        const auto all = explained_run(family, 400, &consistent);
        EXPECT_TRUE(consistent) << family_name(family);
        std::size_t with_path = 0, with_lexicon = 0;
        for (const auto& c : all) {
            const auto& e = c.explanation;
            EXPECT_EQ(e.label, c.prediction.label);
            EXPECT_GE(e.confidence_percent, 0);
            EXPECT_LE(e.confidence_percent, 100);
            std::set<std::string> fake;
            for (const auto& l : e.fake_lexicon) fake.insert(l.ngram);
            for (const auto& l : e.non_fake_lexicon) EXPECT_FALSE(fake.contains(l.ngram));
            for (auto* list : {&e.fake_lexicon, &e.non_fake_lexicon})
                for (std::size_t i = 1; i < list->size(); ++i) EXPECT_GE((*list)[i - 1].frequency, (*list)[i].frequency);
            const auto j = json::parse(emit_structured(e));
            for (const char* block : {"features", "prediction", "lexicon", "cluster"}) EXPECT_TRUE(j.contains(block));
            EXPECT_EQ(emit_structured(explanation_from_json(j)), emit_structured(e));
            if (e.has_tree && !e.cold) {
                EXPECT_EQ(e.transcript.size(), e.path.empty() ? 1 : e.path.size() + 1);
            }
            with_path += !e.path.empty();
            with_lexicon += !e.fake_lexicon.empty();
        }
        if (family != ClassifierFamily::gnb) {
            EXPECT_GT(with_path, 0u) << family_name(family);
        }
        EXPECT_GT(with_lexicon, 0u);
    }
}

TEST(Explain, WarningMarksDeviationFromUserAverage) {
    bool consistent = false;
    const auto all = explained_run(ClassifierFamily::htc, 200, &consistent);
    std::size_t warnings = 0, oks = 0;
    for (const auto& c : all)
        for (const auto& f : c.explanation.features) {
            if (f.user_average) EXPECT_EQ(f.warning, f.value != *f.user_average);
            else EXPECT_FALSE(f.warning);
            warnings += f.warning;
            oks += !f.warning;
        }
    EXPECT_GT(warnings, 0u);
    EXPECT_GT(oks, 0u);
}
