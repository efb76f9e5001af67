#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include "fakestream/core.hpp"
#include "fakestream/textproc.hpp"

#ifndef FAKESTREAM_DATA_DIR
#define FAKESTREAM_DATA_DIR "data"
#endif

namespace fakestream {

struct ResourcePaths {
    std::filesystem::path stopwords;
    std::filesystem::path lemmas;
    std::filesystem::path bad_words;
    std::filesystem::path easy_words;
    std::filesystem::path pos_tags;
    std::filesystem::path polarity;
    std::filesystem::path emotion;
    std::filesystem::path word_corpus;

    static ResourcePaths in_directory(const std::filesystem::path& dir) {
        return {dir / "stopwords.txt", dir / "lemmas.tsv",   dir / "bad_words.txt", dir / "easy_words.txt",
                dir / "pos_tags.tsv",  dir / "polarity.tsv", dir / "emotion.tsv",   dir / "english_words.txt"};
    }

    static ResourcePaths defaults() { return in_directory(FAKESTREAM_DATA_DIR); }
};

/// Immutable lexica shared by the text primitives.
struct TextResources {
    WordSet stopwords;
    LemmaTable lemmas;
    WordSet bad_words;
    WordSet easy_words;
    PosLexicon pos;
    PolarityLexicon polarity;
    EmotionLexicon emotion;
    WordSet word_corpus;

    static TextResources load(const ResourcePaths& paths);
};

namespace detail {

template <class Fn>
void for_each_entry(const std::filesystem::path& path, Fn&& fn) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open lexicon file: " + path.string());
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            fn(line, std::string{});
        else
            fn(line.substr(0, tab), line.substr(tab + 1));
    }
}

inline WordSet load_word_set(const std::filesystem::path& path) {
    WordSet out;
    for_each_entry(path, [&](const std::string& w, const std::string&) {
        auto folded = text::fold_token(w);
        if (!folded.empty()) out.insert(std::move(folded));
        out.insert(text::to_lower(w));
    });
    return out;
}

inline PosTag parse_pos(const std::string& tag) {
    if (tag == "ADJ") return PosTag::adjective;
    if (tag == "AUX") return PosTag::auxiliary;
    if (tag == "DET") return PosTag::determiner;
    if (tag == "NOUN" || tag == "PROPN") return PosTag::noun;
    if (tag == "PRON") return PosTag::pronoun;
    if (tag == "VERB") return PosTag::verb;
    if (tag == "ADV") return PosTag::adverb;
    return PosTag::other;
}

/// NRC categories folded onto the five emotions; joy counts as happiness.
inline std::optional<Emotion> parse_emotion(const std::string& name) {
    if (name == "anger") return Emotion::anger;
    if (name == "fear") return Emotion::fear;
    if (name == "joy" || name == "happiness") return Emotion::happiness;
    if (name == "sadness") return Emotion::sadness;
    if (name == "surprise") return Emotion::surprise;
    return std::nullopt;
}

}  // namespace detail

inline TextResources TextResources::load(const ResourcePaths& paths) {
    TextResources r;
    r.stopwords = detail::load_word_set(paths.stopwords);
    r.bad_words = detail::load_word_set(paths.bad_words);
    r.easy_words = detail::load_word_set(paths.easy_words);
    r.word_corpus = detail::load_word_set(paths.word_corpus);
    detail::for_each_entry(paths.lemmas, [&](const std::string& w, const std::string& l) {
        if (!l.empty()) r.lemmas[text::to_lower(w)] = text::to_lower(l);
    });
    detail::for_each_entry(paths.pos_tags, [&](const std::string& w, const std::string& t) {
        r.pos[text::to_lower(w)] = detail::parse_pos(t);
    });
    detail::for_each_entry(paths.polarity, [&](const std::string& w, const std::string& v) {
        try {
            r.polarity[text::to_lower(w)] = std::stod(v);
        } catch (const std::exception&) {
            throw Error("bad polarity value for '" + w + "' in " + paths.polarity.string());
        }
    });
    detail::for_each_entry(paths.emotion, [&](const std::string& w, const std::string& e) {
        if (auto emo = detail::parse_emotion(text::to_lower(e)))
            r.emotion[text::to_lower(w)] |= static_cast<std::uint8_t>(1u << static_cast<unsigned>(*emo));
    });
    return r;
}

}  // namespace fakestream
