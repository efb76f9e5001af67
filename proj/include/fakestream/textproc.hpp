#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "fakestream/core.hpp"
#include "fakestream/ingest.hpp"

namespace fakestream {

using WordSet = std::unordered_set<std::string>;
using LemmaTable = std::unordered_map<std::string, std::string>;
using PolarityLexicon = std::unordered_map<std::string, double>;

enum class PosTag : std::uint8_t { other, adjective, auxiliary, determiner, noun, pronoun, verb, adverb };
using PosLexicon = std::unordered_map<std::string, PosTag>;

enum class Emotion : std::uint8_t { anger = 0, fear, happiness, sadness, surprise };
inline constexpr std::size_t kNumEmotions = 5;
inline constexpr std::array<std::string_view, kNumEmotions> kEmotionNames{"anger", "fear", "happiness", "sadness",
                                                                          "surprise"};
/// Bit i set when the word carries Emotion(i).
using EmotionLexicon = std::unordered_map<std::string, std::uint8_t>;

namespace text {

[[nodiscard]] inline bool is_ascii_alnum(unsigned char c) noexcept { return std::isalnum(c) && c < 0x80; }
[[nodiscard]] inline bool is_ascii_alpha(unsigned char c) noexcept { return std::isalpha(c) && c < 0x80; }
[[nodiscard]] inline bool is_space(unsigned char c) noexcept { return c == ' ' || (c >= '\t' && c <= '\r'); }

[[nodiscard]] inline std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

[[nodiscard]] inline bool starts_with_ci(std::string_view s, std::string_view prefix) noexcept {
    if (s.size() < prefix.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i)
        if (std::tolower(static_cast<unsigned char>(s[i])) != prefix[i]) return false;
    return true;
}

[[nodiscard]] inline bool is_url_at(std::string_view s, std::size_t pos) noexcept {
    const auto rest = s.substr(pos);
    if (!(starts_with_ci(rest, "http://") || starts_with_ci(rest, "https://") || starts_with_ci(rest, "www.")))
        return false;
    return pos == 0 || !is_ascii_alnum(static_cast<unsigned char>(s[pos - 1]));
}

/// Byte spans [begin, end) of URLs; a URL runs to the next whitespace.
[[nodiscard]] inline std::vector<std::pair<std::size_t, std::size_t>> url_spans(std::string_view s) {
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    for (std::size_t i = 0; i < s.size();) {
        if (is_url_at(s, i)) {
            std::size_t j = i;
            while (j < s.size() && !is_space(static_cast<unsigned char>(s[j]))) ++j;
            spans.emplace_back(i, j);
            i = j;
        } else {
            ++i;
        }
    }
    return spans;
}

[[nodiscard]] inline std::vector<std::string> extract_urls(std::string_view s) {
    std::vector<std::string> out;
    for (auto [b, e] : url_spans(s)) out.emplace_back(s.substr(b, e - b));
    return out;
}

/// URLs replaced by a single space.
[[nodiscard]] inline std::string strip_urls(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t prev = 0;
    for (auto [b, e] : url_spans(s)) {
        out.append(s.substr(prev, b - prev));
        out.push_back(' ');
        prev = e;
    }
    out.append(s.substr(prev));
    return out;
}

[[nodiscard]] inline std::vector<std::string_view> split_whitespace(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_space(static_cast<unsigned char>(s[i]))) ++i;
        std::size_t j = i;
        while (j < s.size() && !is_space(static_cast<unsigned char>(s[j]))) ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

/// Number of UTF-8 code points that are not ASCII whitespace.
[[nodiscard]] inline std::size_t visible_chars(std::string_view s) noexcept {
    std::size_t n = 0;
    for (unsigned char c : s)
        if ((c & 0xC0) != 0x80 && !is_space(c)) ++n;
    return n;
}

/// Lowercase ASCII letters of a raw word ("Don't!" -> "dont").
[[nodiscard]] inline std::string letters_of(std::string_view word) {
    std::string out;
    for (unsigned char c : word)
        if (is_ascii_alpha(c)) out.push_back(static_cast<char>(std::tolower(c)));
    return out;
}

/// Folds a token the same way the normalizer does: apostrophes deleted,
/// other non-alphanumerics dropped, lowercase.
[[nodiscard]] inline std::string fold_token(std::string_view word) {
    std::string out;
    for (unsigned char c : word)
        if (is_ascii_alnum(c)) out.push_back(static_cast<char>(std::tolower(c)));
    return out;
}

/// Raw words after URL removal: whitespace tokens containing at least one
/// ASCII letter or digit. Hashtags and mentions count as words.
[[nodiscard]] inline std::vector<std::string_view> raw_words(std::string_view no_urls) {
    std::vector<std::string_view> out;
    for (auto tok : split_whitespace(no_urls))
        if (std::any_of(tok.begin(), tok.end(), [](char c) { return is_ascii_alnum(static_cast<unsigned char>(c)); }))
            out.push_back(tok);
    return out;
}

/// Runs of [.!?] separate sentences; any non-empty text with a word has >= 1.
[[nodiscard]] inline std::size_t count_sentences(std::string_view no_urls) {
    std::size_t sentences = 0;
    bool has_word = false;
    for (std::size_t i = 0; i <= no_urls.size(); ++i) {
        const bool end = i == no_urls.size();
        const char c = end ? '.' : no_urls[i];
        if (c == '.' || c == '!' || c == '?') {
            if (has_word) ++sentences;
            has_word = false;
        } else if (is_ascii_alnum(static_cast<unsigned char>(c))) {
            has_word = true;
        }
    }
    return sentences;
}

}  // namespace text

/// Vowel groups (a, e, i, o, u, y), minus one for a silent trailing "e"
/// unless the word ends in consonant + "le"; at least 1 for non-empty words.
[[nodiscard]] inline std::size_t count_syllables(std::string_view word) {
    const std::string w = text::letters_of(word);
    if (w.empty()) return 0;
    auto vowel = [](char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y'; };
    std::size_t groups = 0;
    bool in_group = false;
    for (char c : w) {
        const bool v = vowel(c);
        if (v && !in_group) ++groups;
        in_group = v;
    }
    const std::size_t n = w.size();
    if (n >= 2 && w[n - 1] == 'e' && !vowel(w[n - 2]) && groups > 1) {
        const bool consonant_le = n >= 3 && w[n - 2] == 'l' && !vowel(w[n - 3]);
        if (!consonant_le) --groups;
    }
    return std::max<std::size_t>(groups, 1);
}

struct HashtagSplit {
    std::vector<std::string> words;
    bool resolved = false;
};

/// TitleCase tags ("JeSuisCharlie") split at capitals; anything else is
/// segmented into corpus words with the fewest pieces. Ties prefer the
/// longest first word, then the longest second, and so on.
[[nodiscard]] inline HashtagSplit split_hashtag(std::string_view tag, const WordSet& corpus,
                                                std::size_t max_word_len = 40) {
    if (!tag.empty() && tag.front() == '#') tag.remove_prefix(1);
    HashtagSplit out;
    if (tag.empty()) return out;

    // TitleCase: one or more [A-Z][a-z0-9]+ pieces.
    bool title = std::isupper(static_cast<unsigned char>(tag.front())) != 0;
    for (std::size_t i = 0; title && i < tag.size(); ++i) {
        const auto c = static_cast<unsigned char>(tag[i]);
        if (!text::is_ascii_alnum(c)) title = false;
        if (std::isupper(c) && (i + 1 >= tag.size() || std::isupper(static_cast<unsigned char>(tag[i + 1]))))
            title = false;
    }
    if (title) {
        std::size_t start = 0;
        for (std::size_t i = 1; i <= tag.size(); ++i) {
            if (i == tag.size() || std::isupper(static_cast<unsigned char>(tag[i]))) {
                out.words.emplace_back(tag.substr(start, i - start));
                start = i;
            }
        }
        out.resolved = true;
        return out;
    }

    const std::string lower = text::to_lower(tag);
    const std::size_t n = lower.size();
    constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
    // pieces[i]: fewest corpus words covering lower[i..n); next[i]: end of the first word.
    std::vector<std::size_t> pieces(n + 1, kNone), next(n + 1, kNone);
    pieces[n] = 0;
    for (std::size_t i = n; i-- > 0;) {
        const std::size_t longest = std::min(n, i + max_word_len);
        for (std::size_t j = longest; j > i; --j) {  // longest first word wins ties
            if (pieces[j] == kNone) continue;
            if (!corpus.contains(lower.substr(i, j - i))) continue;
            if (pieces[j] + 1 < pieces[i]) {
                pieces[i] = pieces[j] + 1;
                next[i] = j;
            }
        }
    }
    if (pieces[0] == kNone) {
        out.words.emplace_back(tag);
        out.resolved = false;
        return out;
    }
    for (std::size_t i = 0; i < n; i = next[i]) out.words.push_back(lower.substr(i, next[i] - i));
    out.resolved = true;
    return out;
}

struct ProcessedText {
    std::vector<std::string> tokens;
    std::vector<std::string> lemmas;
    std::vector<std::vector<std::string>> hashtags_expanded;
    std::size_t sentence_count = 0;
    std::size_t syllable_total = 0;

    [[nodiscard]] std::string joined() const {
        std::string out;
        for (const auto& l : lemmas) {
            if (!out.empty()) out.push_back(' ');
            out += l;
        }
        return out;
    }
};

/// URLs removed, hashtags expanded when a corpus is supplied, apostrophes
/// deleted, other non-alphanumerics treated as separators, casefolded,
/// stopwords dropped, then each token lemmatized by table lookup.
[[nodiscard]] inline ProcessedText normalize_and_tokenize(std::string_view raw, const WordSet& stopwords,
                                                          const LemmaTable& lemma_table,
                                                          const WordSet* hashtag_corpus = nullptr) {
    ProcessedText out;
    const std::string no_urls = text::strip_urls(raw);

    for (auto w : text::raw_words(no_urls)) out.syllable_total += count_syllables(w);
    out.sentence_count = text::count_sentences(no_urls);

    std::string cleaned;
    cleaned.reserve(no_urls.size());
    for (std::size_t i = 0; i < no_urls.size(); ++i) {
        const auto c = static_cast<unsigned char>(no_urls[i]);
        if (c == '#' && i + 1 < no_urls.size() && text::is_ascii_alnum(static_cast<unsigned char>(no_urls[i + 1]))) {
            std::size_t j = i + 1;
            while (j < no_urls.size() && (text::is_ascii_alnum(static_cast<unsigned char>(no_urls[j])) || no_urls[j] == '_'))
                ++j;
            const std::string_view tag = std::string_view(no_urls).substr(i + 1, j - i - 1);
            if (hashtag_corpus) {
                auto split = split_hashtag(tag, *hashtag_corpus);
                cleaned.push_back(' ');
                for (const auto& w : split.words) {
                    cleaned += w;
                    cleaned.push_back(' ');
                }
                out.hashtags_expanded.push_back(std::move(split.words));
            } else {
                cleaned.push_back(' ');
                cleaned.append(tag);
                cleaned.push_back(' ');
                out.hashtags_expanded.push_back({std::string(tag)});
            }
            i = j - 1;
            continue;
        }
        if (c == '\'') continue;
        // U+2019 right single quotation mark
        if (c == 0xE2 && i + 2 < no_urls.size() && static_cast<unsigned char>(no_urls[i + 1]) == 0x80 &&
            static_cast<unsigned char>(no_urls[i + 2]) == 0x99) {
            i += 2;
            continue;
        }
        if (c >= 0x80) continue;  // accents and other non-ASCII bytes are purged
        cleaned.push_back(text::is_ascii_alnum(c) ? static_cast<char>(std::tolower(c)) : ' ');
    }

    for (auto tok : text::split_whitespace(cleaned)) {
        std::string t(tok);
        for (char& ch : t) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        if (stopwords.contains(t)) continue;
        auto it = lemma_table.find(t);
        out.lemmas.push_back(it == lemma_table.end() ? t : it->second);
        out.tokens.push_back(std::move(t));
    }
    return out;
}

struct StyleCounts {
    std::size_t adjective = 0;
    std::size_t auxiliary = 0;
    std::size_t bad_word = 0;
    std::size_t determiner = 0;
    std::size_t difficult_word = 0;
    std::size_t hashtag = 0;
    std::size_t link = 0;
    std::size_t link_repeated = 0;
    std::size_t noun = 0;
    std::size_t pronoun = 0;
    std::size_t punctuation = 0;
    std::size_t uppercase_word = 0;
    std::size_t word = 0;
    std::size_t character = 0;
    std::size_t image = 0;
    std::size_t video = 0;

    friend bool operator==(const StyleCounts&, const StyleCounts&) = default;
};

/// Lexicon tag when known, otherwise a suffix guess.
[[nodiscard]] inline PosTag guess_pos(const std::string& word, const PosLexicon& lexicon) {
    if (auto it = lexicon.find(word); it != lexicon.end()) return it->second;
    if (word.size() < 3) return PosTag::other;
    auto ends = [&](std::string_view suf) {
        return word.size() > suf.size() + 1 && word.compare(word.size() - suf.size(), suf.size(), suf) == 0;
    };
    if (ends("ly")) return PosTag::adverb;
    for (auto suf : {"ous", "ful", "ive", "able", "ible", "less", "ish", "ical", "ic", "al", "est"})
        if (ends(suf)) return PosTag::adjective;
    for (auto suf : {"ing", "ed", "ize", "ise"})
        if (ends(suf)) return PosTag::verb;
    return PosTag::noun;
}

/// Raw-text counters (char, punctuation, uppercase words, hashtags, links)
/// plus word-level counters over the raw words with URLs removed.
[[nodiscard]] inline StyleCounts style_counts(std::string_view raw, const ProcessedText& /*processed*/,
                                              const ContextMeta& context, const WordSet& bad_words,
                                              const WordSet& easy_words, const PosLexicon& pos_lexicon) {
    StyleCounts sc;
    sc.character = text::visible_chars(raw);
    sc.image = context.image_urls.size();
    sc.video = context.video_urls.size();

    const auto urls = text::extract_urls(raw);
    sc.link = urls.size();
    for (std::size_t i = 0; i < urls.size(); ++i)
        if (std::find(urls.begin(), urls.begin() + static_cast<std::ptrdiff_t>(i), urls[i]) !=
            urls.begin() + static_cast<std::ptrdiff_t>(i))
            ++sc.link_repeated;

    const std::string no_urls = text::strip_urls(raw);
    for (std::size_t i = 0; i < no_urls.size(); ++i) {
        const auto c = static_cast<unsigned char>(no_urls[i]);
        if (c < 0x80 && std::ispunct(c)) ++sc.punctuation;
        if (c == '#' && i + 1 < no_urls.size() && text::is_ascii_alnum(static_cast<unsigned char>(no_urls[i + 1])))
            ++sc.hashtag;
    }

    for (auto w : text::raw_words(no_urls)) {
        ++sc.word;
        std::size_t letters = 0;
        bool all_upper = true;
        for (unsigned char c : w) {
            if (!text::is_ascii_alpha(c)) continue;
            ++letters;
            if (!std::isupper(c)) all_upper = false;
        }
        if (letters >= 2 && all_upper) ++sc.uppercase_word;

        const std::string folded = text::fold_token(w);
        if (folded.empty()) continue;
        if (bad_words.contains(folded)) ++sc.bad_word;
        const std::string letters_only = text::letters_of(w);
        if (!letters_only.empty() && !easy_words.contains(folded) && count_syllables(letters_only) >= 2)
            ++sc.difficult_word;
        switch (guess_pos(folded, pos_lexicon)) {
            case PosTag::adjective: ++sc.adjective; break;
            case PosTag::auxiliary: ++sc.auxiliary; break;
            case PosTag::determiner: ++sc.determiner; break;
            case PosTag::noun: ++sc.noun; break;
            case PosTag::pronoun: ++sc.pronoun; break;
            default: break;
        }
    }
    return sc;
}

enum class FleschBand : std::uint8_t { very_confusing, difficult, fairly_difficult, standard, fairly_easy, easy, very_easy };

[[nodiscard]] inline std::string_view flesch_band_name(FleschBand band) noexcept {
    switch (band) {
        case FleschBand::very_easy: return "Very Easy";
        case FleschBand::easy: return "Easy";
        case FleschBand::fairly_easy: return "Fairly Easy";
        case FleschBand::standard: return "Standard";
        case FleschBand::fairly_difficult: return "Fairly Difficult";
        case FleschBand::difficult: return "Difficult";
        case FleschBand::very_confusing: return "Very Confusing";
    }
    return "Very Confusing";
}

/// Difficulty bucket; the score is clamped to [0, 100] and NaN maps to the bottom bucket.
[[nodiscard]] inline FleschBand flesch_band(double score) noexcept {
    if (!(score >= 0.0)) return FleschBand::very_confusing;
    const double s = std::min(score, 100.0);
    if (s >= 90.0) return FleschBand::very_easy;
    if (s >= 80.0) return FleschBand::easy;
    if (s >= 70.0) return FleschBand::fairly_easy;
    if (s >= 60.0) return FleschBand::standard;
    if (s >= 50.0) return FleschBand::fairly_difficult;
    if (s >= 30.0) return FleschBand::difficult;
    return FleschBand::very_confusing;
}

inline constexpr double kDefaultMsPerChar = 14.69;

struct ReadabilityScores {
    double flesch_reading_ease = 0.0;
    FleschBand flesch_band = FleschBand::very_confusing;
    double mcalpine_eflaw = 0.0;
    double reading_time_s = 0.0;
    bool degenerate = false;
};

/// Flesch reading ease, McAlpine EFLAW ((words + words of <= 3 letters) / sentences)
/// and reading time at `ms_per_char` milliseconds per visible character.
[[nodiscard]] inline ReadabilityScores readability(std::string_view raw, double ms_per_char = kDefaultMsPerChar) {
    ReadabilityScores r;
    const std::string no_urls = text::strip_urls(raw);
    const auto words = text::raw_words(no_urls);
    const std::size_t sentences = text::count_sentences(no_urls);
    if (words.empty() || sentences == 0) {
        r.degenerate = true;
        r.flesch_band = flesch_band(0.0);
        return r;
    }
    std::size_t syllables = 0, mini = 0;
    for (auto w : words) {
        syllables += count_syllables(w);
        if (text::fold_token(w).size() <= 3) ++mini;
    }
    const auto nw = static_cast<double>(words.size());
    const auto ns = static_cast<double>(sentences);
    r.flesch_reading_ease = 206.835 - 1.015 * (nw / ns) - 84.6 * (static_cast<double>(syllables) / nw);
    r.flesch_band = flesch_band(r.flesch_reading_ease);
    r.mcalpine_eflaw = (nw + static_cast<double>(mini)) / ns;
    r.reading_time_s = static_cast<double>(text::visible_chars(raw)) * ms_per_char / 1000.0;
    return r;
}

struct AffectScores {
    double polarity = 0.0;
    std::array<double, kNumEmotions> emotions{};

    [[nodiscard]] double emotion(Emotion e) const { return emotions[static_cast<std::size_t>(e)]; }
};

/// Polarity = mean value of matched tokens; each emotion = fraction of tokens
/// tagged with it. Tokens are matched as written, then through their lemma.
[[nodiscard]] inline AffectScores affect_scores(const ProcessedText& processed, const PolarityLexicon& polarity,
                                                const EmotionLexicon& emotion) {
    AffectScores a;
    const std::size_t n = processed.tokens.size();
    if (n == 0) return a;
    double pol_sum = 0.0;
    std::size_t pol_hits = 0;
    std::array<std::size_t, kNumEmotions> hits{};
    for (std::size_t i = 0; i < n; ++i) {
        const auto& tok = processed.tokens[i];
        const auto& lem = i < processed.lemmas.size() ? processed.lemmas[i] : tok;
        auto p = polarity.find(tok);
        if (p == polarity.end()) p = polarity.find(lem);
        if (p != polarity.end()) {
            pol_sum += p->second;
            ++pol_hits;
        }
        auto e = emotion.find(tok);
        if (e == emotion.end()) e = emotion.find(lem);
        if (e != emotion.end())
            for (std::size_t k = 0; k < kNumEmotions; ++k)
                if (e->second & (1u << k)) ++hits[k];
    }
    if (pol_hits > 0) a.polarity = std::clamp(pol_sum / static_cast<double>(pol_hits), -1.0, 1.0);
    for (std::size_t k = 0; k < kNumEmotions; ++k)
        a.emotions[k] = std::clamp(static_cast<double>(hits[k]) / static_cast<double>(n), 0.0, 1.0);
    return a;
}

/// Contiguous n-grams of `tokens` for every n in [lo, hi], joined by a space,
/// with their occurrence counts.
[[nodiscard]] inline std::map<std::string, std::size_t> ngram_counts(const std::vector<std::string>& tokens,
                                                                     std::size_t lo, std::size_t hi) {
    std::map<std::string, std::size_t> out;
    for (std::size_t n = std::max<std::size_t>(lo, 1); n <= hi; ++n) {
        if (n > tokens.size()) break;
        for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
            std::string gram = tokens[i];
            for (std::size_t j = 1; j < n; ++j) {
                gram.push_back(' ');
                gram += tokens[i + j];
            }
            ++out[gram];
        }
    }
    return out;
}

}  // namespace fakestream
