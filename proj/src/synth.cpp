#include "xsum/synth.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

#include <json.hpp>

#include "xsum/common.hpp"

namespace xsum {

namespace {

constexpr std::string_view kConsonants = "bdfgklmnprstvz";
// Disjoint vowel sets keep the two vocabularies from sharing a word.
constexpr std::string_view kFillerVowels = "aei";
constexpr std::string_view kKeyVowels = "ou";
constexpr std::size_t kFillerWords = 400;
constexpr std::size_t kKeyWords = 80;
constexpr std::uint64_t kVocabularySeed = 0x766f636162ULL;

std::vector<std::string> make_vocabulary(std::string_view vowels, std::size_t count, std::string_view tag) {
    auto rng = Rng::derive(kVocabularySeed, tag);
    std::set<std::string> seen;
    std::vector<std::string> words;
    while (words.size() < count) {
        std::string w;
        const auto syllables = 2 + rng.below(2);
        for (std::uint64_t s = 0; s < syllables; ++s) {
            w.push_back(kConsonants[rng.below(kConsonants.size())]);
            w.push_back(vowels[rng.below(vowels.size())]);
        }
        if (seen.insert(w).second) words.push_back(std::move(w));
    }
    return words;
}

const std::vector<std::string>& filler_vocabulary() {
    static const auto v = make_vocabulary(kFillerVowels, kFillerWords, "filler");
    return v;
}

const std::vector<std::string>& key_vocabulary() {
    static const auto v = make_vocabulary(kKeyVowels, kKeyWords, "key");
    return v;
}

// 8 to 14 words. key_share of them (on average) come from the key vocabulary.
std::string make_sentence(Rng& rng, double key_share) {
    const auto& filler = filler_vocabulary();
    const auto& key = key_vocabulary();
    const auto words = 8 + rng.below(7);
    std::string s;
    for (std::uint64_t i = 0; i < words; ++i) {
        const auto& vocab = rng.uniform() < key_share ? key : filler;
        std::string w = vocab[rng.below(vocab.size())];
        if (i == 0) w[0] = static_cast<char>(w[0] - 'a' + 'A');
        if (i > 0) s.push_back(' ');
        s += w;
    }
    s.push_back('.');
    return s;
}

std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (const auto& p : parts) {
        if (!out.empty()) out.push_back(' ');
        out += p;
    }
    return out;
}

}  // namespace

SynthProfile parse_synth_profile(std::string_view s) {
    if (s == "lead_biased") return SynthProfile::lead_biased;
    if (s == "scattered") return SynthProfile::scattered;
    throw ConfigError("unknown synthetic profile '" + std::string(s) + "' (expected lead_biased or scattered)");
}

std::string_view to_string(SynthProfile p) { return p == SynthProfile::lead_biased ? "lead_biased" : "scattered"; }

void SynthConfig::validate() const {
    if (documents == 0) throw ConfigError("gen-synth: documents must be positive");
    if (summary_sentences == 0) throw ConfigError("gen-synth: summary sentences must be positive");
    if (min_sentences < summary_sentences || max_sentences < min_sentences)
        throw ConfigError("gen-synth: need summary_sentences <= min_sentences <= max_sentences");
}

std::vector<SynthDoc> generate_synthetic(const SynthConfig& config) {
    config.validate();
    auto rng = Rng::derive(config.seed, std::string("synth:") + std::string(to_string(config.profile)));
    const bool scattered = config.profile == SynthProfile::scattered;

    std::vector<SynthDoc> docs;
    docs.reserve(config.documents);
    for (std::size_t d = 0; d < config.documents; ++d) {
        SynthDoc doc;
        const auto n = config.min_sentences + rng.below(config.max_sentences - config.min_sentences + 1);

        if (scattered) {
            std::vector<std::size_t> order(n);
            for (std::size_t i = 0; i < n; ++i) order[i] = i;
            rng.shuffle(order.begin(), order.end());
            doc.planted.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(config.summary_sentences));
            std::sort(doc.planted.begin(), doc.planted.end());
        } else {
            for (std::size_t i = 0; i < config.summary_sentences; ++i) doc.planted.push_back(i);
        }

        std::vector<std::string> summary;
        for (std::size_t i = 0, p = 0; i < n; ++i) {
            const bool planted = p < doc.planted.size() && doc.planted[p] == i;
            doc.sentences.push_back(make_sentence(rng, planted && scattered ? 0.75 : 0.0));
            if (planted) {
                summary.push_back(doc.sentences.back());
                ++p;
            }
        }

        char id[32];
        std::snprintf(id, sizeof id, "synth-%06zu", d + 1);
        doc.record = NewsRecord{id, join(doc.sentences), join(summary), DensityBin::extractive};
        docs.push_back(std::move(doc));
    }
    return docs;
}

void write_synthetic(const std::filesystem::path& path, const std::vector<SynthDoc>& docs) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write synthetic corpus: " + path.string());
    for (const auto& d : docs) {
        const nlohmann::json j{{"id", d.record.doc_id},
                               {"text", d.record.text},
                               {"summary", d.record.summary},
                               {"density_bin", to_string(d.record.density_bin)}};
        out << j.dump() << '\n';
    }
    if (!out) throw DataError("write failed: " + path.string());
}

}  // namespace xsum
