#include "xsum/corpus.hpp"

#include <array>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "xsum/common.hpp"

namespace xsum {

using nlohmann::json;

DensityBin parse_density_bin(std::string_view s) {
    if (s == "extractive") return DensityBin::extractive;
    if (s == "mixed") return DensityBin::mixed;
    if (s == "abstractive") return DensityBin::abstractive;
    return DensityBin::unknown;
}

std::string_view to_string(DensityBin bin) {
    switch (bin) {
        case DensityBin::extractive: return "extractive";
        case DensityBin::mixed: return "mixed";
        case DensityBin::abstractive: return "abstractive";
        case DensityBin::unknown: break;
    }
    return "unknown";
}

LoadReport& LoadReport::operator+=(const LoadReport& o) {
    lines += o.lines;
    yielded += o.yielded;
    filtered += o.filtered;
    malformed += o.malformed;
    empty += o.empty;
    return *this;
}

void to_json(json& j, const LoadReport& r) {
    j = json{{"lines", r.lines},
             {"yielded", r.yielded},
             {"filtered", r.filtered},
             {"malformed", r.malformed},
             {"empty", r.empty}};
}

bool parse_record(std::string_view line, std::size_t line_no, NewsRecord& out) {
    json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object()) return false;
    const auto text = j.find("text");
    const auto summary = j.find("summary");
    if (text == j.end() || summary == j.end() || !text->is_string() || !summary->is_string()) return false;

    out.text = text->get<std::string>();
    out.summary = summary->get<std::string>();
    out.density_bin = DensityBin::unknown;
    if (auto bin = j.find("density_bin"); bin != j.end()) {
        if (!bin->is_string()) return false;
        out.density_bin = parse_density_bin(bin->get<std::string>());
    }
    if (auto id = j.find("id"); id != j.end() && id->is_string() && !id->get<std::string>().empty()) {
        out.doc_id = id->get<std::string>();
    } else {
        char buf[32];
        std::snprintf(buf, sizeof buf, "line-%06zu", line_no);
        out.doc_id = buf;
    }
    return true;
}

LoadReport load_corpus(const std::filesystem::path& path, DensityFilter filter,
                       const std::function<void(NewsRecord&&)>& sink) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open corpus file: " + path.string());

    LoadReport report;
    std::unordered_set<std::string> seen;
    std::string line;
    while (std::getline(in, line)) {
        ++report.lines;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) {
            ++report.empty;
            continue;
        }

        NewsRecord rec;
        if (!parse_record(line, report.lines, rec) || !seen.insert(rec.doc_id).second) {
            ++report.malformed;
            continue;
        }
        if (filter == DensityFilter::extractive_only && rec.density_bin != DensityBin::extractive) {
            ++report.filtered;
            continue;
        }
        if (trim(rec.text).empty() || trim(rec.summary).empty()) {
            ++report.empty;
            continue;
        }
        ++report.yielded;
        sink(std::move(rec));
    }
    if (in.bad()) throw DataError("read error in corpus file: " + path.string());
    return report;
}

std::vector<NewsRecord> load_corpus(const std::filesystem::path& path, DensityFilter filter,
                                    LoadReport* report) {
    std::vector<NewsRecord> out;
    auto r = load_corpus(path, filter, [&](NewsRecord&& rec) { out.push_back(std::move(rec)); });
    if (report) *report = r;
    return out;
}

void to_json(json& j, const SegmentedDoc& d) {
    j = json{{"doc_id", d.doc_id}, {"sentences", d.sentences}, {"summary_sentences", d.summary_sentences}};
}

void from_json(const json& j, SegmentedDoc& d) {
    j.at("doc_id").get_to(d.doc_id);
    j.at("sentences").get_to(d.sentences);
    j.at("summary_sentences").get_to(d.summary_sentences);
}

// ---------------------------------------------------------------------------
// Segmenter

namespace {

constexpr std::array<std::string_view, 18> kAbbreviations = {
    "Dr.",  "Mr.",  "Mrs.", "Ms.",  "St.",  "U.S.", "Jan.", "Feb.", "Mar.",
    "Apr.", "Jun.", "Jul.", "Aug.", "Sep.", "Sept.", "Oct.", "Nov.", "Dec.",
};

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

// Length in bytes of a closing quote/bracket at `pos`, 0 if none.
std::size_t closer_len(std::string_view t, std::size_t pos) {
    const char c = t[pos];
    if (c == '"' || c == '\'' || c == ')' || c == ']') return 1;
    // U+201D and U+2019 (right double/single quotation marks).
    if (pos + 2 < t.size() && static_cast<unsigned char>(c) == 0xE2 &&
        static_cast<unsigned char>(t[pos + 1]) == 0x80) {
        const auto c2 = static_cast<unsigned char>(t[pos + 2]);
        if (c2 == 0x9D || c2 == 0x99) return 3;
    }
    return 0;
}

// True when the character at `pos` may begin a new sentence.
bool starts_sentence(std::string_view t, std::size_t pos) {
    const auto c = static_cast<unsigned char>(t[pos]);
    if (std::isupper(c) || std::isdigit(c)) return true;
    if (c == '"' || c == '\'' || c == '(' || c == '[') return true;
    // U+201C and U+2018 (left double/single quotation marks).
    if (c == 0xE2 && pos + 2 < t.size() && static_cast<unsigned char>(t[pos + 1]) == 0x80) {
        const auto c2 = static_cast<unsigned char>(t[pos + 2]);
        return c2 == 0x9C || c2 == 0x98;
    }
    return false;
}

// The whitespace-delimited word ending at `end` (inclusive), stripped of
// leading opening punctuation.
std::string_view word_ending_at(std::string_view t, std::size_t end) {
    std::size_t b = end;
    while (b > 0 && !is_space(t[b - 1])) --b;
    while (b < end && (t[b] == '"' || t[b] == '\'' || t[b] == '(' || t[b] == '[')) ++b;
    return t.substr(b, end - b + 1);
}

void emit(std::vector<std::string>& out, std::string_view piece) {
    auto s = trim(piece);
    if (!s.empty()) out.push_back(std::move(s));
}

}  // namespace

bool is_abbreviation(std::string_view word) {
    for (auto a : kAbbreviations)
        if (word == a) return true;
    return word.size() == 2 && std::isupper(static_cast<unsigned char>(word[0])) && word[1] == '.';
}

std::vector<std::string> segment_text(std::string_view text) {
    std::vector<std::string> out;
    const std::size_t n = text.size();
    std::size_t start = 0;
    std::size_t i = 0;
    while (i < n) {
        if (!is_terminator(text[i])) {
            ++i;
            continue;
        }
        std::size_t j = i + 1;
        while (j < n && is_terminator(text[j])) ++j;
        const bool single_period = text[i] == '.' && j == i + 1;
        while (j < n) {
            const auto len = closer_len(text, j);
            if (len == 0) break;
            j += len;
        }
        if (j >= n || !is_space(text[j])) {
            i = j;
            continue;
        }
        std::size_t k = j;
        while (k < n && is_space(text[k])) ++k;
        if (k >= n || !starts_sentence(text, k) ||
            (single_period && is_abbreviation(word_ending_at(text, i)))) {
            i = j;
            continue;
        }
        emit(out, text.substr(start, j - start));
        start = k;
        i = k;
    }
    if (start < n) emit(out, text.substr(start));
    return out;
}

SegmentedDoc segment(const NewsRecord& record) {
    return SegmentedDoc{record.doc_id, segment_text(record.text), segment_text(record.summary)};
}

}  // namespace xsum
