#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace xsum {

enum class DensityBin { extractive, mixed, abstractive, unknown };

DensityBin parse_density_bin(std::string_view s);
std::string_view to_string(DensityBin bin);

// `extractive_only` admits records whose density_bin is "extractive";
// `none` admits every well-formed record, including unknown bins.
enum class DensityFilter { extractive_only, none };

struct NewsRecord {
    std::string doc_id;
    std::string text;
    std::string summary;
    DensityBin density_bin = DensityBin::unknown;
};

// Per-file accounting. Every physical line lands in exactly one bucket, so
// yielded + filtered + malformed + empty == lines.
struct LoadReport {
    std::size_t lines = 0;
    std::size_t yielded = 0;
    std::size_t filtered = 0;   // well-formed, rejected by the density filter
    std::size_t malformed = 0;  // unparsable, missing/ill-typed fields, duplicate id
    std::size_t empty = 0;      // blank line, or article/summary empty after trimming

    LoadReport& operator+=(const LoadReport& other);
    bool operator==(const LoadReport&) const = default;
};

void to_json(nlohmann::json& j, const LoadReport& r);

// Streams admitted records to `sink` in file order. The doc id is the
// record's "id" string when present, otherwise derived from the 1-based line
// number. Throws DataError if the file cannot be opened.
LoadReport load_corpus(const std::filesystem::path& path, DensityFilter filter,
                       const std::function<void(NewsRecord&&)>& sink);

std::vector<NewsRecord> load_corpus(const std::filesystem::path& path, DensityFilter filter,
                                    LoadReport* report = nullptr);

// Parses one JSON-Lines record. Returns false for malformed input.
bool parse_record(std::string_view line, std::size_t line_no, NewsRecord& out);

struct SegmentedDoc {
    std::string doc_id;
    std::vector<std::string> sentences;
    std::vector<std::string> summary_sentences;

    bool operator==(const SegmentedDoc&) const = default;
};

void to_json(nlohmann::json& j, const SegmentedDoc& d);
void from_json(const nlohmann::json& j, SegmentedDoc& d);

// Rule-based sentence splitter.
//
// A boundary is placed after a run of terminators (. ! ?) and any closing
// quotes or brackets when it is followed by whitespace and then an uppercase
// letter, a digit, or an opening quote/bracket. A single period does not end
// a sentence when the word it closes is a known abbreviation (Dr. Mr. Mrs.
// Ms. St. U.S. and month forms) or a lone capital initial. Sentences are
// trimmed and never empty; text without any boundary is one sentence.
std::vector<std::string> segment_text(std::string_view text);

bool is_abbreviation(std::string_view word);

SegmentedDoc segment(const NewsRecord& record);

}  // namespace xsum
