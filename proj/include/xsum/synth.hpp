#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "xsum/corpus.hpp"

namespace xsum {

// lead_biased: the summary is the first three article sentences.
// scattered: the summary sentences sit at uniformly random positions and are
// written mostly in a key vocabulary that filler sentences never use.
enum class SynthProfile { lead_biased, scattered };

SynthProfile parse_synth_profile(std::string_view s);
std::string_view to_string(SynthProfile p);

struct SynthConfig {
    SynthProfile profile = SynthProfile::scattered;
    std::size_t documents = 200;
    std::size_t min_sentences = 10;
    std::size_t max_sentences = 20;
    std::size_t summary_sentences = 3;
    std::uint64_t seed = 1;

    void validate() const;
};

struct SynthDoc {
    NewsRecord record;
    std::vector<std::size_t> planted;  // article positions of the summary sentences, ascending
    std::vector<std::string> sentences;
};

// Deterministic in the config. Summary sentences are copied verbatim into the
// article; every record carries density_bin "extractive".
std::vector<SynthDoc> generate_synthetic(const SynthConfig& config);

// One JSON object per line with keys id, text, summary, density_bin.
void write_synthetic(const std::filesystem::path& path, const std::vector<SynthDoc>& docs);

}  // namespace xsum
