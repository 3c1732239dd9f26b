#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "xsum/checkpoint.hpp"
#include "xsum/corpus.hpp"
#include "xsum/embed.hpp"
#include "xsum/eval.hpp"
#include "xsum/labeling.hpp"
#include "xsum/summarize.hpp"
#include "xsum/train.hpp"

namespace xsum {

namespace fs = std::filesystem;

// File names inside a prepared directory.
inline constexpr std::string_view kSegmentedFile = "segmented.jsonl";
inline constexpr std::string_view kEmbeddingsFile = "embeddings.xsem";
inline constexpr std::string_view kIdfFile = "idf.json";
inline constexpr std::string_view kLabelsFile = "labels.jsonl";
inline constexpr std::string_view kStatsFile = "stats.json";

// Which vectors the labeler compares: the sentence embeddings themselves, or
// exact (unhashed) TF-IDF token vectors.
enum class LabelVectors { embedding, tfidf };

LabelVectors parse_label_vectors(std::string_view s);
std::string_view to_string(LabelVectors v);

enum class Split { train, test, all };

Split parse_split(std::string_view s);
std::string_view to_string(Split s);

struct PrepareOptions {
    fs::path corpus;
    fs::path out_dir;
    std::optional<fs::path> embeddings;  // external XSEM file; built-in embedder otherwise
    LabelVectors label_vectors = LabelVectors::embedding;
    double theta = kDefaultLabelThreshold;
    std::size_t dim = kDefaultEmbeddingDim;
    double test_fraction = 0.2;
    DensityFilter filter = DensityFilter::extractive_only;
    std::uint64_t seed = 1;

    void validate() const;
    nlohmann::json to_json() const;
};

struct PreparedDoc {
    SegmentedDoc doc;
    bool test = false;
    std::vector<LabeledSentence> labels;
};

struct PreparedData {
    std::vector<PreparedDoc> docs;
    EmbeddingTable embeddings;
    IdfTable idf;
    double theta = kDefaultLabelThreshold;
    LoadReport load;

    std::vector<const PreparedDoc*> select(Split split) const;
};

// Builds the prepared dataset in memory. Throws before anything is written.
PreparedData build_prepared(const PrepareOptions& options);

// Writes segmented.jsonl, embeddings.xsem, idf.json, labels.jsonl and
// stats.json. Each file is written to a temporary name and renamed once all
// of them are complete.
void write_prepared(const PreparedData& data, const PrepareOptions& options);

PreparedData prepare(const PrepareOptions& options);

// Reads a prepared directory back. Throws DataError naming the missing file.
PreparedData load_prepared(const fs::path& dir);

struct TrainOptions {
    fs::path prepared;
    fs::path checkpoint;  // output file
    Architecture arch;    // input_dim is filled in from the feature set
    FeatureSet features = FeatureSet::full;
    TrainConfig config;

    nlohmann::json to_json() const;
};

// Positions of every sentence in the training split.
PositionScaler fit_scaler(const PreparedData& data);

FeatureSpec feature_spec(const PreparedData& data, FeatureSet set);

LabeledSequence make_sequence(const PreparedDoc& doc, const EmbeddingTable& table, const FeatureSpec& spec);

// Trains on the training split and returns the checkpoint with parameters
// already rounded to float32.
struct TrainOutcome {
    Checkpoint checkpoint;
    TrainReport report;
};
TrainOutcome train_prepared(const PreparedData& data, Architecture arch, FeatureSet features,
                            const TrainConfig& config);

// Writes the checkpoint and a sibling <checkpoint>.report.json.
TrainOutcome train_command(const TrainOptions& options);

// Throws ConfigError when the checkpoint's feature space does not match the
// prepared data.
void check_compatible(const Checkpoint& ckpt, const PreparedData& data);

// Report label: architecture label plus " Bal" for class-balanced training
// and " Def" for embedding-only features.
std::string system_label(const Checkpoint& ckpt);

struct SystemOutput {
    std::string label;
    std::vector<SummaryResult> summaries;
    std::vector<DocPrediction> predictions;
};

SystemOutput run_lede3(const PreparedData& data, Split split);
SystemOutput run_model(const Checkpoint& ckpt, const PreparedData& data, Split split, const Selection& selection);

std::vector<DocGold> gold_for(const PreparedData& data, Split split);

struct CompareOptions {
    fs::path prepared;
    fs::path out_dir;
    std::vector<std::string> systems;  // "lede3" or checkpoint paths, in row order
    bool include_lede3 = true;         // prepend a LEDE3 row when systems lacks one
    Split split = Split::test;
    Selection selection;
};

// Scores every system and writes <stem>.json and <stem>.txt under out_dir.
std::vector<EvalReport> compare_command(const CompareOptions& options, std::string_view stem = "compare");

struct SummarizeOptions {
    fs::path prepared;
    fs::path out;  // JSONL output
    std::string method = "lede3";
    std::optional<fs::path> checkpoint;
    Split split = Split::test;
    Selection selection;
};

std::vector<SummaryResult> summarize_command(const SummarizeOptions& options);

}  // namespace xsum
