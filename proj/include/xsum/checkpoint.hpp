#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "xsum/embed.hpp"
#include "xsum/model.hpp"
#include "xsum/train.hpp"

namespace xsum {

// Everything needed to rebuild a model's input rows from a prepared corpus.
struct FeatureSpec {
    FeatureSet set = FeatureSet::full;
    std::size_t embedding_dim = 0;
    EmbeddingSource source = EmbeddingSource::builtin_tfidf;
    PositionScaler scaler;
    std::uint64_t idf_fingerprint = 0;
    double label_threshold = 0.7;

    bool operator==(const FeatureSpec& o) const {
        return set == o.set && embedding_dim == o.embedding_dim && source == o.source &&
               scaler.mean == o.scaler.mean && scaler.stddev == o.scaler.stddev &&
               idf_fingerprint == o.idf_fingerprint && label_threshold == o.label_threshold;
    }
};

struct Checkpoint {
    Model model;
    FeatureSpec features;
    TrainConfig train_config;
};

// Rounds every parameter to float32 so the in-memory model equals what a
// checkpoint reload produces.
void round_to_float32(std::span<double> params);

// Container layout, little-endian:
//   "XSCK" | u8 version=1 | u32 manifest length | manifest (compact JSON)
//   | f32 weights, one blob per manifest section in order
// The manifest carries the model kind, architecture, feature spec, training
// configuration, and the named section table (name, rows, cols, offset).
std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace xsum
