#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "xsum/linalg.hpp"

namespace xsum {

// Lowercased runs of ASCII letters/digits. Bytes >= 0x80 are treated as word
// characters so UTF-8 words stay whole. Shared by the embedder and ROUGE.
std::vector<std::string> tokenize(std::string_view text);

// Smoothed inverse document frequency:
//   idf(t) = ln((1 + N) / (1 + df(t))) + 1
// Tokens never seen get df = 0.
class IdfTable {
public:
    IdfTable() = default;

    // Each element of `documents` is the full token stream of one document;
    // df counts documents containing the token at least once.
    static IdfTable build(const std::vector<std::vector<std::string>>& documents);

    double idf(std::string_view token) const;
    std::size_t document_count() const { return n_docs_; }
    std::size_t vocabulary_size() const { return df_.size(); }
    // Content hash; checkpoints record it to pin the feature space.
    std::uint64_t fingerprint() const;

    friend void to_json(nlohmann::json& j, const IdfTable& t);
    friend void from_json(const nlohmann::json& j, IdfTable& t);

private:
    std::size_t n_docs_ = 0;
    std::map<std::string, std::uint32_t, std::less<>> df_;
};

inline constexpr std::size_t kDefaultEmbeddingDim = 256;
inline constexpr std::size_t kMinEmbeddingDim = 8;

// Hashed TF-IDF bag of words, L2-normalized. Each token contributes
// sign(t) * tf(t) * idf(t) to bucket h(t) mod dim, with bucket and sign
// drawn from two independently seeded hashes. Token-free input gives the
// zero vector.
std::vector<double> embed_builtin(std::string_view sentence, std::size_t dim, const IdfTable& idf);

enum class EmbeddingSource : std::uint8_t { builtin_tfidf, external_file };

// Sentence vectors keyed by (doc_id, sentence index). Values are held as
// float32, matching the on-disk representation.
class EmbeddingTable {
public:
    EmbeddingTable() = default;
    EmbeddingTable(std::size_t dim, EmbeddingSource source) : dim_(dim), source_(source) {}

    std::size_t dim() const { return dim_; }
    EmbeddingSource source() const { return source_; }
    std::size_t size() const;

    void put(const std::string& doc_id, std::uint32_t index, std::span<const double> values);
    void put(const std::string& doc_id, std::uint32_t index, std::vector<float> values);
    // nullptr when the row is absent.
    const std::vector<float>* find(std::string_view doc_id, std::uint32_t index) const;
    // All rows for one document, in index order; throws DataError naming the
    // first missing index.
    std::vector<std::vector<double>> document(const std::string& doc_id, std::size_t count) const;

    const std::map<std::string, std::map<std::uint32_t, std::vector<float>>, std::less<>>& rows() const {
        return rows_;
    }

    bool operator==(const EmbeddingTable& o) const { return dim_ == o.dim_ && rows_ == o.rows_; }

private:
    std::size_t dim_ = 0;
    EmbeddingSource source_ = EmbeddingSource::builtin_tfidf;
    std::map<std::string, std::map<std::uint32_t, std::vector<float>>, std::less<>> rows_;
};

// Summary sentences share the table with article sentences under this key.
std::string summary_key(std::string_view doc_id);

// Binary embedding file, little-endian:
//   "XSEM" | u8 version=1 | u32 dim | u32 record count
//   record: u16 id length | id bytes | u32 sentence index | dim x f32
// Records are sorted by (doc_id bytes, sentence index).
void save_embeddings(const std::filesystem::path& path, const EmbeddingTable& table);
std::vector<std::uint8_t> encode_embeddings(const EmbeddingTable& table);
EmbeddingTable load_embeddings(const std::filesystem::path& path);
EmbeddingTable decode_embeddings(std::span<const std::uint8_t> bytes);

struct FeatureVector {
    std::vector<double> embedding;
    std::size_t abs_position = 0;
    double rel_position = 0.0;
    std::vector<double> doc_context;
};

// One feature vector per sentence; doc_context is the arithmetic mean of the
// document's sentence embeddings.
std::vector<FeatureVector> featurize(const std::vector<std::vector<double>>& sentence_embeddings);
std::vector<FeatureVector> featurize(const std::string& doc_id, std::size_t sentence_count,
                                     const EmbeddingTable& table);

enum class FeatureSet : std::uint8_t { full, embedding_only };

// Standardizes abs_position with constants fitted on the training split.
struct PositionScaler {
    double mean = 0.0;
    double stddev = 1.0;

    static PositionScaler fit(std::span<const std::size_t> positions);
    double apply(std::size_t position) const { return (static_cast<double>(position) - mean) / stddev; }
};

std::size_t feature_width(FeatureSet set, std::size_t embedding_dim);

// Row t = [embedding | standardized abs_position | rel_position | doc_context]
// for FeatureSet::full, or just the embedding for embedding_only.
Matrix feature_matrix(std::span<const FeatureVector> features, FeatureSet set, const PositionScaler& scaler);

}  // namespace xsum
