#include "xsum/embed.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>
#include <unordered_map>

#include "xsum/common.hpp"

namespace xsum {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c >= 0x80) {
            cur.push_back(ch);
        } else if (c >= 'A' && c <= 'Z') {
            cur.push_back(static_cast<char>(c - 'A' + 'a'));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

// ---------------------------------------------------------------------------
// IDF

IdfTable IdfTable::build(const std::vector<std::vector<std::string>>& documents) {
    IdfTable t;
    t.n_docs_ = documents.size();
    for (const auto& doc : documents) {
        std::set<std::string_view> uniq(doc.begin(), doc.end());
        for (auto tok : uniq) {
            auto it = t.df_.find(tok);
            if (it == t.df_.end())
                t.df_.emplace(std::string(tok), 1u);
            else
                ++it->second;
        }
    }
    return t;
}

double IdfTable::idf(std::string_view token) const {
    const auto it = df_.find(token);
    const double df = it == df_.end() ? 0.0 : static_cast<double>(it->second);
    return std::log((1.0 + static_cast<double>(n_docs_)) / (1.0 + df)) + 1.0;
}

std::uint64_t IdfTable::fingerprint() const {
    std::string buf = std::to_string(n_docs_);
    for (const auto& [tok, df] : df_) {
        buf.push_back('\n');
        buf += tok;
        buf.push_back('\t');
        buf += std::to_string(df);
    }
    return fnv1a64(buf);
}

void to_json(json& j, const IdfTable& t) {
    j = json{{"documents", t.n_docs_}, {"df", t.df_}};
}

void from_json(const json& j, IdfTable& t) {
    j.at("documents").get_to(t.n_docs_);
    t.df_.clear();
    for (const auto& [tok, df] : j.at("df").items()) t.df_.emplace(tok, df.get<std::uint32_t>());
}

// ---------------------------------------------------------------------------
// Built-in embedder

namespace {
constexpr std::uint64_t kBucketSeed = 0x6275636b6574ULL;  // "bucket"
constexpr std::uint64_t kSignSeed = 0x7369676eULL;        // "sign"
}  // namespace

std::vector<double> embed_builtin(std::string_view sentence, std::size_t dim, const IdfTable& idf) {
    if (dim < kMinEmbeddingDim) throw ConfigError("embedding dimension must be >= 8");
    std::vector<double> v(dim, 0.0);

    std::unordered_map<std::string, int> tf;
    for (auto& tok : tokenize(sentence)) ++tf[std::move(tok)];
    // Accumulate in a fixed token order so the float sum is reproducible.
    std::vector<std::pair<std::string_view, int>> terms(tf.begin(), tf.end());
    std::sort(terms.begin(), terms.end());
    for (const auto& [tok, count] : terms) {
        const auto bucket = fnv1a64(tok, kBucketSeed) % dim;
        const double sign = (fnv1a64(tok, kSignSeed) & 1u) ? 1.0 : -1.0;
        v[bucket] += sign * count * idf.idf(tok);
    }

    double norm = 0.0;
    for (double x : v) norm += x * x;
    if (norm > 0.0) {
        norm = std::sqrt(norm);
        for (double& x : v) x /= norm;
    }
    return v;
}

// ---------------------------------------------------------------------------
// Embedding table

std::size_t EmbeddingTable::size() const {
    std::size_t n = 0;
    for (const auto& [id, doc] : rows_) n += doc.size();
    return n;
}

void EmbeddingTable::put(const std::string& doc_id, std::uint32_t index, std::span<const double> values) {
    std::vector<float> f(values.size());
    std::transform(values.begin(), values.end(), f.begin(), [](double x) { return static_cast<float>(x); });
    put(doc_id, index, std::move(f));
}

void EmbeddingTable::put(const std::string& doc_id, std::uint32_t index, std::vector<float> values) {
    if (values.size() != dim_)
        throw DataError("embedding for " + doc_id + "[" + std::to_string(index) + "] has dimension " +
                        std::to_string(values.size()) + ", expected " + std::to_string(dim_));
    rows_[doc_id][index] = std::move(values);
}

const std::vector<float>* EmbeddingTable::find(std::string_view doc_id, std::uint32_t index) const {
    const auto d = rows_.find(doc_id);
    if (d == rows_.end()) return nullptr;
    const auto r = d->second.find(index);
    return r == d->second.end() ? nullptr : &r->second;
}

std::vector<std::vector<double>> EmbeddingTable::document(const std::string& doc_id, std::size_t count) const {
    std::vector<std::vector<double>> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const auto* row = find(doc_id, static_cast<std::uint32_t>(i));
        if (!row) throw DataError("missing embedding row: doc_id=" + doc_id + " index=" + std::to_string(i));
        out.emplace_back(row->begin(), row->end());
    }
    return out;
}

std::string summary_key(std::string_view doc_id) { return std::string(doc_id) + "#summary"; }

// ---------------------------------------------------------------------------
// Binary format

namespace {

constexpr char kMagic[4] = {'X', 'S', 'E', 'M'};
constexpr std::uint8_t kVersion = 1;

template <class T>
void put_le(std::vector<std::uint8_t>& out, T value) {
    std::uint8_t buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    out.insert(out.end(), buf, buf + sizeof(T));
}

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    bool has(std::size_t n) const { return bytes_.size() - pos_ >= n; }
    std::size_t remaining() const { return bytes_.size() - pos_; }

    template <class T>
    T get() {
        T v;
        std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }
    std::string_view take(std::size_t n) {
        std::string_view s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
        pos_ += n;
        return s;
    }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_embeddings(const EmbeddingTable& table) {
    std::vector<std::uint8_t> out(kMagic, kMagic + 4);
    put_le<std::uint8_t>(out, kVersion);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(table.dim()));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(table.size()));
    // std::map orders keys bytewise, which is the required record order.
    for (const auto& [id, doc] : table.rows()) {
        if (id.size() > 0xFFFF) throw DataError("doc_id too long for embedding file: " + id.substr(0, 64));
        for (const auto& [index, values] : doc) {
            put_le<std::uint16_t>(out, static_cast<std::uint16_t>(id.size()));
            out.insert(out.end(), id.begin(), id.end());
            put_le<std::uint32_t>(out, index);
            for (float v : values) put_le<float>(out, v);
        }
    }
    return out;
}

void save_embeddings(const std::filesystem::path& path, const EmbeddingTable& table) {
    const auto bytes = encode_embeddings(table);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write embedding file: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("write failed: " + path.string());
}

EmbeddingTable decode_embeddings(std::span<const std::uint8_t> bytes) {
    Reader in(bytes);
    if (!in.has(13) || std::memcmp(bytes.data(), kMagic, 4) != 0) throw DataError("embedding file: bad magic");
    in.take(4);
    if (const auto v = in.get<std::uint8_t>(); v != kVersion)
        throw DataError("embedding file: unsupported version " + std::to_string(v));
    const auto dim = in.get<std::uint32_t>();
    const auto count = in.get<std::uint32_t>();
    if (dim == 0) throw DataError("embedding file: zero dimension");

    EmbeddingTable table(dim, EmbeddingSource::external_file);
    std::string prev_id;
    std::int64_t prev_index = -1;
    const std::size_t payload = std::size_t{dim} * sizeof(float);
    for (std::uint32_t r = 0; r < count; ++r) {
        if (!in.has(2)) throw DataError("embedding file: row count mismatch (header " + std::to_string(count) +
                                        ", found " + std::to_string(r) + ")");
        const auto len = in.get<std::uint16_t>();
        if (!in.has(len + 4 + payload))
            throw DataError("embedding file: row count mismatch (header " + std::to_string(count) + ", found " +
                            std::to_string(r) + ")");
        std::string id(in.take(len));
        const auto index = in.get<std::uint32_t>();
        if (r > 0 && (id < prev_id || (id == prev_id && static_cast<std::int64_t>(index) <= prev_index)))
            throw DataError("embedding file: records out of order at " + id + "[" + std::to_string(index) + "]");
        std::vector<float> values(dim);
        for (auto& v : values) {
            v = in.get<float>();
            if (!std::isfinite(v))
                throw DataError("embedding file: non-finite value in " + id + "[" + std::to_string(index) + "]");
        }
        table.put(id, index, std::move(values));
        prev_id = std::move(id);
        prev_index = index;
    }
    if (in.remaining() != 0)
        throw DataError("embedding file: row count mismatch (trailing bytes after " + std::to_string(count) +
                        " records)");
    return table;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open embedding file: " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_embeddings(bytes);
}

// ---------------------------------------------------------------------------
// Features

std::vector<FeatureVector> featurize(const std::vector<std::vector<double>>& sentence_embeddings) {
    const std::size_t n = sentence_embeddings.size();
    if (n == 0) return {};
    const std::size_t dim = sentence_embeddings.front().size();

    std::vector<double> context(dim, 0.0);
    for (const auto& e : sentence_embeddings) {
        if (e.size() != dim) throw DataError("featurize: inconsistent embedding dimensions");
        for (std::size_t k = 0; k < dim; ++k) context[k] += e[k];
    }
    for (double& c : context) c /= static_cast<double>(n);

    const double denom = static_cast<double>(std::max<std::size_t>(1, n - 1));
    std::vector<FeatureVector> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i].embedding = sentence_embeddings[i];
        out[i].abs_position = i;
        out[i].rel_position = static_cast<double>(i) / denom;
        out[i].doc_context = context;
    }
    return out;
}

std::vector<FeatureVector> featurize(const std::string& doc_id, std::size_t sentence_count,
                                     const EmbeddingTable& table) {
    return featurize(table.document(doc_id, sentence_count));
}

PositionScaler PositionScaler::fit(std::span<const std::size_t> positions) {
    PositionScaler s;
    if (positions.empty()) return s;
    double sum = 0.0;
    for (auto p : positions) sum += static_cast<double>(p);
    s.mean = sum / static_cast<double>(positions.size());
    double var = 0.0;
    for (auto p : positions) {
        const double d = static_cast<double>(p) - s.mean;
        var += d * d;
    }
    var /= static_cast<double>(positions.size());
    s.stddev = var > 0.0 ? std::sqrt(var) : 1.0;
    return s;
}

std::size_t feature_width(FeatureSet set, std::size_t embedding_dim) {
    return set == FeatureSet::full ? 2 * embedding_dim + 2 : embedding_dim;
}

Matrix feature_matrix(std::span<const FeatureVector> features, FeatureSet set, const PositionScaler& scaler) {
    if (features.empty()) return {};
    const std::size_t dim = features.front().embedding.size();
    Matrix m(features.size(), feature_width(set, dim));
    for (std::size_t t = 0; t < features.size(); ++t) {
        const auto& f = features[t];
        auto row = m.row(t);
        std::copy(f.embedding.begin(), f.embedding.end(), row.begin());
        if (set == FeatureSet::full) {
            row[dim] = scaler.apply(f.abs_position);
            row[dim + 1] = f.rel_position;
            std::copy(f.doc_context.begin(), f.doc_context.end(), row.begin() + static_cast<std::ptrdiff_t>(dim + 2));
        }
    }
    return m;
}

}  // namespace xsum
