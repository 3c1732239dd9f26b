#include "xsum/checkpoint.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace xsum {

using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'X', 'S', 'C', 'K'};
constexpr std::uint8_t kVersion = 1;

std::string_view to_string(FeatureSet s) { return s == FeatureSet::full ? "full" : "embedding-only"; }
std::string_view to_string(EmbeddingSource s) {
    return s == EmbeddingSource::builtin_tfidf ? "builtin_tfidf" : "external_file";
}

json manifest_of(const Checkpoint& c) {
    json sections = json::array();
    for (const auto& s : c.model.layout().sections())
        sections.push_back({{"name", s.name}, {"rows", s.rows}, {"cols", s.cols}, {"offset", s.offset}});
    const auto& f = c.features;
    return json{{"format", "xsum-checkpoint"},
                {"kind", to_string(c.model.architecture().kind)},
                {"architecture", c.model.architecture()},
                {"features",
                 {{"set", to_string(f.set)},
                  {"embedding_dim", f.embedding_dim},
                  {"source", to_string(f.source)},
                  {"position_mean", f.scaler.mean},
                  {"position_std", f.scaler.stddev},
                  {"idf_fingerprint", hex64(f.idf_fingerprint)},
                  {"label_threshold", f.label_threshold}}},
                {"train_config", c.train_config},
                {"sections", sections}};
}

}  // namespace

void round_to_float32(std::span<double> params) {
    for (double& p : params) p = static_cast<double>(static_cast<float>(p));
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
    const std::string manifest = manifest_of(ckpt).dump();
    std::vector<std::uint8_t> out(kMagic, kMagic + 4);
    out.push_back(kVersion);
    const auto len = static_cast<std::uint32_t>(manifest.size());
    const auto* lp = reinterpret_cast<const std::uint8_t*>(&len);
    out.insert(out.end(), lp, lp + 4);
    out.insert(out.end(), manifest.begin(), manifest.end());
    const auto params = ckpt.model.params();
    const std::size_t base = out.size();
    out.resize(base + params.size() * sizeof(float));
    for (std::size_t k = 0; k < params.size(); ++k) {
        const float f = static_cast<float>(params[k]);
        std::memcpy(out.data() + base + k * sizeof(float), &f, sizeof(float));
    }
    return out;
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 9 || std::memcmp(bytes.data(), kMagic, 4) != 0) throw DataError("checkpoint: bad magic");
    if (bytes[4] != kVersion) throw DataError("checkpoint: unsupported version " + std::to_string(bytes[4]));
    std::uint32_t len;
    std::memcpy(&len, bytes.data() + 5, 4);
    if (bytes.size() < 9 + std::size_t{len}) throw DataError("checkpoint: truncated manifest");
    const json m = json::parse(bytes.begin() + 9, bytes.begin() + 9 + len, nullptr, false);
    if (m.is_discarded() || !m.is_object()) throw DataError("checkpoint: manifest is not valid JSON");

    Checkpoint c;
    try {
        c.model = Model(m.at("architecture").get<Architecture>());
        const auto& f = m.at("features");
        const auto set = f.at("set").get<std::string>();
        c.features.set = set == "full" ? FeatureSet::full : FeatureSet::embedding_only;
        f.at("embedding_dim").get_to(c.features.embedding_dim);
        c.features.source = f.at("source").get<std::string>() == "external_file" ? EmbeddingSource::external_file
                                                                                  : EmbeddingSource::builtin_tfidf;
        f.at("position_mean").get_to(c.features.scaler.mean);
        f.at("position_std").get_to(c.features.scaler.stddev);
        c.features.idf_fingerprint = std::stoull(f.at("idf_fingerprint").get<std::string>(), nullptr, 16);
        f.at("label_threshold").get_to(c.features.label_threshold);
        c.train_config = m.at("train_config").get<TrainConfig>();

        const auto& sections = m.at("sections");
        const auto& expected = c.model.layout().sections();
        if (sections.size() != expected.size()) throw DataError("checkpoint: section table does not match model");
        for (std::size_t i = 0; i < expected.size(); ++i) {
            const ParamSection got{sections[i].at("name").get<std::string>(), sections[i].at("offset").get<std::size_t>(),
                                   sections[i].at("rows").get<std::size_t>(), sections[i].at("cols").get<std::size_t>()};
            if (!(got == expected[i])) throw DataError("checkpoint: section '" + got.name + "' does not match model");
        }
    } catch (const json::exception& e) {
        throw DataError(std::string("checkpoint: malformed manifest: ") + e.what());
    }

    auto params = c.model.params();
    const std::size_t base = 9 + std::size_t{len};
    if (bytes.size() - base != params.size() * sizeof(float))
        throw DataError("checkpoint: weight blob has " + std::to_string(bytes.size() - base) + " bytes, expected " +
                        std::to_string(params.size() * sizeof(float)));
    for (std::size_t k = 0; k < params.size(); ++k) {
        float f;
        std::memcpy(&f, bytes.data() + base + k * sizeof(float), sizeof(float));
        if (!std::isfinite(f)) throw DataError("checkpoint: non-finite weight");
        params[k] = f;
    }
    return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    const auto bytes = encode_checkpoint(ckpt);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write checkpoint: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint: " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_checkpoint(bytes);
}

}  // namespace xsum
