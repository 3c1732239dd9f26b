#include <doctest.h>

#include <fstream>
#include <map>

#include "support.hpp"
#include "xsum/pipeline.hpp"

using namespace xsum;
using xsum::testing::fixture;
using xsum::testing::read_file;
using xsum::testing::TempDir;

namespace {

std::size_t count_lines(const fs::path& p) {
    std::ifstream in(p);
    std::size_t n = 0;
    std::string line;
    while (std::getline(in, line)) ++n;
    return n;
}

PrepareOptions mini_options(const fs::path& out) {
    PrepareOptions o;
    o.corpus = fixture("mini_corpus.jsonl");
    o.out_dir = out;
    o.dim = 64;
    return o;
}

const std::vector<std::string> kPreparedFiles{"segmented.jsonl", "embeddings.xsem", "idf.json", "labels.jsonl",
                                              "stats.json"};

}  // namespace

TEST_CASE("prepare on the mini corpus yields every record") {
    TempDir dir("prep");
    const auto data = prepare(mini_options(dir.path()));
    const auto lines = count_lines(fixture("mini_corpus.jsonl"));
    CHECK(data.docs.size() == 50);
    CHECK(data.load.lines == lines);
    CHECK(data.load.yielded == 50);
    for (const auto& f : kPreparedFiles) CHECK(fs::exists(dir / f));
    CHECK(count_lines(dir / "segmented.jsonl") == 50);

    const auto stats = nlohmann::json::parse(read_file(dir / "stats.json"));
    CHECK(stats.at("documents") == 50);
    CHECK(stats.at("test_documents") == 10);
    CHECK(stats.at("config").at("theta") == 0.7);
    CHECK(stats.at("sentence_counts").size() == 50);
    const double rate = stats.at("positive_rate");
    CHECK(rate > 0.0);
    CHECK(rate < 1.0);
    CHECK(data.idf.document_count() == 40);

    // Every summary sentence is verbatim in its article, so some sentence in
    // each document is labeled positive.
    for (const auto& d : data.docs) {
        bool any = false;
        for (const auto& l : d.labels) any = any || l.label == 1;
        CHECK(any);
    }
}

TEST_CASE("prepare reruns are byte identical and load back equal") {
    TempDir a("prep-a"), b("prep-b");
    prepare(mini_options(a.path()));
    prepare(mini_options(b.path()));
    for (const auto& f : kPreparedFiles) {
        CAPTURE(f);
        CHECK(read_file(a / f) == read_file(b / f));
    }
    const auto loaded = load_prepared(a.path());
    const auto fresh = build_prepared(mini_options(a.path()));
    REQUIRE(loaded.docs.size() == fresh.docs.size());
    for (std::size_t i = 0; i < loaded.docs.size(); ++i) {
        CHECK(loaded.docs[i].doc == fresh.docs[i].doc);
        CHECK(loaded.docs[i].test == fresh.docs[i].test);
        CHECK(loaded.docs[i].labels == fresh.docs[i].labels);
    }
    CHECK(loaded.embeddings == fresh.embeddings);
    CHECK(loaded.idf.fingerprint() == fresh.idf.fingerprint());
}

TEST_CASE("segmented corpus lines carry what an external encoder needs") {
    TempDir dir("seg");
    prepare(mini_options(dir.path()));
    std::ifstream in(dir / "segmented.jsonl");
    std::string line;
    std::size_t total = 0, test_docs = 0;
    while (std::getline(in, line)) {
        const auto j = nlohmann::json::parse(line);
        REQUIRE(j.at("doc_id").is_string());
        REQUIRE(j.at("sentences").is_array());
        REQUIRE(j.at("summary_sentences").is_array());
        CHECK_FALSE(j.at("sentences").empty());
        for (const auto& s : j.at("sentences")) CHECK(s.is_string());
        const std::string split = j.at("split");
        CHECK((split == "train" || split == "test"));
        test_docs += split == "test";
        total += j.at("sentences").size() + j.at("summary_sentences").size();
    }
    CHECK(test_docs == 10);

    // The embedding file holds one record per segmented sentence, summaries included.
    const auto xsem = read_file(dir / "embeddings.xsem");
    REQUIRE(xsem.size() > 13);
    CHECK(xsem.substr(0, 4) == "XSEM");
    std::uint32_t count = 0;
    for (int b = 0; b < 4; ++b) count |= static_cast<std::uint32_t>(static_cast<unsigned char>(xsem[9 + b])) << (8 * b);
    CHECK(count == total);
}

TEST_CASE("the split depends on the seed") {
    TempDir dir("seed");
    auto o = mini_options(dir.path());
    const auto a = build_prepared(o);
    o.seed = 99;
    const auto b = build_prepared(o);
    bool differs = false;
    for (std::size_t i = 0; i < a.docs.size(); ++i) differs = differs || a.docs[i].test != b.docs[i].test;
    CHECK(differs);
}

TEST_CASE("an empty corpus fails without writing outputs") {
    TempDir dir("empty");
    xsum::testing::write_file(dir / "empty.jsonl", "\n\n");
    auto o = mini_options(dir / "out");
    o.corpus = dir / "empty.jsonl";
    CHECK_THROWS_AS(prepare(o), DataError);
    CHECK_FALSE(fs::exists(dir / "out"));
}

TEST_CASE("prepare validates options before work starts") {
    TempDir dir("opts");
    auto o = mini_options(dir.path());
    o.theta = 2.0;
    CHECK_THROWS_AS(build_prepared(o), ConfigError);
    o = mini_options(dir.path());
    o.dim = 4;
    CHECK_THROWS_AS(build_prepared(o), ConfigError);
    o = mini_options(dir.path());
    o.corpus = dir / "missing.jsonl";
    CHECK_THROWS_AS(build_prepared(o), DataError);
    o = mini_options(dir.path());
    o.embeddings = dir / "missing.xsem";
    CHECK_THROWS_AS(build_prepared(o), DataError);
}

TEST_CASE("external embeddings are used as given and checked for coverage") {
    TempDir dir("ext");
    const auto base = prepare(mini_options(dir / "base"));

    auto o = mini_options(dir / "ext");
    o.embeddings = dir / "base" / "embeddings.xsem";
    const auto ext = build_prepared(o);
    CHECK(ext.embeddings.source() == EmbeddingSource::external_file);
    for (std::size_t i = 0; i < ext.docs.size(); ++i) CHECK(ext.docs[i].labels == base.docs[i].labels);

    EmbeddingTable partial(base.embeddings.dim(), EmbeddingSource::external_file);
    partial.put("mini-001", 0, *base.embeddings.find("mini-001", 0));
    save_embeddings(dir / "partial.xsem", partial);
    o.embeddings = dir / "partial.xsem";
    try {
        build_prepared(o);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("missing embedding row") != std::string::npos);
    }
}

TEST_CASE("a 768-dimensional exporter file over the mini corpus loads and labels") {
    TempDir dir("x768");
    const auto base = build_prepared(mini_options(dir / "base"));

    // Rows in (doc_id bytes, index) order, summaries under "<id>#summary".
    std::map<std::string, std::size_t> counts;
    for (const auto& d : base.docs) {
        counts[d.doc.doc_id] = d.doc.sentences.size();
        counts[summary_key(d.doc.doc_id)] = d.doc.summary_sentences.size();
    }
    std::size_t rows = 0;
    for (const auto& [id, n] : counts) rows += n;
    testing::XsemBuilder file;
    file.header(768, static_cast<std::uint32_t>(rows));
    Rng rng(768);
    for (const auto& [id, n] : counts)
        for (std::uint32_t i = 0; i < n; ++i) {
            std::vector<float> v(768);
            for (float& x : v) x = static_cast<float>(rng.normal());
            file.record(id, i, v);
        }
    std::ofstream(dir / "bert.xsem", std::ios::binary)
        .write(reinterpret_cast<const char*>(file.bytes.data()), static_cast<std::streamsize>(file.bytes.size()));

    auto o = mini_options(dir / "ext");
    o.embeddings = dir / "bert.xsem";
    const auto data = prepare(o);
    CHECK(data.embeddings.dim() == 768);
    CHECK(data.embeddings.source() == EmbeddingSource::external_file);
    CHECK(data.docs.size() == 50);
    CHECK(read_file(dir / "ext" / "embeddings.xsem").size() == file.bytes.size());
    const auto stats = nlohmann::json::parse(read_file(dir / "ext" / "stats.json"));
    CHECK(stats.at("embedding_dim") == 768);
}

TEST_CASE("tf-idf label vectors give a valid labeling") {
    TempDir dir("tfidf");
    auto o = mini_options(dir.path());
    o.label_vectors = LabelVectors::tfidf;
    const auto data = build_prepared(o);
    for (const auto& d : data.docs)
        for (const auto& l : d.labels) {
            CHECK(l.max_similarity >= 0.0);
            CHECK(l.max_similarity <= 1.0 + 1e-12);
        }
    CHECK(parse_label_vectors("tfidf") == LabelVectors::tfidf);
    CHECK_THROWS_AS(parse_label_vectors("bert"), ConfigError);
}

TEST_CASE("train, summarize and compare over a prepared directory") {
    TempDir dir("flow");
    const auto prepared = dir / "prep";
    prepare(mini_options(prepared));

    TrainOptions t;
    t.prepared = prepared;
    t.checkpoint = dir / "models" / "lr.xsck";
    t.arch = Architecture{ModelKind::logistic, 0, {}, Activation::relu, 0};
    t.config.epochs = 3;
    const auto outcome = train_command(t);
    CHECK(fs::exists(t.checkpoint));
    CHECK(fs::exists(dir / "models" / "lr.xsck.report.json"));
    CHECK(outcome.checkpoint.model.architecture().input_dim == 2 * 64 + 2);
    const auto reloaded = load_checkpoint(t.checkpoint);
    CHECK(encode_checkpoint(reloaded) == encode_checkpoint(outcome.checkpoint));
    CHECK(system_label(reloaded) == "Logistic Reg");

    SummarizeOptions s;
    s.prepared = prepared;
    s.out = dir / "sum" / "lede3.jsonl";
    const auto lede = summarize_command(s);
    CHECK(lede.size() == 10);
    CHECK(count_lines(s.out) == 10);
    s.method = "model";
    CHECK_THROWS_AS(summarize_command(s), ConfigError);
    s.checkpoint = t.checkpoint;
    s.out = dir / "sum" / "model.jsonl";
    const auto model = summarize_command(s);
    for (const auto& r : model) CHECK(r.selected.size() == 3);

    CompareOptions c;
    c.prepared = prepared;
    c.out_dir = dir / "cmp";
    c.systems = {t.checkpoint.string()};
    const auto rows = compare_command(c);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].model == "LEDE3");
    CHECK(rows[1].model == "Logistic Reg");
    CHECK(fs::exists(dir / "cmp" / "compare.json"));
    CHECK(fs::exists(dir / "cmp" / "compare.txt"));

    c.systems = {t.checkpoint.string(), "lede3"};
    const auto ordered = compare_command(c);
    CHECK(ordered[0].model == "Logistic Reg");
    CHECK(ordered[1].model == "LEDE3");

    c.systems = {(dir / "nope.xsck").string()};
    CHECK_THROWS_AS(compare_command(c), DataError);
}

TEST_CASE("a checkpoint from another feature space is refused") {
    TempDir dir("compat");
    prepare(mini_options(dir / "a"));
    auto o = mini_options(dir / "b");
    o.dim = 32;
    prepare(o);
    const auto a = load_prepared(dir / "a");
    TrainConfig cfg;
    cfg.epochs = 1;
    const auto outcome = train_prepared(a, {ModelKind::logistic, 0, {}, Activation::relu, 0}, FeatureSet::full, cfg);
    const auto b = load_prepared(dir / "b");
    CHECK_THROWS_AS(check_compatible(outcome.checkpoint, b), ConfigError);
    CHECK_NOTHROW(check_compatible(outcome.checkpoint, a));
    CHECK_THROWS_AS(run_model(outcome.checkpoint, b, Split::test, {}), ConfigError);
}

TEST_CASE("embedding-only features narrow the input and tag the label") {
    TempDir dir("def");
    const auto data = build_prepared(mini_options(dir.path()));
    TrainConfig cfg;
    cfg.epochs = 1;
    const auto o = train_prepared(data, {ModelKind::logistic, 0, {}, Activation::relu, 0}, FeatureSet::embedding_only, cfg);
    CHECK(o.checkpoint.model.architecture().input_dim == 64);
    CHECK(system_label(o.checkpoint) == "Logistic Reg Def");
}

TEST_CASE("a missing prepared directory gives an actionable error") {
    try {
        load_prepared("/nonexistent/prepared");
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("xsum prepare") != std::string::npos);
    }
}
