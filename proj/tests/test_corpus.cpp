#include <doctest.h>

#include <algorithm>
#include <cctype>

#include "support.hpp"
#include "xsum/corpus.hpp"

using namespace xsum;
using xsum::testing::TempDir;
using xsum::testing::write_file;

namespace {

std::string strip_space(std::string_view s) {
    std::string out;
    for (char c : s)
        if (!std::isspace(static_cast<unsigned char>(c))) out.push_back(c);
    return out;
}

}  // namespace

TEST_CASE("density bins parse and print") {
    CHECK(parse_density_bin("extractive") == DensityBin::extractive);
    CHECK(parse_density_bin("mixed") == DensityBin::mixed);
    CHECK(parse_density_bin("abstractive") == DensityBin::abstractive);
    CHECK(parse_density_bin("weird") == DensityBin::unknown);
    CHECK(to_string(DensityBin::extractive) == "extractive");
}

TEST_CASE("load_corpus puts every line in exactly one bucket") {
    TempDir dir("corpus");
    const auto path = dir / "c.jsonl";
    write_file(path,
               R"({"id":"a","text":"One. Two.","summary":"One.","density_bin":"extractive"})" "\n"
               R"({"id":"b","text":"Three.","summary":"Three.","density_bin":"mixed"})" "\n"
               "not json\n"
               "\n"
               R"({"text":"Four.","summary":"Four.","density_bin":"extractive"})" "\n"
               R"({"id":"a","text":"Dup.","summary":"Dup.","density_bin":"extractive"})" "\n"
               R"({"id":"e","text":"   ","summary":"x","density_bin":"extractive"})" "\n"
               R"({"id":"f","text":5,"summary":"x","density_bin":"extractive"})" "\n"
               R"({"id":"g","text":"Five.","summary":"Five."})" "\n");

    LoadReport report;
    const auto docs = load_corpus(path, DensityFilter::extractive_only, &report);
    CHECK(report.lines == 9);
    CHECK(report.yielded + report.filtered + report.malformed + report.empty == report.lines);
    CHECK(report.yielded == 2);
    CHECK(report.filtered == 2);  // mixed bin, missing bin
    CHECK(report.empty == 2);     // blank line, whitespace-only article
    CHECK(report.malformed == 3); // bad json, duplicate id, non-string text
    REQUIRE(docs.size() == 2);
    CHECK(docs[0].doc_id == "a");
    CHECK(docs[1].doc_id == "line-000005");

    LoadReport all;
    const auto every = load_corpus(path, DensityFilter::none, &all);
    CHECK(every.size() == 4);
    CHECK(all.filtered == 0);
    CHECK(every.back().density_bin == DensityBin::unknown);
}

TEST_CASE("load_corpus reports a missing file as a data error") {
    CHECK_THROWS_AS(load_corpus("/nonexistent/corpus.jsonl", DensityFilter::none), DataError);
}

TEST_CASE("parse_record derives the id from the line number when absent") {
    NewsRecord r;
    REQUIRE(parse_record(R"({"text":"A.","summary":"B."})", 12, r));
    CHECK(r.doc_id == "line-000012");
    CHECK_FALSE(parse_record(R"({"text":"A."})", 1, r));
    CHECK_FALSE(parse_record("[1,2]", 1, r));
}

TEST_CASE("segmenter splits on terminators followed by a capital, digit or quote") {
    CHECK(segment_text("It rained. Then it stopped! Did it? Yes.") ==
          std::vector<std::string>{"It rained.", "Then it stopped!", "Did it?", "Yes."});
    CHECK(segment_text("Prices rose. 12 stores closed.") ==
          std::vector<std::string>{"Prices rose.", "12 stores closed."});
    CHECK(segment_text("He left. \"Never again,\" she said.") ==
          std::vector<std::string>{"He left.", "\"Never again,\" she said."});
    CHECK(segment_text("Lowercase follows. and stays joined.") ==
          std::vector<std::string>{"Lowercase follows. and stays joined."});
    CHECK(segment_text("no terminator at all") == std::vector<std::string>{"no terminator at all"});
    CHECK(segment_text("Wait... What happened?!") == std::vector<std::string>{"Wait...", "What happened?!"});
}

TEST_CASE("closing quotes and brackets stay with their sentence") {
    CHECK(segment_text("She said \"go.\" They went.") ==
          std::vector<std::string>{"She said \"go.\"", "They went."});
    CHECK(segment_text("It ended (finally.) Next one.") ==
          std::vector<std::string>{"It ended (finally.)", "Next one."});
    CHECK(segment_text("He said \xE2\x80\x9Cno.\xE2\x80\x9D Then \xE2\x80\x9CYes.\xE2\x80\x9D") ==
          std::vector<std::string>{"He said \xE2\x80\x9Cno.\xE2\x80\x9D", "Then \xE2\x80\x9CYes.\xE2\x80\x9D"});
}

TEST_CASE("abbreviations and initials do not end a sentence") {
    CHECK(segment_text("Dr. Smith met Mr. Jones on St. Mark St. Today was warm.").size() == 1);
    CHECK(segment_text("The U.S. Senate voted. It passed.") ==
          std::vector<std::string>{"The U.S. Senate voted.", "It passed."});
    CHECK(segment_text("It happened Sept. 11 and Jan. 5 again. Done.").size() == 2);
    CHECK(segment_text("John F. Kennedy spoke. Crowds cheered.") ==
          std::vector<std::string>{"John F. Kennedy spoke.", "Crowds cheered."});
    CHECK(is_abbreviation("Mrs."));
    CHECK(is_abbreviation("Q."));
    CHECK_FALSE(is_abbreviation("Gov."));
    CHECK_FALSE(is_abbreviation("end."));
}

TEST_CASE("segmenter property: nothing lost, nothing empty, sentences trimmed") {
    const std::vector<std::string> words{"alpha", "Beta", "Dr.", "U.S.", "end.", "Stop!", "why?",
                                         "\"Quote.\"", "12", "A.", "(aside)", "Sept.", "x"};
    Rng rng(11);
    for (int trial = 0; trial < 300; ++trial) {
        std::string text;
        const auto n = 1 + rng.below(25);
        for (std::uint64_t w = 0; w < n; ++w) {
            text += words[rng.below(words.size())];
            text += rng.below(4) == 0 ? "  " : " ";
        }
        const auto sentences = segment_text(text);
        std::string joined;
        for (const auto& s : sentences) {
            CHECK_FALSE(s.empty());
            CHECK(s == trim(s));
            joined += s;
        }
        CHECK(strip_space(joined) == strip_space(text));
        // A boundary only falls after a terminator or closing mark.
        for (std::size_t i = 0; i + 1 < sentences.size(); ++i) {
            const char last = sentences[i].back();
            CHECK(std::string_view(".!?\"')]").find(last) != std::string_view::npos);
        }
    }
}

TEST_CASE("segment applies to article and summary and round-trips through JSON") {
    const NewsRecord r{"d1", "First one. Second one.", "Only this.", DensityBin::extractive};
    const auto d = segment(r);
    CHECK(d.sentences.size() == 2);
    CHECK(d.summary_sentences == std::vector<std::string>{"Only this."});
    const nlohmann::json j = d;
    CHECK(j.get<SegmentedDoc>() == d);
}

TEST_CASE("LoadReport accumulates") {
    LoadReport a{4, 1, 1, 1, 1};
    a += LoadReport{2, 2, 0, 0, 0};
    CHECK(a == LoadReport{6, 3, 1, 1, 1});
}
