#include <doctest.h>

#include <filesystem>

#include "emosig/error.hpp"
#include "emosig/io_util.hpp"
#include "emosig/lexicon.hpp"

using namespace emosig;

namespace {
const char* kToy = R"({"categories":{"Positiv":["good","great"],"Negativ":["bad"]}})";
}

TEST_CASE("json lexicon loads categories in name order") {
    auto lex = lexicon_from_json(kToy, "toy");
    CHECK(lex.category_count() == 2);
    CHECK(lex.category_names() == std::vector<std::string>{"Negativ", "Positiv"});
    std::size_t words = 0;
    for (const auto& [_, w] : lex.categories()) words += w.size();
    CHECK(words == 3);
    CHECK(lex.negation_window() == kDefaultNegationWindow);
    CHECK(lex.negators() == default_negators());
}

TEST_CASE("words are lowercased and deduplicated") {
    auto lex = lexicon_from_json(R"({"categories":{"Positiv":["Good","good"]}})", "t");
    CHECK(lex.categories().at("Positiv") == std::set<std::string>{"good"});
}

TEST_CASE("categories_of folds case and misses absent words") {
    auto lex = lexicon_from_json(kToy, "toy");
    CHECK(lex.categories_of("good") == std::set<std::string>{"Positiv"});
    CHECK(lex.categories_of("GOOD") == std::set<std::string>{"Positiv"});
    CHECK(lex.categories_of("zebra").empty());
}

TEST_CASE("lexicon validation errors") {
    CHECK_THROWS_AS(lexicon_from_json(R"({"categories":{"Empty":[]}})", "t"), ValidationError);
    CHECK_THROWS_AS(lexicon_from_json(R"({"categories":{"A":["two words"]}})", "t"), ValidationError);
    CHECK_THROWS_AS(lexicon_from_json(R"({"categories":{"A":["x"],"A":["y"]}})", "t"), ValidationError);
    CHECK_THROWS_AS(lexicon_from_json(R"({"categories":{"A":["x"]},"negation_window":0})", "t"), ValidationError);
    CHECK_THROWS_AS(lexicon_from_json(R"({"categories":{"A":["x"]})", "t"), FormatError);
}

TEST_CASE("tsv lexicon: rows, comments, empty category field") {
    auto lex = lexicon_from_tsv("# word\tcategory\ngood\tPositiv\nGreat\tPositiv\nbad\tNegativ\n", "l.tsv",
                                std::string_view("not\nnever\n"));
    CHECK(lex.categories().at("Positiv") == std::set<std::string>{"good", "great"});
    CHECK(lex.negators() == std::set<std::string>{"not", "never"});
    try {
        lexicon_from_tsv("good\tPositiv\nbad\t\n", "l.tsv");
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("l.tsv:2") != std::string::npos);
    }
}

TEST_CASE("canonical json round trip and deterministic reload") {
    auto lex = lexicon_from_json(R"({"categories":{"Z":["b","a"],"A":["c","B"]},"negators":["not"],"negation_window":2})",
                                 "t");
    const auto text = to_canonical_json(lex);
    auto again = lexicon_from_json(text, "round");
    CHECK(again == lex);
    CHECK(to_canonical_json(again) == text);
    CHECK(lexicon_from_json(text, "x").category_names() == lex.category_names());
}

TEST_CASE("bundled sample lexicon has ten categories") {
    auto lex = load_lexicon(std::filesystem::path(EMOSIG_RESOURCE_DIR) / "sample_lexicon.json");
    CHECK(lex.category_count() == 10);
    CHECK(lex.is_negator("n't"));
}

TEST_CASE("tsv loader picks up sibling negators.txt") {
    auto dir = std::filesystem::temp_directory_path() / "emosig_lex_tsv";
    std::filesystem::remove_all(dir);
    write_text_file(dir / "lex.tsv", "good\tPositiv\n");
    write_text_file(dir / "negators.txt", "nope\n");
    auto lex = load_lexicon(dir / "lex.tsv");
    CHECK(lex.negators() == std::set<std::string>{"nope"});
    CHECK_THROWS_AS(load_lexicon(dir / "missing.json"), Error);
    std::filesystem::remove_all(dir);
}

TEST_CASE("GI spreadsheet conversion") {
    const char* csv =
        "Entry,Source,Positiv,Negativ,Hostile,Othtags,Defined\n"
        "ABLE,H4Lvd,Positiv,,,Modif,\n"
        "ABOUT#1,H4Lvd,,,,Handels,\n"
        "ABOUT#2,H4Lvd,Positiv,,,,\n"
        "ATTACK,H4Lvd,,Negativ,Hostile,,\n"
        "HAND OVER,H4,Positiv,,,,\n";
    auto conv = convert_gi_spreadsheet(csv, "gi.csv");
    CHECK(conv.skipped_entries == 1);
    CHECK(conv.lexicon.category_names() == std::vector<std::string>{"Hostile_GI", "Negativ_GI", "Positiv_GI"});
    CHECK(conv.lexicon.categories_of("about") == std::set<std::string>{"Positiv_GI"});
    CHECK(conv.lexicon.categories_of("attack") == std::set<std::string>{"Hostile_GI", "Negativ_GI"});
    CHECK_THROWS_AS(convert_gi_spreadsheet("Word,Positiv\nx,Positiv\n", "bad.csv"), FormatError);
}
