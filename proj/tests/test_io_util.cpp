#include <doctest.h>

#include "emosig/error.hpp"
#include "emosig/io_util.hpp"

using namespace emosig;

TEST_CASE("csv reader handles quotes, embedded newlines and blank lines") {
    auto rows = parse_csv("a,b\n\"x, y\",\"he said \"\"hi\"\"\"\n\n\"multi\nline\",z\n", "t.csv");
    REQUIRE(rows.size() == 3);
    CHECK(rows[1].fields == std::vector<std::string>{"x, y", "he said \"hi\""});
    CHECK(rows[2].line == 4);
    CHECK(rows[2].fields[0] == "multi\nline");
    CHECK_THROWS_AS(parse_csv("a,\"open\n", "t.csv"), FormatError);
}

TEST_CASE("csv escape round-trips through the reader") {
    for (std::string s : {"plain", "with,comma", "quote\"d", "new\nline", ""}) {
        auto rows = parse_csv(csv_escape(s) + ",x\n", "t");
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].fields[0] == s);
    }
}

TEST_CASE("strict json rejects duplicate keys and reports positions") {
    CHECK_THROWS_AS(parse_json_strict(R"({"a":1,"a":2})", "dup.json"), ValidationError);
    try {
        parse_json_strict("{\n  \"a\": ,\n}", "bad.json");
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(e.source() == "bad.json");
        CHECK(e.line() == 2);
    }
}

TEST_CASE("fixed formatting is locale free and never prints negative zero") {
    CHECK(format_fixed(0.0412345, 6) == "0.041235");
    CHECK(format_fixed(-0.0000001, 4) == "0.0000");
    CHECK(format_fixed(1.0, 4) == "1.0000");
}

TEST_CASE("string helpers") {
    CHECK(lower_ascii("HeLLo \xC3\x89") == "hello \xC3\x89");
    CHECK(trim("  x y \t") == "x y");
    CHECK(split("a,,b", ',') == std::vector<std::string>{"a", "", "b"});
    CHECK(line_col_at("ab\ncd", 4) == std::pair<std::size_t, std::size_t>{2, 2});
}
