#include <catch2/catch_amalgamated.hpp>

#include "mobsim/csv.hpp"
#include "support/oracles.hpp"

using namespace mobsim;

TEST_CASE("split on commas") {
    CHECK(csv::split("a,b,c") == std::vector<std::string>{"a", "b", "c"});
    CHECK(csv::split("a,,c") == std::vector<std::string>{"a", "", "c"});
    CHECK(csv::split("") == std::vector<std::string>{""});
}

TEST_CASE("split strips a trailing carriage return") {
    CHECK(csv::split("a,b\r") == std::vector<std::string>{"a", "b"});
}

TEST_CASE("parse_int accepts exact integers only") {
    CHECK(csv::parse_int("42", "f") == 42);
    CHECK(csv::parse_int("-7", "f") == -7);
    CHECK(csv::parse_int(" 42 ", "f") == 42);  // padding is trimmed
    CHECK_THROWS(csv::parse_int("", "f"));
    CHECK_THROWS(csv::parse_int("4.2", "f"));
    CHECK_THROWS(csv::parse_int("4 2", "f"));
    CHECK_THROWS(csv::parse_int("42x", "f"));
}

TEST_CASE("parse_double accepts exact doubles only") {
    CHECK(csv::parse_double("0.5", "f") == 0.5);
    CHECK(csv::parse_double("-1e-3", "f") == -1e-3);
    CHECK_THROWS(csv::parse_double("", "f"));
    CHECK_THROWS(csv::parse_double("1.5x", "f"));
    CHECK_THROWS(csv::parse_double("nanx", "f"));
}

TEST_CASE("format_double round-trips") {
    for (const double v : {0.1, 1.0 / 3.0, 1e-17, -2.75, 0.0, 123456.789,
                           0.18903591682419658}) {
        CHECK(csv::parse_double(csv::format_double(v), "f") == v);
    }
}

TEST_CASE("format_double with fixed precision") {
    CHECK(csv::format_double(0.123456, 2) == "0.12");
    CHECK(csv::format_double(1.0, 3) == "1.000");
}

TEST_CASE("write_text and read_lines round-trip, skipping blanks") {
    oracle::TempDir tmp("csvtest");
    const std::string path = tmp / "x.csv";
    csv::write_text(path, "a,b\n\n1,2\n");
    const auto lines = csv::read_lines(path);
    REQUIRE(lines.size() == 2);
    CHECK(lines[0] == "a,b");
    CHECK(lines[1] == "1,2");
}

TEST_CASE("read_lines on a missing file throws") {
    CHECK_THROWS(csv::read_lines("/nonexistent/nope.csv"));
}
