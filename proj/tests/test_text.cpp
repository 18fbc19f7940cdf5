#include <doctest.h>

#include "casetrain/text.hpp"

using namespace casetrain;

TEST_CASE("normalize lowercases, strips punctuation and collapses space") {
    CHECK(text::normalize("  Left-Sided  Neck   Pain! ") == "left sided neck pain");
    CHECK(text::normalize("Does the patient have a fever?") == "does the patient have a fever");
    CHECK(text::normalize("") == "");
    CHECK(text::normalize("...") == "");
    CHECK(text::normalize("38.5") == "38 5");
}

TEST_CASE("normalize keeps non-ascii bytes intact") {
    CHECK(text::normalize("38.5°C") == "38 5°c");
}

TEST_CASE("tokenize splits the normalized form") {
    const auto tokens = text::tokenize("Blackouts, sudden falls or dizziness?");
    REQUIRE(tokens.size() == 5);
    CHECK(tokens[0] == "blackouts");
    CHECK(tokens[1] == "sudden");
    CHECK(tokens[2] == "falls");
    CHECK(tokens[4] == "dizziness");
}

TEST_CASE("find_token_sequence locates contiguous runs only") {
    const auto tokens = text::tokenize("any sudden falls lately");
    CHECK(text::find_token_sequence(tokens, {"sudden", "falls"}) == 1);
    CHECK(text::find_token_sequence(tokens, {"falls", "sudden"}) == -1);
    CHECK(text::find_token_sequence(tokens, {"any"}) == 0);
    CHECK(text::find_token_sequence(tokens, {}) == -1);
    CHECK(text::find_token_sequence({}, {"x"}) == -1);
}

TEST_CASE("contains_normalized is a substring check on normalized text") {
    CHECK(text::contains_normalized("Patient denies BLACKOUTS.", "blackouts"));
    CHECK_FALSE(text::contains_normalized("no fainting reported", "blackouts"));
}

TEST_CASE("normalize is idempotent") {
    const char* samples[] = {"Fever and headache", "  A,b;C  ", "x", "Multi  Word   Phrase!"};
    for (const char* s : samples) {
        const std::string once = text::normalize(s);
        CHECK(text::normalize(once) == once);
    }
}
