#pragma once

#include <string>
#include <vector>

namespace hoprag::testing {

struct MetricCase {
    const char* prediction;
    const char* gold;
    int em;
    double f1;
};

struct RecallCase {
    std::vector<std::string> retrieved;
    std::vector<std::string> oracle;
    double recall;
};

// Generated by tests/oracles/metrics.py; do not edit by hand.
// {prediction, gold, em, f1}
inline const MetricCase kMetricCases[] = {
    {"b c d", "c d e", 0, 0.6666666666666666},
    {"p q r", "q r s", 0, 0.6666666666666666},
    {"a b c", "b c d", 0, 0.8},
    {"Rome", "Rome", 1, 1.0},
    {"rome", "ROME", 1, 1.0},
    {"Rome.", "Rome", 1, 1.0},
    {"The Rome", "Rome", 1, 1.0},
    {"the", "", 1, 1.0},
    {"", "", 1, 1.0},
    {"", "Rome", 0, 0.0},
    {"Rome", "", 0, 0.0},
    {"a an the", "the", 1, 1.0},
    {"Neva River", "the Neva river", 1, 1.0},
    {"Neva", "Neva River", 0, 0.6666666666666666},
    {"River Neva", "Neva River", 0, 1.0},
    {"1,100,000 square feet", "1100000 square feet", 1, 1.0},
    {"1,100,000 square feet", "1,100,000 sq ft", 0, 0.3333333333333333},
    {"square feet", "1,100,000 square feet", 0, 0.8},
    {"Luciano Salce", "Salce", 0, 0.6666666666666666},
    {"Carl Nielsen", "Carl August Nielsen", 0, 0.8},
    {"Denmark", "Kingdom of Denmark", 0, 0.5},
    {"Kingdom of Denmark", "Denmark", 0, 0.5},
    {"yes", "no", 0, 0.0},
    {"yes", "Yes!", 1, 1.0},
    {"no", "No.", 1, 1.0},
    {"U.S.A.", "USA", 1, 1.0},
    {"U.S.A.", "U S A", 0, 0.0},
    {"New York City", "new york", 0, 0.8},
    {"new york new york", "new york", 0, 0.6666666666666666},
    {"new york", "new york new york", 0, 0.6666666666666666},
    {"cat cat cat", "cat", 0, 0.5},
    {"cat", "cat cat cat", 0, 0.5},
    {"cat dog", "dog cat", 0, 1.0},
    {"Harrow United F.C.", "Harrow United", 0, 0.8},
    {"Kessa Stream", "the Kessa stream", 1, 1.0},
    {"Velden", "Velden, Austria", 0, 0.6666666666666666},
    {"Velden, Austria", "Velden", 0, 0.6666666666666666},
    {"in 1922", "1922", 0, 0.6666666666666666},
    {"1922", "1961", 0, 0.0},
    {"an apple a day", "apple day", 1, 1.0},
    {"anthem", "an them", 0, 0.0},
    {"theater", "the ater", 0, 0.0},
    {"  spaced   out  ", "spaced out", 1, 1.0},
    {"tab\tseparated", "tab separated", 1, 1.0},
    {"line\nbreak", "line break", 1, 1.0},
    {"it's", "its", 1, 1.0},
    {"don't stop", "dont stop", 1, 1.0},
    {"(parenthetical)", "parenthetical", 1, 1.0},
    {"#hashtag @user", "hashtag user", 1, 1.0},
    {"50%", "50", 1, 1.0},
    {"$5", "5", 1, 1.0},
    {"x-y", "xy", 1, 1.0},
    {"x - y", "x y", 1, 1.0},
    {"A Tale of Two Cities", "tale of two cities", 1, 1.0},
    {"one two three four", "one two", 0, 0.6666666666666666},
    {"one two", "one two three four", 0, 0.6666666666666666},
    {"alpha beta gamma delta", "beta delta epsilon", 0, 0.5714285714285715},
    {"The Beatles", "Beatles, The", 1, 1.0},
    {"Sony Corporation", "Sony", 0, 0.6666666666666666},
    {"Masaru Ibuka and Akio Morita", "Akio Morita", 0, 0.5714285714285715},
    {"Mount Kilimanjaro", "Kilimanjaro", 0, 0.6666666666666666},
    {"Saint Petersburg", "St. Petersburg", 0, 0.5},
    {"café", "café", 1, 1.0},
    {"naïve approach", "naive approach", 0, 0.5},
};

// {retrieved, oracle, recall}
inline const RecallCase kRecallCases[] = {
    {{"c01", "c02"}, {"c01", "c02"}, 1.0},
    {{"c01"}, {"c01", "c02"}, 0.5},
    {{}, {"c01", "c02"}, 0.0},
    {{"c03", "c04", "c05"}, {"c01", "c02"}, 0.0},
    {{"c01", "c01", "c03"}, {"c01", "c02"}, 0.5},
    {{"c02", "c09", "c01", "c07"}, {"c01", "c02", "c03"}, 0.6666666666666666},
    {{"a1", "b1"}, {"b1"}, 1.0},
    {{"x"}, {"a", "b", "c", "d"}, 0.0},
};

}  // namespace hoprag::testing
