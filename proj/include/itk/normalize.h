#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "itk/corpus.h"

namespace itk {

enum class Field { created_at, author_association, repository, title, body };

std::vector<Field> all_fields();
std::string_view field_name(Field f);
Field parse_field(std::string_view name);

// One concept-normalization rule. pattern_id selects a built-in scanner;
// by default it equals the concept name.
struct SentinelRule {
    std::string name;        // sentinel token is <name>
    std::string pattern_id;  // one of FUNCTION URL CODEBLOCK PATH VERSION NUMBER
};

std::vector<SentinelRule> default_sentinels();

struct NormalizationConfig {
    // Applied in list order; replacements are non-overlapping and greedy.
    std::vector<SentinelRule> sentinel_set = default_sentinels();
    std::string repo_base_url = "https://api.github.com/repos/";
    int max_tokens = 200;
    std::vector<Field> field_selection = all_fields();
};

struct CleanRecord {
    std::string text;    // space-separated tokens, at most max_tokens of them
    int label_code = 0;  // bug 0, enhancement 1, question 2
};

// --- single-string operations -------------------------------------------

// Replaces each matched concept span with its <NAME> sentinel. Existing
// whitelisted sentinel tokens in the input are left untouched.
std::string normalize_concepts(std::string_view s, const NormalizationConfig& cfg);

// Removes all non-ASCII bytes and all ASCII punctuation; letters, digits and
// whitespace are kept. Whitelisted sentinel tokens pass through verbatim.
std::string strip_chars(std::string_view s);

// ASCII-lowercases everything outside sentinel tokens.
std::string lowercase(std::string_view s);

// Collapses whitespace runs to single spaces and trims the ends.
std::string squeeze_whitespace(std::string_view s);

// Drops the leading repo_base_url if present, leaving "owner/name".
std::string strip_repo_base(std::string_view url, const NormalizationConfig& cfg);

// Keeps the first k whitespace tokens, re-joined with single spaces.
std::string truncate_tokens(std::string_view s, int k);

// --- record-level pipeline ------------------------------------------------

struct CleanedFields {
    std::string created_at;
    std::string author_association;
    std::string repository;
    std::string title;
    std::string body;

    const std::string& get(Field f) const;
};

// Per-field cleaning: title and body run concepts -> strip -> lower ->
// squeeze; repository is base-stripped first; created_at and the author role
// get the character-level passes only.
CleanedFields clean_fields(const IssueRecord& r, const NormalizationConfig& cfg);

// Joins the selected fields in the fixed order, runs one more concept pass
// (character stripping can merge digit runs into new standalone numbers;
// every other pattern needs punctuation that is gone by now), squeezes, and
// truncates to max_tokens.
std::string join_and_truncate(const CleanedFields& f, const NormalizationConfig& cfg);

// The full title/body pipeline applied to one free-standing string.
std::string clean_free_text(std::string_view s, const NormalizationConfig& cfg);

CleanRecord clean_record(const IssueRecord& r, const NormalizationConfig& cfg);

// Token counter for corpus statistics: cleans like a title/body field, then
// counts whitespace tokens.
TokenCounter cleaning_token_counter(const NormalizationConfig& cfg);

}  // namespace itk
