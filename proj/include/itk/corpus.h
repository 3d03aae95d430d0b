#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace itk {

enum class Label : int { bug = 0, enhancement = 1, question = 2 };

std::optional<Label> parse_label(std::string_view s);
std::string_view label_name(Label l);
inline constexpr int kNumLabels = 3;

// The six documented author-association roles. Other strings are kept
// verbatim on the record; role is a model input, not a validity criterion.
inline constexpr std::array<std::string_view, 6> kKnownRoles = {
    "OWNER", "MAINTAINER", "CONTRIBUTOR", "COLLABORATOR", "MEMBER", "MANNEQUIN",
};

struct IssueRecord {
    std::string issue_url;
    std::string created_at;           // ISO-8601, kept verbatim
    std::string author_association;
    std::string repository_url;
    std::string title;
    std::string body;
    Label label = Label::bug;
};

enum class Origin { train, test };

struct Dataset {
    std::vector<IssueRecord> records;  // file order
    Origin origin = Origin::train;
    size_t rejected_count = 0;         // rows skipped at ingest
};

// Maps each logical field to the CSV header names accepted for it, tried in
// order. Defaults accept both the issue_create_at and issue_created_at
// spellings, and both label and issue_label.
struct ColumnMap {
    std::vector<std::string> issue_url{"issue_url"};
    std::vector<std::string> created_at{"issue_created_at", "issue_create_at"};
    std::vector<std::string> author_association{"issue_author_association"};
    std::vector<std::string> repository_url{"repository_url"};
    std::vector<std::string> title{"issue_title"};
    std::vector<std::string> body{"issue_body"};
    std::vector<std::string> label{"issue_label", "label"};
};

// Reads a UTF-8, RFC 4180 CSV with a header row. Rows with an unknown label
// or an empty issue_url are skipped and counted in rejected_count; rows with
// the wrong field count raise data_error with the row number.
Dataset load_csv(const std::filesystem::path& path, Origin origin = Origin::train,
                 const ColumnMap& columns = ColumnMap{});

// Writes a dataset back out with the default column names.
void write_csv(const Dataset& d, const std::filesystem::path& path);

// Keeps the first occurrence of each issue_url, preserving order.
// Only valid for train datasets; the test distribution is never modified.
std::pair<Dataset, size_t> deduplicate(const Dataset& d);

struct CorpusStats {
    size_t n_records = 0;
    size_t n_duplicates_removed = 0;
    size_t n_empty_bodies = 0;
    double mean_title_tokens = 0.0;
    double mean_body_tokens = 0.0;
    double median_body_tokens = 0.0;  // lower median
    std::map<std::string, size_t> per_label_counts;
    std::map<std::string, size_t> per_role_counts;
    bool empty_dataset = false;
};

// Counts tokens in one title or body string. The canonical pipeline passes a
// counter that cleans the text first and then counts whitespace tokens.
using TokenCounter = std::function<size_t(const std::string&)>;

size_t whitespace_token_count(const std::string& s);

CorpusStats compute_stats(const Dataset& d,
                          const TokenCounter& counter = whitespace_token_count,
                          size_t duplicates_removed = 0);

}  // namespace itk
