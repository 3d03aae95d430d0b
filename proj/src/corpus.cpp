#include "itk/corpus.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "itk/csv.h"
#include "itk/errors.h"

namespace itk {

namespace {

std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

// Resolves one logical field against the header, trying candidates in order.
size_t resolve_column(const std::vector<std::string>& header,
                      const std::vector<std::string>& candidates,
                      const char* logical_name) {
    for (const auto& name : candidates) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it != header.end()) {
            return static_cast<size_t>(it - header.begin());
        }
    }
    throw schema_error(std::string("missing column for '") + logical_name +
                       "' (accepted names: " +
                       [&] {
                           std::string s;
                           for (size_t i = 0; i < candidates.size(); ++i) {
                               if (i) s += ", ";
                               s += candidates[i];
                           }
                           return s;
                       }() +
                       ")");
}

}  // namespace

std::optional<Label> parse_label(std::string_view s) {
    const std::string t = trim(s);
    if (t == "bug") return Label::bug;
    if (t == "enhancement") return Label::enhancement;
    if (t == "question") return Label::question;
    return std::nullopt;
}

std::string_view label_name(Label l) {
    switch (l) {
        case Label::bug: return "bug";
        case Label::enhancement: return "enhancement";
        case Label::question: return "question";
    }
    return "bug";
}

Dataset load_csv(const std::filesystem::path& path, Origin origin,
                 const ColumnMap& columns) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw io_error("cannot open " + path.string());
    }
    csv::Reader reader(in);

    const auto header = reader.next_row();
    if (!header) {
        throw schema_error(path.string() + ": empty file, header row required");
    }

    const size_t c_url = resolve_column(*header, columns.issue_url, "issue_url");
    const size_t c_created = resolve_column(*header, columns.created_at, "created_at");
    const size_t c_role =
        resolve_column(*header, columns.author_association, "author_association");
    const size_t c_repo =
        resolve_column(*header, columns.repository_url, "repository_url");
    const size_t c_title = resolve_column(*header, columns.title, "title");
    const size_t c_body = resolve_column(*header, columns.body, "body");
    const size_t c_label = resolve_column(*header, columns.label, "label");

    Dataset d;
    d.origin = origin;
    while (auto row = reader.next_row()) {
        if (row->size() != header->size()) {
            throw data_error("row " + std::to_string(reader.row_number()) + ": has " +
                             std::to_string(row->size()) + " fields, header has " +
                             std::to_string(header->size()));
        }
        const auto label = parse_label((*row)[c_label]);
        if (!label || (*row)[c_url].empty()) {
            ++d.rejected_count;
            continue;
        }
        IssueRecord r;
        r.issue_url = std::move((*row)[c_url]);
        r.created_at = std::move((*row)[c_created]);
        r.author_association = std::move((*row)[c_role]);
        r.repository_url = std::move((*row)[c_repo]);
        r.title = std::move((*row)[c_title]);
        r.body = std::move((*row)[c_body]);
        r.label = *label;
        d.records.push_back(std::move(r));
    }
    return d;
}

void write_csv(const Dataset& d, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw io_error("cannot write " + path.string());
    }
    csv::write_row(out, {"issue_url", "issue_created_at", "issue_author_association",
                         "repository_url", "issue_title", "issue_body", "issue_label"});
    for (const auto& r : d.records) {
        csv::write_row(out, {r.issue_url, r.created_at, r.author_association,
                             r.repository_url, r.title, r.body,
                             std::string(label_name(r.label))});
    }
    if (!out.flush()) {
        throw io_error("write failed for " + path.string());
    }
}

std::pair<Dataset, size_t> deduplicate(const Dataset& d) {
    if (d.origin != Origin::train) {
        throw data_error("deduplicate called on a test dataset");
    }
    Dataset out;
    out.origin = d.origin;
    out.rejected_count = d.rejected_count;
    out.records.reserve(d.records.size());
    std::unordered_set<std::string_view> seen;
    seen.reserve(d.records.size() * 2);
    for (const auto& r : d.records) {
        if (seen.insert(r.issue_url).second) {
            out.records.push_back(r);
        }
    }
    const size_t removed = d.records.size() - out.records.size();
    return {std::move(out), removed};
}

size_t whitespace_token_count(const std::string& s) {
    size_t n = 0;
    bool in_token = false;
    for (unsigned char c : s) {
        if (std::isspace(c)) {
            in_token = false;
        } else if (!in_token) {
            in_token = true;
            ++n;
        }
    }
    return n;
}

CorpusStats compute_stats(const Dataset& d, const TokenCounter& counter,
                          size_t duplicates_removed) {
    CorpusStats s;
    s.n_records = d.records.size();
    s.n_duplicates_removed = duplicates_removed;
    if (d.records.empty()) {
        s.empty_dataset = true;
        return s;
    }

    double title_sum = 0.0;
    double body_sum = 0.0;
    std::vector<size_t> body_counts;
    body_counts.reserve(d.records.size());
    for (const auto& r : d.records) {
        title_sum += static_cast<double>(counter(r.title));
        const size_t bc = counter(r.body);
        body_sum += static_cast<double>(bc);
        body_counts.push_back(bc);
        if (trim(r.body).empty()) ++s.n_empty_bodies;
        ++s.per_label_counts[std::string(label_name(r.label))];
        ++s.per_role_counts[r.author_association];
    }
    const auto n = static_cast<double>(d.records.size());
    s.mean_title_tokens = title_sum / n;
    s.mean_body_tokens = body_sum / n;

    // lower median: element at index (n-1)/2 of the sorted counts
    const size_t mid = (body_counts.size() - 1) / 2;
    std::nth_element(body_counts.begin(), body_counts.begin() + static_cast<std::ptrdiff_t>(mid),
                     body_counts.end());
    s.median_body_tokens = static_cast<double>(body_counts[mid]);
    return s;
}

}  // namespace itk
