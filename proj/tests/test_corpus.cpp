#include <algorithm>
#include <string>
#include <vector>

#include "doctest.h"
#include "itk/corpus.h"
#include "itk/errors.h"
#include "test_support.h"

using namespace itk;
using test::TempDir;
using test::write_text;

namespace {

const char* kHeader =
    "issue_url,issue_created_at,issue_author_association,repository_url,"
    "issue_title,issue_body,issue_label\n";

std::string row(const std::string& url, const std::string& label,
                const std::string& title = "t", const std::string& body = "b",
                const std::string& role = "NONE") {
    return url + ",2020-01-01T00:00:00Z," + role +
           ",https://api.github.com/repos/o/r," + title + "," + body + "," + label + "\n";
}

}  // namespace

TEST_SUITE("corpus") {

TEST_CASE("label parsing accepts the three classes and trims whitespace") {
    CHECK(parse_label("bug") == Label::bug);
    CHECK(parse_label("enhancement") == Label::enhancement);
    CHECK(parse_label(" question ") == Label::question);
    CHECK_FALSE(parse_label("Bug").has_value());
    CHECK_FALSE(parse_label("feature").has_value());
    CHECK_FALSE(parse_label("").has_value());
    CHECK(label_name(Label::enhancement) == "enhancement");
}

TEST_CASE("load_csv maps columns by name and parses labels") {
    TempDir tmp;
    const auto path = tmp.file("in.csv");
    write_text(path, std::string(kHeader) + row("u1", "bug") + row("u2", "enhancement") +
                         row("u3", "question"));
    const auto d = load_csv(path);
    REQUIRE(d.records.size() == 3);
    CHECK(d.records[0].issue_url == "u1");
    CHECK(d.records[0].label == Label::bug);
    CHECK(d.records[1].label == Label::enhancement);
    CHECK(d.records[2].label == Label::question);
    CHECK(d.records[0].title == "t");
    CHECK(d.records[0].body == "b");
    CHECK(d.rejected_count == 0);
}

TEST_CASE("column order in the file does not matter") {
    TempDir tmp;
    const auto path = tmp.file("in.csv");
    write_text(path,
               "issue_label,issue_title,issue_url,issue_body,repository_url,"
               "issue_author_association,issue_created_at\n"
               "bug,crash,u1,text,r,OWNER,2020-01-01\n");
    const auto d = load_csv(path);
    REQUIRE(d.records.size() == 1);
    CHECK(d.records[0].issue_url == "u1");
    CHECK(d.records[0].title == "crash");
    CHECK(d.records[0].author_association == "OWNER");
}

TEST_CASE("both created_at header spellings are accepted") {
    TempDir tmp;
    for (const char* name : {"issue_created_at", "issue_create_at"}) {
        const auto path = tmp.file(std::string("in_") + name + ".csv");
        write_text(path, std::string("issue_url,") + name +
                             ",issue_author_association,repository_url,issue_title,"
                             "issue_body,issue_label\n"
                             "u1,2019-05-05,NONE,r,t,b,bug\n");
        const auto d = load_csv(path);
        REQUIRE(d.records.size() == 1);
        CHECK(d.records[0].created_at == "2019-05-05");
    }
}

TEST_CASE("plain 'label' is accepted as the label column") {
    TempDir tmp;
    const auto path = tmp.file("in.csv");
    write_text(path,
               "issue_url,issue_created_at,issue_author_association,repository_url,"
               "issue_title,issue_body,label\n"
               "u1,2019-05-05,NONE,r,t,b,question\n");
    CHECK(load_csv(path).records[0].label == Label::question);
}

TEST_CASE("unknown labels and empty urls are skipped and counted") {
    TempDir tmp;
    const auto path = tmp.file("in.csv");
    write_text(path, std::string(kHeader) + row("u1", "bug") + row("u2", "wontfix") +
                         row("", "bug") + row("u3", "question"));
    const auto d = load_csv(path);
    CHECK(d.records.size() == 2);
    CHECK(d.rejected_count == 2);
}

TEST_CASE("wrong field count raises data_error with the row number") {
    TempDir tmp;
    const auto path = tmp.file("in.csv");
    write_text(path, std::string(kHeader) + row("u1", "bug") + "only,three,fields\n");
    try {
        load_csv(path);
        FAIL("expected data_error");
    } catch (const data_error& e) {
        CHECK(std::string(e.what()).find("row 3") != std::string::npos);
    }
}

TEST_CASE("missing column raises schema_error naming the field") {
    TempDir tmp;
    const auto path = tmp.file("in.csv");
    write_text(path,
               "issue_url,issue_author_association,repository_url,issue_title,"
               "issue_body,issue_label\n");
    try {
        load_csv(path);
        FAIL("expected schema_error");
    } catch (const schema_error& e) {
        CHECK(std::string(e.what()).find("created_at") != std::string::npos);
    }
}

TEST_CASE("missing file raises io_error, empty file raises schema_error") {
    TempDir tmp;
    CHECK_THROWS_AS(load_csv(tmp.file("absent.csv")), io_error);
    const auto path = tmp.file("empty.csv");
    write_text(path, "");
    CHECK_THROWS_AS(load_csv(path), schema_error);
}

TEST_CASE("unknown roles are kept verbatim, not rejected") {
    TempDir tmp;
    const auto path = tmp.file("in.csv");
    write_text(path, std::string(kHeader) + row("u1", "bug", "t", "b", "FIRST_TIMER"));
    const auto d = load_csv(path);
    REQUIRE(d.records.size() == 1);
    CHECK(d.records[0].author_association == "FIRST_TIMER");
}

TEST_CASE("write_csv then load_csv round-trips records") {
    TempDir tmp;
    Dataset d;
    d.records.push_back({"u1", "2020-01-01", "OWNER", "repo", "a,b \"c\"", "line1\nline2",
                         Label::enhancement});
    d.records.push_back({"u2", "2021-02-02", "NONE", "repo2", "t", "", Label::bug});
    const auto path = tmp.file("out.csv");
    write_csv(d, path);
    const auto back = load_csv(path);
    REQUIRE(back.records.size() == 2);
    CHECK(back.records[0].title == "a,b \"c\"");
    CHECK(back.records[0].body == "line1\nline2");
    CHECK(back.records[0].label == Label::enhancement);
    CHECK(back.records[1].body == "");
}

TEST_CASE("deduplicate keeps the first occurrence and preserves order") {
    Dataset d;
    for (const char* url : {"a", "b", "a", "c", "b", "a"}) {
        d.records.push_back({url, "", "", "", std::string("title of ") + url, "", Label::bug});
    }
    const auto [out, removed] = deduplicate(d);
    CHECK(removed == 3);
    REQUIRE(out.records.size() == 3);
    CHECK(out.records[0].issue_url == "a");
    CHECK(out.records[1].issue_url == "b");
    CHECK(out.records[2].issue_url == "c");
    CHECK(out.records[0].title == "title of a");
}

TEST_CASE("deduplicate refuses test datasets") {
    Dataset d;
    d.origin = Origin::test;
    CHECK_THROWS_AS(deduplicate(d), data_error);
}

TEST_CASE("deduplicate removes exactly the planted duplicates") {
    // 200 unique urls, 37 of them repeated once at random positions.
    Rng rng(7);
    Dataset d;
    for (int i = 0; i < 200; ++i) {
        d.records.push_back({"url" + std::to_string(i), "", "", "", "", "", Label::bug});
    }
    for (int i = 0; i < 37; ++i) {
        const IssueRecord victim = d.records[rng.next_below(200)];
        d.records.insert(d.records.begin() + static_cast<std::ptrdiff_t>(
                                                  rng.next_below(d.records.size() + 1)),
                         victim);
    }
    // Brute-force oracle: count pairs beyond the first per url.
    size_t expected = 0;
    {
        std::vector<std::string> urls;
        for (const auto& r : d.records) urls.push_back(r.issue_url);
        std::sort(urls.begin(), urls.end());
        for (size_t i = 1; i < urls.size(); ++i) {
            if (urls[i] == urls[i - 1]) ++expected;
        }
    }
    const auto [out, removed] = deduplicate(d);
    CHECK(removed == expected);
    CHECK(out.records.size() == d.records.size() - expected);
}

TEST_CASE("compute_stats means, lower median and counts") {
    Dataset d;
    // titles: 1, 2, 3 tokens; bodies: 0, 2, 5 tokens
    d.records.push_back({"u1", "", "OWNER", "", "one", "", Label::bug});
    d.records.push_back({"u2", "", "NONE", "", "one two", "b1 b2", Label::bug});
    d.records.push_back({"u3", "", "OWNER", "", "one two three", "b1 b2 b3 b4 b5",
                         Label::question});
    const auto s = compute_stats(d, whitespace_token_count, 4);
    CHECK(s.n_records == 3);
    CHECK(s.n_duplicates_removed == 4);
    CHECK(s.mean_title_tokens == doctest::Approx(2.0));
    CHECK(s.mean_body_tokens == doctest::Approx(7.0 / 3.0));
    CHECK(s.median_body_tokens == 2.0);
    CHECK(s.n_empty_bodies == 1);
    CHECK(s.per_label_counts.at("bug") == 2);
    CHECK(s.per_label_counts.at("question") == 1);
    CHECK(s.per_role_counts.at("OWNER") == 2);
    CHECK(s.per_role_counts.at("NONE") == 1);
    CHECK_FALSE(s.empty_dataset);
}

TEST_CASE("lower median matches a sort-based oracle on random data") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        Dataset d;
        const size_t n = 1 + rng.next_below(30);
        std::vector<size_t> counts;
        for (size_t i = 0; i < n; ++i) {
            const size_t c = rng.next_below(50);
            counts.push_back(c);
            std::string body;
            for (size_t k = 0; k < c; ++k) body += "w ";
            d.records.push_back({"u" + std::to_string(i), "", "", "", "t", body, Label::bug});
        }
        std::sort(counts.begin(), counts.end());
        const double expected = static_cast<double>(counts[(counts.size() - 1) / 2]);
        CHECK(compute_stats(d).median_body_tokens == expected);
    }
}

TEST_CASE("whitespace-only bodies count as empty") {
    Dataset d;
    d.records.push_back({"u1", "", "", "", "t", "  \t\n ", Label::bug});
    CHECK(compute_stats(d).n_empty_bodies == 1);
}

TEST_CASE("empty dataset sets the flag and zeroes the aggregates") {
    const auto s = compute_stats(Dataset{});
    CHECK(s.empty_dataset);
    CHECK(s.n_records == 0);
    CHECK(s.mean_title_tokens == 0.0);
    CHECK(s.median_body_tokens == 0.0);
}

TEST_CASE("stats use the supplied token counter") {
    Dataset d;
    d.records.push_back({"u1", "", "", "", "a b", "c d e", Label::bug});
    const auto s = compute_stats(d, [](const std::string&) { return size_t{7}; });
    CHECK(s.mean_title_tokens == 7.0);
    CHECK(s.mean_body_tokens == 7.0);
}

}  // TEST_SUITE
