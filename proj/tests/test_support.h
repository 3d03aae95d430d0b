#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "itk/normalize.h"
#include "itk/rng.h"

namespace itk::test {

// Unique scratch directory, removed on destruction.
class TempDir {
  public:
    TempDir() {
        Rng rng(std::random_device{}());
        path_ = std::filesystem::temp_directory_path() /
                ("itk_test_" + std::to_string(rng.next_u64()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path_ / name).string(); }

  private:
    std::filesystem::path path_;
};

inline void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
}

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Messy strings for the cleaning properties: ASCII prose, markdown, code,
// URLs, paths, version strings, multi-byte UTF-8, stray sentinels.
inline std::string fuzz_string(Rng& rng) {
    static const std::vector<std::string> pieces = {
        "Crash", "when", "running", "the", "proxy", "véry", "bröken", "日本語テキスト", "🐛",
        "fix()", "obj.method(arg)", "std::sort(v.begin(), v.end())", "https://example.com/a?b=1",
        "http://x.io", "src/main.rs", "lib/util/helper.py", "v1.2.3", "2.10.4", "10.0",
        "12345", "987", "42", "0,618", "```int main() { return 0; }```", "```\ncode\n```",
        "<FUNCTION>", "<NUMBER>", "<pad>", "a<b>c", "   ", "\t\n", "--flag=value",
        "CamelCaseWord", "snake_case_name", "!!!", "???", "#123", "@user", "[link](https://y.z)",
        "50%", "£100", "naïve", "Ünïcode", "\xF0\x9F\x92\xA5", "semi;colon", "q(w(e(r(t))))",
    };
    const size_t n = 1 + rng.next_below(25);
    std::string out;
    for (size_t i = 0; i < n; ++i) {
        if (i) out.push_back(rng.next_below(8) == 0 ? '\n' : ' ');
        out += pieces[rng.next_below(pieces.size())];
    }
    return out;
}

struct SyntheticCorpus {
    std::vector<CleanRecord> train;
    std::vector<CleanRecord> test;
};

// Three-class corpus with class-indicative keywords embedded in shared noise.
inline SyntheticCorpus make_synthetic_corpus(size_t n_train, size_t n_test, uint64_t seed) {
    static const std::vector<std::vector<std::string>> keywords = {
        {"crash", "segfault", "broken"},
        {"feature", "improve", "support"},
        {"how", "question", "clarify"},
    };
    Rng rng(seed);
    const auto make_doc = [&](int label) {
        const size_t n_noise = 8 + rng.next_below(12);
        std::vector<std::string> tokens;
        for (size_t i = 0; i < n_noise; ++i) {
            tokens.push_back("w" + std::to_string(rng.next_below(200)));
        }
        const size_t n_key = 1 + rng.next_below(3);
        for (size_t i = 0; i < n_key; ++i) {
            const auto& pool = keywords[label];
            tokens.insert(tokens.begin() + rng.next_below(tokens.size() + 1),
                          pool[rng.next_below(pool.size())]);
        }
        std::string text;
        for (size_t i = 0; i < tokens.size(); ++i) {
            if (i) text.push_back(' ');
            text += tokens[i];
        }
        return CleanRecord{text, label};
    };
    SyntheticCorpus c;
    for (size_t i = 0; i < n_train; ++i) c.train.push_back(make_doc(static_cast<int>(i % 3)));
    for (size_t i = 0; i < n_test; ++i) c.test.push_back(make_doc(static_cast<int>(i % 3)));
    return c;
}

}  // namespace itk::test
