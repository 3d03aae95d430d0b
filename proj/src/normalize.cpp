#include "itk/normalize.h"

#include <algorithm>
#include <cctype>
#include <optional>

#include "itk/errors.h"

namespace itk {

namespace {

constexpr std::string_view kKnownConcepts[] = {"FUNCTION", "URL",     "CODEBLOCK",
                                               "PATH",     "VERSION", "NUMBER"};

bool is_known_concept(std::string_view name) {
    for (auto k : kKnownConcepts) {
        if (k == name) return true;
    }
    return false;
}

bool is_word_char(char c) {
    const auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) != 0 || c == '_';
}

bool is_ident_start(char c) {
    const auto u = static_cast<unsigned char>(c);
    return std::isalpha(u) != 0 || c == '_';
}

bool is_space_char(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

// A sentinel token spelled <NAME> with NAME in the known set. Returns the
// position one past '>' when s[pos] opens one.
std::optional<size_t> sentinel_end(std::string_view s, size_t pos) {
    if (s[pos] != '<') return std::nullopt;
    size_t j = pos + 1;
    while (j < s.size() && s[j] >= 'A' && s[j] <= 'Z') ++j;
    if (j >= s.size() || s[j] != '>' || j == pos + 1) return std::nullopt;
    if (!is_known_concept(s.substr(pos + 1, j - pos - 1))) return std::nullopt;
    return j + 1;
}

struct Segment {
    bool is_sentinel;
    std::string_view text;
};

// Splits into alternating free text and protected sentinel tokens.
std::vector<Segment> split_sentinels(std::string_view s) {
    std::vector<Segment> segs;
    size_t free_begin = 0;
    size_t i = 0;
    while (i < s.size()) {
        if (s[i] == '<') {
            if (const auto end = sentinel_end(s, i)) {
                if (i > free_begin) segs.push_back({false, s.substr(free_begin, i - free_begin)});
                segs.push_back({true, s.substr(i, *end - i)});
                i = *end;
                free_begin = i;
                continue;
            }
        }
        ++i;
    }
    if (s.size() > free_begin) segs.push_back({false, s.substr(free_begin)});
    return segs;
}

using Span = std::pair<size_t, size_t>;

// --- concept scanners -----------------------------------------------------
// Each finds the first match at or after `from`. Hand-rolled instead of
// std::regex: the corpus runs put hundreds of megabytes of markdown through
// these, and they must be linear and stack-safe on adversarial input.

// identifier(args), with optional . :: -> chains and one nesting level
std::optional<Span> find_function(std::string_view s, size_t from) {
    constexpr size_t kMaxArgSpan = 512;
    for (size_t i = from; i < s.size(); ++i) {
        if (!is_ident_start(s[i]) || (i > 0 && is_word_char(s[i - 1]))) continue;
        size_t j = i;
        while (j < s.size() && is_word_char(s[j])) ++j;
        for (;;) {
            size_t sep = 0;
            if (j < s.size() && s[j] == '.') sep = 1;
            else if (j + 1 < s.size() && (s.substr(j, 2) == "::" || s.substr(j, 2) == "->")) sep = 2;
            if (sep == 0 || j + sep >= s.size() || !is_ident_start(s[j + sep])) break;
            j += sep;
            while (j < s.size() && is_word_char(s[j])) ++j;
        }
        if (j >= s.size() || s[j] != '(') {
            i = j;  // resume after the identifier chain
            continue;
        }
        int depth = 1;
        size_t k = j + 1;
        const size_t limit = std::min(s.size(), j + 1 + kMaxArgSpan);
        for (; k < limit && depth > 0; ++k) {
            if (s[k] == '(') {
                if (++depth > 2) break;
            } else if (s[k] == ')') {
                --depth;
            }
        }
        if (depth == 0) return Span{i, k};
        i = j;  // unbalanced: skip this call site
    }
    return std::nullopt;
}

bool is_scheme_char(char c) {
    const auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) != 0 || c == '+' || c == '.' || c == '-';
}

// scheme://non-space, stopping at whitespace and angle brackets
std::optional<Span> find_url(std::string_view s, size_t from) {
    size_t pos = from;
    while ((pos = s.find("://", pos)) != std::string_view::npos) {
        size_t begin = pos;
        while (begin > from && is_scheme_char(s[begin - 1])) --begin;
        bool has_alpha = false;
        for (size_t i = begin; i < pos; ++i) {
            if (std::isalpha(static_cast<unsigned char>(s[i]))) {
                has_alpha = true;
                break;
            }
        }
        size_t end = pos + 3;
        while (end < s.size() && !is_space_char(s[end]) && s[end] != '<' && s[end] != '>') ++end;
        if (has_alpha && end > pos + 3) return Span{begin, end};
        pos += 3;
    }
    return std::nullopt;
}

// fenced triple-backtick span, fence included
std::optional<Span> find_codeblock(std::string_view s, size_t from) {
    const size_t open = s.find("```", from);
    if (open == std::string_view::npos) return std::nullopt;
    const size_t close = s.find("```", open + 3);
    if (close == std::string_view::npos) return std::nullopt;
    return Span{open, close + 3};
}

bool is_path_char(char c) {
    const auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) != 0 || c == '_' || c == '.' || c == '~' || c == '-';
}

// slash-joined token whose last segment looks like name.ext
std::optional<Span> find_path(std::string_view s, size_t from) {
    for (size_t i = from; i < s.size(); ++i) {
        if (s[i] != '/') continue;
        size_t begin = i;
        while (begin > from && is_path_char(s[begin - 1])) --begin;
        size_t end = i;
        while (end < s.size() && (is_path_char(s[end]) || s[end] == '/')) ++end;
        size_t trimmed = end;
        while (trimmed > i && (s[trimmed - 1] == '.' || s[trimmed - 1] == '/')) --trimmed;
        const std::string_view span = s.substr(begin, trimmed - begin);
        const size_t last_slash = span.rfind('/');
        bool ok = last_slash != std::string_view::npos && last_slash + 1 < span.size();
        if (ok) {
            const std::string_view tail = span.substr(last_slash + 1);
            const size_t dot = tail.rfind('.');
            ok = dot != std::string_view::npos && dot > 0 && dot + 1 < tail.size() &&
                 tail.size() - dot - 1 <= 8;
            for (size_t t = dot + 1; ok && t < tail.size(); ++t) {
                ok = std::isalnum(static_cast<unsigned char>(tail[t])) != 0;
            }
        }
        if (ok) return Span{begin, trimmed};
        i = end;  // skip the whole slash cluster
    }
    return std::nullopt;
}

// dotted numerics: v?digits(.digits)+
std::optional<Span> find_version(std::string_view s, size_t from) {
    for (size_t i = from; i < s.size(); ++i) {
        size_t d = i;
        if (s[i] == 'v' || s[i] == 'V') d = i + 1;
        if (d >= s.size() || std::isdigit(static_cast<unsigned char>(s[d])) == 0) continue;
        if (i > 0 && (is_word_char(s[i - 1]) || s[i - 1] == '.')) continue;
        size_t j = d;
        while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j])) != 0) ++j;
        size_t groups = 0;
        while (j + 1 < s.size() && s[j] == '.' &&
               std::isdigit(static_cast<unsigned char>(s[j + 1])) != 0) {
            ++j;
            while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j])) != 0) ++j;
            ++groups;
        }
        if (groups >= 1) return Span{i, j};
        i = j;
    }
    return std::nullopt;
}

// standalone digit runs of three or more
std::optional<Span> find_number(std::string_view s, size_t from) {
    for (size_t i = from; i < s.size(); ++i) {
        if (std::isdigit(static_cast<unsigned char>(s[i])) == 0) continue;
        if (i > 0 && is_word_char(s[i - 1])) {
            while (i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])) != 0) ++i;
            continue;
        }
        size_t j = i;
        while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j])) != 0) ++j;
        if (j - i >= 3 && (j >= s.size() || !is_word_char(s[j]))) return Span{i, j};
        i = j;
    }
    return std::nullopt;
}

using Scanner = std::optional<Span> (*)(std::string_view, size_t);

Scanner scanner_for(const std::string& pattern_id) {
    if (pattern_id == "FUNCTION") return &find_function;
    if (pattern_id == "URL") return &find_url;
    if (pattern_id == "CODEBLOCK") return &find_codeblock;
    if (pattern_id == "PATH") return &find_path;
    if (pattern_id == "VERSION") return &find_version;
    if (pattern_id == "NUMBER") return &find_number;
    throw schema_error("unknown sentinel pattern_id: " + pattern_id);
}

}  // namespace

std::vector<Field> all_fields() {
    return {Field::created_at, Field::author_association, Field::repository, Field::title,
            Field::body};
}

std::string_view field_name(Field f) {
    switch (f) {
        case Field::created_at: return "created_at";
        case Field::author_association: return "author_association";
        case Field::repository: return "repository";
        case Field::title: return "title";
        case Field::body: return "body";
    }
    return "title";
}

Field parse_field(std::string_view name) {
    for (Field f : all_fields()) {
        if (field_name(f) == name) return f;
    }
    throw schema_error("unknown field name: " + std::string(name));
}

std::vector<SentinelRule> default_sentinels() {
    return {{"FUNCTION", "FUNCTION"}, {"URL", "URL"},         {"CODEBLOCK", "CODEBLOCK"},
            {"PATH", "PATH"},         {"VERSION", "VERSION"}, {"NUMBER", "NUMBER"}};
}

std::string normalize_concepts(std::string_view s, const NormalizationConfig& cfg) {
    if (s.empty()) return {};
    // Segments own no storage, so each pass materializes a string first.
    std::string current(s);
    for (const auto& rule : cfg.sentinel_set) {
        if (!is_known_concept(rule.name)) {
            throw schema_error("sentinel name must be one of the known concepts: " + rule.name);
        }
        const Scanner scan = scanner_for(rule.pattern_id);
        const std::string token = "<" + rule.name + ">";
        std::string next;
        next.reserve(current.size());
        for (const auto& seg : split_sentinels(current)) {
            if (seg.is_sentinel) {
                next.append(seg.text);
                continue;
            }
            size_t pos = 0;
            while (pos < seg.text.size()) {
                const auto m = scan(seg.text, pos);
                if (!m) {
                    next.append(seg.text.substr(pos));
                    break;
                }
                next.append(seg.text.substr(pos, m->first - pos));
                next.append(token);
                pos = m->second;
            }
        }
        current = std::move(next);
    }
    return current;
}

std::string strip_chars(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (const auto& seg : split_sentinels(s)) {
        if (seg.is_sentinel) {
            out.append(seg.text);
            continue;
        }
        for (char c : seg.text) {
            const auto u = static_cast<unsigned char>(c);
            if (u < 0x80 && (std::isalnum(u) != 0 || std::isspace(u) != 0)) {
                out.push_back(c);
            }
        }
    }
    return out;
}

std::string lowercase(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (const auto& seg : split_sentinels(s)) {
        if (seg.is_sentinel) {
            out.append(seg.text);
            continue;
        }
        for (char c : seg.text) {
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    return out;
}

std::string squeeze_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char c : s) {
        if (is_space_char(c)) {
            pending_space = !out.empty();
        } else {
            if (pending_space) out.push_back(' ');
            pending_space = false;
            out.push_back(c);
        }
    }
    return out;
}

std::string strip_repo_base(std::string_view url, const NormalizationConfig& cfg) {
    if (!cfg.repo_base_url.empty() && url.starts_with(cfg.repo_base_url)) {
        return std::string(url.substr(cfg.repo_base_url.size()));
    }
    return std::string(url);
}

std::string truncate_tokens(std::string_view s, int k) {
    std::string out;
    out.reserve(s.size());
    int tokens = 0;
    size_t i = 0;
    while (i < s.size() && tokens < k) {
        while (i < s.size() && is_space_char(s[i])) ++i;
        const size_t begin = i;
        while (i < s.size() && !is_space_char(s[i])) ++i;
        if (i > begin) {
            if (tokens) out.push_back(' ');
            out.append(s.substr(begin, i - begin));
            ++tokens;
        }
    }
    return out;
}

const std::string& CleanedFields::get(Field f) const {
    switch (f) {
        case Field::created_at: return created_at;
        case Field::author_association: return author_association;
        case Field::repository: return repository;
        case Field::title: return title;
        case Field::body: return body;
    }
    return title;
}

namespace {

std::string clean_plain(std::string_view s) {
    return squeeze_whitespace(lowercase(strip_chars(s)));
}

std::string clean_with_concepts(std::string_view s, const NormalizationConfig& cfg) {
    return squeeze_whitespace(lowercase(strip_chars(normalize_concepts(s, cfg))));
}

}  // namespace

CleanedFields clean_fields(const IssueRecord& r, const NormalizationConfig& cfg) {
    CleanedFields f;
    f.created_at = clean_plain(r.created_at);
    f.author_association = clean_plain(r.author_association);
    f.repository = clean_plain(strip_repo_base(r.repository_url, cfg));
    f.title = clean_with_concepts(r.title, cfg);
    f.body = clean_with_concepts(r.body, cfg);
    return f;
}

std::string join_and_truncate(const CleanedFields& f, const NormalizationConfig& cfg) {
    std::string joined;
    for (Field field : all_fields()) {
        if (std::find(cfg.field_selection.begin(), cfg.field_selection.end(), field) ==
            cfg.field_selection.end()) {
            continue;
        }
        const std::string& part = f.get(field);
        if (part.empty()) continue;
        if (!joined.empty()) joined.push_back(' ');
        joined.append(part);
    }
    return truncate_tokens(squeeze_whitespace(normalize_concepts(joined, cfg)), cfg.max_tokens);
}

std::string clean_free_text(std::string_view s, const NormalizationConfig& cfg) {
    return squeeze_whitespace(normalize_concepts(clean_with_concepts(s, cfg), cfg));
}

CleanRecord clean_record(const IssueRecord& r, const NormalizationConfig& cfg) {
    const int code = static_cast<int>(r.label);
    if (code < 0 || code >= kNumLabels) {
        throw data_error("cannot encode label code " + std::to_string(code));
    }
    return CleanRecord{join_and_truncate(clean_fields(r, cfg), cfg), code};
}

TokenCounter cleaning_token_counter(const NormalizationConfig& cfg) {
    return [cfg](const std::string& s) { return whitespace_token_count(clean_free_text(s, cfg)); };
}

}  // namespace itk
