#include "itk/csv.h"

#include <istream>
#include <ostream>

#include "itk/errors.h"

namespace itk::csv {

std::optional<std::vector<std::string>> Reader::next_row() {
    int c = in_.get();
    if (c == EOF) return std::nullopt;

    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    ++row_number_;

    while (true) {
        if (quoted) {
            if (c == EOF) {
                throw data_error("row " + std::to_string(row_number_) +
                                 ": unterminated quoted field");
            }
            if (c == '"') {
                const int peek = in_.peek();
                if (peek == '"') {
                    in_.get();
                    field.push_back('"');
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(static_cast<char>(c));
            }
        } else {
            if (c == EOF || c == '\n') {
                break;
            }
            if (c == '\r' && in_.peek() == '\n') {
                in_.get();
                break;
            }
            if (c == ',') {
                fields.push_back(std::move(field));
                field.clear();
            } else if (c == '"' && field.empty()) {
                quoted = true;
            } else if (c == '"') {
                throw data_error("row " + std::to_string(row_number_) +
                                 ": quote inside unquoted field");
            } else {
                field.push_back(static_cast<char>(c));
            }
        }
        c = in_.get();
    }
    fields.push_back(std::move(field));
    return fields;
}

std::string escape_field(const std::string& field) {
    const bool needs_quotes =
        field.find_first_of(",\"\n\r") != std::string::npos;
    if (!needs_quotes) return field;
    std::string out;
    out.reserve(field.size() + 2);
    out.push_back('"');
    for (char ch : field) {
        if (ch == '"') out.push_back('"');
        out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (size_t i = 0; i < fields.size(); ++i) {
        if (i) out.put(',');
        out << escape_field(fields[i]);
    }
    out.put('\n');
}

}  // namespace itk::csv
