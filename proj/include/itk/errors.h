#pragma once

#include <stdexcept>
#include <string>

namespace itk {

// I/O failures: unreadable or unwritable files.
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input does not match the expected schema (missing column, bad header).
struct schema_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Structurally broken data inside an otherwise readable file.
struct data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Model container problems: bad magic, wrong version, truncation, checksum.
struct model_format_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace itk
