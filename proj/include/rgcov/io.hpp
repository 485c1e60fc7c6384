#pragma once

#include <string>
#include <vector>

#include "rgcov/types.hpp"

namespace rgcov {

// ---------------------------------------------------------------------------
// CSV convention: rows are time points, columns are series.  An optional
// leading non-numeric column (commonly "date"/"time") is carried as labels.
// In-memory panels are transposed relative to this: n series x T columns.
// ---------------------------------------------------------------------------
struct SeriesTable {
    std::vector<std::string> names;   // one per series
    std::vector<std::string> dates;   // empty when the CSV has no label column
    Matrix values;                    // n x T
};

SeriesTable series_from_csv(const std::string& text);
// Serializes with 17 significant digits; emits a "date" column when labels
// are present.
std::string series_to_csv(const SeriesTable& table);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// Stable 64-bit content digest (FNV-1a), hex-encoded; used for run manifests.
std::string content_digest(const std::string& content);

}  // namespace rgcov
