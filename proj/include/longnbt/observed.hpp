#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "longnbt/common.hpp"

namespace longnbt {

struct Entry {
    index_t x;  // left (row) index
    index_t y;  // right (column) index
    double a;   // stored weight, already rescaled by sqrt(mn)/d
};

/// Sparse rescaled observation A = (sqrt(mn)/d) X o M together with the
/// sampling metadata (n, m, d). Entries are row-major and duplicate-free.
struct ObservedMatrix {
    index_t n = 0;
    index_t m = 0;
    double d = 0.0;
    std::vector<Entry> entries;

    double sampling_probability() const;  // p = d / sqrt(mn)
    double scale() const;                 // sqrt(mn) / d
};

struct RawEntry {
    index_t x;
    index_t y;
    double value;
};

/// Validates, canonicalizes (row-major) and rescales raw observations.
/// With pre_scaled the weights are stored verbatim.
ObservedMatrix ingest(index_t n, index_t m, double d, std::vector<RawEntry> raw_entries,
                      bool pre_scaled = false);

/// Text format: header "n m d", then "x y value" per entry with raw
/// (unscaled) values; '#' starts a comment. Writer emits row-major order.
ObservedMatrix read_observed(std::istream& in);
ObservedMatrix read_observed_file(const std::string& path);
void write_observed(std::ostream& out, const ObservedMatrix& obs);
void write_observed_file(const std::string& path, const ObservedMatrix& obs);

}  // namespace longnbt
