#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lfgen/tree.hpp"

namespace lfgen {

/// One JSON-lines tree record: {"T": 6, "depths": [2,1,3]}. `source` is the
/// index of the input record a sampled tree was derived from, when known.
struct TreeRecord {
    DepthSeq seq;
    std::optional<std::int64_t> source;

    friend bool operator==(const TreeRecord&, const TreeRecord&) = default;
};

enum class TreeFormat { JsonLines, Newick };

inline constexpr std::string_view kTreesFormatName = "lfgen-trees";
inline constexpr int kTreesFormatVersion = 1;

/// Header line written at the top of every JSON-lines tree file.
std::string jsonl_header();

std::string to_jsonl(const TreeRecord& rec);

/// Parses one record line. Throws Error{FormatError} on malformed input and
/// Error{InvalidDepth} on out-of-range depths.
TreeRecord parse_jsonl_record(std::string_view line);

/// Reads a whole JSON-lines document: blank lines and the header are skipped.
std::vector<TreeRecord> read_jsonl(std::string_view text);

std::string write_jsonl(const std::vector<TreeRecord>& records);

/// JSON-lines when the first meaningful character is '{', Newick otherwise.
TreeFormat sniff_format(std::string_view text);

/// Reads trees from either format.
std::vector<TreeRecord> read_trees(std::string_view text, std::optional<TreeFormat> format = {});

/// Newick output: a bracketed header comment line then one tree per line.
std::string write_newick_lines(const std::vector<TreeRecord>& records);

} // namespace lfgen
