#include "lfgen/tree_io.hpp"

#include <json.hpp>

#include "lfgen/errors.hpp"

namespace lfgen {

using nlohmann::json;

std::string jsonl_header()
{
    json header;
    header["format"] = kTreesFormatName;
    header["version"] = kTreesFormatVersion;
    return header.dump();
}

std::string to_jsonl(const TreeRecord& rec)
{
    json j;
    j["T"] = rec.seq.height;
    j["depths"] = rec.seq.depths;
    if (rec.source)
        j["source"] = *rec.source;
    return j.dump();
}

TreeRecord parse_jsonl_record(std::string_view line)
{
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::FormatError, std::string("malformed JSON record: ") + e.what());
    }
    if (!j.is_object() || !j.contains("T") || !j.contains("depths"))
        throw Error(ErrorKind::FormatError, "record needs fields \"T\" and \"depths\"");
    const auto& t = j["T"];
    const auto& d = j["depths"];
    if (!t.is_number_integer() || !d.is_array())
        throw Error(ErrorKind::FormatError, "\"T\" must be an integer and \"depths\" an array");

    TreeRecord rec;
    rec.seq.height = t.get<int>();
    rec.seq.depths.reserve(d.size());
    for (const auto& v : d) {
        if (!v.is_number_integer())
            throw Error(ErrorKind::FormatError, "depths must be integers");
        rec.seq.depths.push_back(v.get<int>());
    }
    if (j.contains("source")) {
        if (!j["source"].is_number_integer())
            throw Error(ErrorKind::FormatError, "\"source\" must be an integer");
        rec.source = j["source"].get<std::int64_t>();
    }
    rec.seq.validate();
    return rec;
}

std::vector<TreeRecord> read_jsonl(std::string_view text)
{
    std::vector<TreeRecord> out;
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos)
            end = text.size();
        auto line = text.substr(start, end - start);
        start = end + 1;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos)
            continue;
        if (line.find("\"format\"") != std::string_view::npos) {
            const json header = json::parse(line, nullptr, false);
            if (header.is_object() && header.contains("format") && !header.contains("depths"))
                continue;
        }
        out.push_back(parse_jsonl_record(line));
    }
    return out;
}

std::string write_jsonl(const std::vector<TreeRecord>& records)
{
    std::string out = jsonl_header();
    out += '\n';
    for (const auto& rec : records) {
        out += to_jsonl(rec);
        out += '\n';
    }
    return out;
}

TreeFormat sniff_format(std::string_view text)
{
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string_view::npos && text[first] == '{')
        return TreeFormat::JsonLines;
    return TreeFormat::Newick;
}

std::vector<TreeRecord> read_trees(std::string_view text, std::optional<TreeFormat> format)
{
    const TreeFormat fmt = format.value_or(sniff_format(text));
    if (fmt == TreeFormat::JsonLines)
        return read_jsonl(text);
    std::vector<TreeRecord> out;
    for (const auto& tree : parse_newick_lines(text))
        out.push_back(TreeRecord{tree_to_depths(tree), std::nullopt});
    return out;
}

std::string write_newick_lines(const std::vector<TreeRecord>& records)
{
    std::string out = "[";
    out += kTreesFormatName;
    out += " newick v" + std::to_string(kTreesFormatVersion) + "]\n";
    for (const auto& rec : records) {
        out += write_newick(depths_to_tree(rec.seq));
        out += '\n';
    }
    return out;
}

} // namespace lfgen
