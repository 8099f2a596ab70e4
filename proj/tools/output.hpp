#pragma once

#include <deque>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace naggs::cli {

enum class OutputFormat { csv, json };

/// A rectangular result table. Cells are JSON scalars so the same rows can be written
/// as CSV or JSON; null cells become empty CSV fields.
struct Table {
    std::string stem;
    std::vector<std::string> columns;
    std::vector<std::vector<nlohmann::json>> rows;

    void add_row(std::vector<nlohmann::json> row);
};

/// Everything a command produces. Nothing touches the filesystem until write_all, so a
/// configuration error detected mid-run leaves the output directory untouched.
struct OutputBundle {
    // A deque keeps references returned by table() valid as more tables are added.
    std::deque<Table> tables;
    /// Extra JSON documents written verbatim (name includes the extension).
    std::vector<std::pair<std::string, nlohmann::json>> documents;

    Table& table(std::string stem, std::vector<std::string> columns);
};

/// Comma-separated text with a header row and LF endings. Doubles use the shortest
/// round-trip representation.
std::string to_csv(const Table& t);
nlohmann::json to_json(const Table& t);

/// Writes every table (as <stem>.csv or <stem>.json) and document, each followed by a
/// <file>.meta.json sidecar holding `meta`. Returns the written paths.
std::vector<std::filesystem::path> write_all(const OutputBundle& bundle,
                                             const std::filesystem::path& dir, OutputFormat format,
                                             const nlohmann::json& meta);

}  // namespace naggs::cli
