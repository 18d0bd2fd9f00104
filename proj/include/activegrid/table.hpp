// table.hpp: CSV tables, JSON records and the run metadata sidecar.

#pragma once

#include "activegrid/config.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace activegrid::cli {

inline constexpr const char* version = "0.1.0";

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    [[nodiscard]] long column(const std::string& name) const;
    /// Cell by column name; throws std::out_of_range for an unknown column.
    [[nodiscard]] const std::string& at(std::size_t row, const std::string& name) const;
    [[nodiscard]] double number(std::size_t row, const std::string& name) const;
};

/// Shortest exact round-trip form ("%.17g"); "nan", "inf", "-inf" for non-finite values.
[[nodiscard]] std::string format_double(double x);

/// Inverse of format_double for table cells.
[[nodiscard]] double parse_double(const std::string& cell);

/// RFC 4180 style: fields containing ',', '"' or newlines are quoted.
[[nodiscard]] std::string to_csv(const Table& table);
[[nodiscard]] Table parse_csv(const std::string& text);

/// Writes through a temporary file and a rename.
void write_text_file(const std::string& path, const std::string& text);
[[nodiscard]] std::string read_text_file(const std::string& path);

[[nodiscard]] nlohmann::json to_json(const NetworkSpec& spec);
[[nodiscard]] nlohmann::json to_json(const RunConfig& config);

/// Stable 64-bit FNV-1a digest of a string, in hex.
[[nodiscard]] std::string fingerprint(const std::string& text);

/// Metadata sidecar: versions, command, master seed, fingerprint and all resolved settings.
[[nodiscard]] nlohmann::json run_metadata(const std::string& command, const RunConfig& config,
                                          const std::string& plan_fingerprint);

}  // namespace activegrid::cli
