#pragma once

// Output bundle: CSV tables with frozen headers, a JSON manifest carrying the
// fully resolved config and per-table content hashes, optional SVG plots and
// a plain-text log. Data files carry no timestamps; the manifest's timestamp
// is excluded from hashing. The bundle directory is written atomically
// (temporary directory + rename).

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace thresh {

std::uint64_t fnv1a64(std::string_view data);
std::string fnv1a64_hex(std::string_view data);

// Fixed-format float for data files: shortest of %.12g.
std::string format_number(double v);

struct CsvTable {
    std::string name; // file stem
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> cells);
    std::string render() const; // header + rows, '\n' line ends
};

class Bundle {
  public:
    explicit Bundle(std::string kind, std::string resolved_config_json);

    CsvTable& table(const std::string& name, std::vector<std::string> columns);
    void add_plot(const std::string& name, std::string svg);
    void log(const std::string& line);
    // Extra manifest fields (JSON text fragments are not accepted; values are
    // passed as already-serialized JSON via set_manifest_json or as scalars).
    void set_manifest_json(const std::string& key, const std::string& json_text);
    void set_manifest(const std::string& key, const std::string& value);
    void set_manifest(const std::string& key, double value);
    void set_manifest(const std::string& key, bool value);

    // Writes everything under out_dir atomically; an existing bundle at the
    // same path is replaced.
    void write(const std::filesystem::path& out_dir) const;

  private:
    std::string kind_;
    std::string config_json_;
    std::vector<CsvTable> tables_;
    std::vector<std::pair<std::string, std::string>> plots_;
    std::vector<std::string> log_lines_;
    std::vector<std::pair<std::string, std::string>> manifest_extra_; // key -> JSON text
};

} // namespace thresh
