#include "thresh/bundle.hpp"

#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace thresh {

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string fnv1a64_hex(std::string_view data) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(data)));
    return buf;
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void CsvTable::add_row(std::vector<std::string> cells) {
    if (cells.size() != columns.size())
        throw std::invalid_argument("CsvTable: row width mismatch in '" + name + "'");
    rows.push_back(std::move(cells));
}

std::string CsvTable::render() const {
    std::string out;
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i) out += ',';
        out += columns[i];
    }
    out += '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += row[i];
        }
        out += '\n';
    }
    return out;
}

Bundle::Bundle(std::string kind, std::string resolved_config_json)
    : kind_(std::move(kind)), config_json_(std::move(resolved_config_json)) {}

CsvTable& Bundle::table(const std::string& name, std::vector<std::string> columns) {
    for (auto& t : tables_)
        if (t.name == name) return t;
    tables_.push_back(CsvTable{name, std::move(columns), {}});
    return tables_.back();
}

void Bundle::add_plot(const std::string& name, std::string svg) {
    plots_.emplace_back(name, std::move(svg));
}

void Bundle::log(const std::string& line) { log_lines_.push_back(line); }

void Bundle::set_manifest_json(const std::string& key, const std::string& json_text) {
    manifest_extra_.emplace_back(key, json_text);
}
void Bundle::set_manifest(const std::string& key, const std::string& value) {
    manifest_extra_.emplace_back(key, nlohmann::json(value).dump());
}
void Bundle::set_manifest(const std::string& key, double value) {
    manifest_extra_.emplace_back(key, nlohmann::json(value).dump());
}
void Bundle::set_manifest(const std::string& key, bool value) {
    manifest_extra_.emplace_back(key, nlohmann::json(value).dump());
}

void Bundle::write(const std::filesystem::path& out_dir) const {
    namespace fs = std::filesystem;
    const fs::path tmp = out_dir.string() + ".tmp-" + std::to_string(::getpid());
    fs::remove_all(tmp);
    fs::create_directories(tmp);

    nlohmann::ordered_json manifest;
    manifest["version"] = 1;
    manifest["kind"] = kind_;
    manifest["config"] = nlohmann::ordered_json::parse(config_json_);

    nlohmann::ordered_json tables = nlohmann::ordered_json::object();
    for (const auto& t : tables_) {
        const std::string body = t.render();
        std::ofstream f(tmp / (t.name + ".csv"), std::ios::binary);
        f << body;
        if (!f) throw std::runtime_error("bundle: failed writing table " + t.name);
        nlohmann::ordered_json entry;
        entry["path"] = t.name + ".csv";
        entry["rows"] = t.rows.size();
        entry["fnv1a64"] = fnv1a64_hex(body);
        tables[t.name] = entry;
    }
    manifest["tables"] = tables;

    for (const auto& [key, json_text] : manifest_extra_)
        manifest[key] = nlohmann::ordered_json::parse(json_text);

    if (!plots_.empty()) {
        fs::create_directories(tmp / "plots");
        nlohmann::ordered_json plots = nlohmann::ordered_json::array();
        for (const auto& [name, svg] : plots_) {
            std::ofstream f(tmp / "plots" / (name + ".svg"), std::ios::binary);
            f << svg;
            plots.push_back("plots/" + name + ".svg");
        }
        manifest["plots"] = plots;
    }

    {
        std::ofstream f(tmp / "log.txt", std::ios::binary);
        for (const auto& line : log_lines_) f << line << '\n';
    }

    // The only timestamp in the bundle; not covered by any hash.
    const auto now = std::chrono::system_clock::now();
    manifest["timestamp_unix"] =
        std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();

    {
        std::ofstream f(tmp / "manifest.json", std::ios::binary);
        f << manifest.dump(2) << '\n';
        if (!f) throw std::runtime_error("bundle: failed writing manifest");
    }

    fs::remove_all(out_dir);
    fs::create_directories(out_dir.parent_path().empty() ? fs::path(".")
                                                         : out_dir.parent_path());
    fs::rename(tmp, out_dir);
}

} // namespace thresh
