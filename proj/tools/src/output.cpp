#include "lyaplab/output.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace lyaplab {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

ordered_json json_cell(const Cell& c) {
    if (const auto* i = std::get_if<std::int64_t>(&c)) return *i;
    if (const auto* b = std::get_if<bool>(&c)) return *b;
    if (const auto* s = std::get_if<std::string>(&c)) return *s;
    const double v = std::get<double>(c);
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

void Table::add(std::vector<Cell> row) {
    if (row.size() != columns.size()) throw std::logic_error("table '" + name + "': row width mismatch");
    rows.push_back(std::move(row));
}

std::string format_real(double v, int precision) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    return buf;
}

OutputWriter::OutputWriter(const Config& cfg, std::filesystem::path dir, std::string prefix)
    : cfg_(cfg),
      dir_(std::move(dir)),
      prefix_(std::move(prefix)),
      precision_(static_cast<int>(cfg.integer("output.precision"))),
      json_(cfg.text("output.format") == "json") {}

std::string OutputWriter::render_csv(const Table& table) const {
    std::string out;
    out += std::string("# ") + kToolName + " " + kToolVersion + " " + table.name + "\n";
    out += "# config_hash = " + cfg_.hash() + "\n";
    for (const auto& [k, v] : cfg_.values()) out += "# " + k + " = " + v + "\n";
    for (std::size_t i = 0; i < table.columns.size(); ++i) out += (i ? "," : "") + table.columns[i];
    out += "\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ",";
            const auto& c = row[i];
            if (const auto* iv = std::get_if<std::int64_t>(&c))
                out += std::to_string(*iv);
            else if (const auto* b = std::get_if<bool>(&c))
                out += *b ? "true" : "false";
            else if (const auto* s = std::get_if<std::string>(&c))
                out += csv_escape(*s);
            else
                out += format_real(std::get<double>(c), precision_);
        }
        out += "\n";
    }
    return out;
}

std::string OutputWriter::render_json(const Table& table) const {
    ordered_json doc;
    ordered_json header;
    header["tool"] = kToolName;
    header["version"] = kToolVersion;
    header["config_hash"] = cfg_.hash();
    ordered_json config = ordered_json::object();
    for (const auto& [k, v] : cfg_.values()) config[k] = v;
    header["config"] = std::move(config);
    doc["header"] = std::move(header);
    doc["table"] = table.name;
    doc["columns"] = table.columns;
    ordered_json rows = ordered_json::array();
    for (const auto& row : table.rows) {
        ordered_json r = ordered_json::array();
        for (const auto& c : row) r.push_back(json_cell(c));
        rows.push_back(std::move(r));
    }
    doc["rows"] = std::move(rows);
    return doc.dump(1) + "\n";
}

WrittenFile OutputWriter::write(const Table& table) const {
    const std::string name = prefix_ + "_" + table.name + (json_ ? ".json" : ".csv");
    write_file(dir_ / name, json_ ? render_json(table) : render_csv(table));
    return {name, table.rows.size()};
}

void write_manifest(const std::filesystem::path& dir, const std::string& subcommand, const Config& cfg,
                    const std::vector<StageTime>& stages, const std::vector<WrittenFile>& files, int exit_status) {
    ordered_json m;
    m["tool"] = kToolName;
    m["version"] = kToolVersion;
    m["subcommand"] = subcommand;
    m["config_hash"] = cfg.hash();
    ordered_json st = ordered_json::array();
    for (const auto& s : stages) st.push_back({{"stage", s.name}, {"wall_seconds", s.seconds}});
    m["stages"] = std::move(st);
    ordered_json fs = ordered_json::array();
    for (const auto& f : files) fs.push_back({{"file", f.name}, {"rows", f.rows}});
    m["files"] = std::move(fs);
    m["exit_status"] = exit_status;
    write_file(dir / "manifest.json", m.dump(1) + "\n");
}

}  // namespace lyaplab
