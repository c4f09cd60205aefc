#pragma once

// Data tables and their CSV/JSON serialization. Every data file starts with
// a header carrying the config hash and the resolved config; reals are
// written with at least 17 significant digits.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "lyaplab/config.hpp"

namespace lyaplab {

inline constexpr const char* kToolName = "lyaplab";
inline constexpr const char* kToolVersion = "0.1.0";

using Cell = std::variant<std::int64_t, double, std::string, bool>;

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    Table(std::string table_name, std::vector<std::string> cols)
        : name(std::move(table_name)), columns(std::move(cols)) {}
    void add(std::vector<Cell> row);
};

/// Integer cell from any unsigned count.
inline Cell cell(std::size_t v) { return static_cast<std::int64_t>(v); }

std::string format_real(double v, int precision);

struct WrittenFile {
    std::string name;
    std::size_t rows;
};

class OutputWriter {
public:
    OutputWriter(const Config& cfg, std::filesystem::path dir, std::string prefix);

    /// Writes `<prefix>_<table>.csv|json` and returns its name and row count.
    WrittenFile write(const Table& table) const;

    std::string render_csv(const Table& table) const;
    std::string render_json(const Table& table) const;

private:
    const Config& cfg_;
    std::filesystem::path dir_;
    std::string prefix_;
    int precision_;
    bool json_;
};

struct StageTime {
    std::string name;
    double seconds;
};

/// manifest.json: tool version, config hash, stage wall times, files and row counts.
void write_manifest(const std::filesystem::path& dir, const std::string& subcommand, const Config& cfg,
                    const std::vector<StageTime>& stages, const std::vector<WrittenFile>& files, int exit_status);

}  // namespace lyaplab
