#pragma once

// Experiment configuration: line-oriented `section.key = value` text with
// `#` comments. Every key has a documented default; parsing rejects unknown
// keys, malformed numbers and out-of-range values with distinct diagnostics.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lyap/matrix.hpp"

namespace lyaplab {

enum class ConfigErrorKind { syntax, unknown_key, duplicate_key, malformed_number, out_of_range, invalid_value, io };

std::string to_string(ConfigErrorKind kind);

class ConfigError : public std::runtime_error {
public:
    ConfigError(ConfigErrorKind kind, std::string key, std::size_t line, const std::string& detail);

    ConfigErrorKind kind() const noexcept { return kind_; }
    const std::string& key() const noexcept { return key_; }
    std::size_t line() const noexcept { return line_; }

private:
    ConfigErrorKind kind_;
    std::string key_;
    std::size_t line_;
};

struct KeyDoc {
    std::string key;
    std::string default_value;
    std::string description;
};

/// Schema of every accepted key with its default, in documentation order.
const std::vector<KeyDoc>& config_schema();

class Config {
public:
    /// Parses and validates; every key absent from `text` takes its default.
    static Config parse(std::string_view text);
    static Config load(const std::filesystem::path& path);

    /// Sorted `key = value` lines of the fully resolved configuration.
    std::string canonical_text() const;
    /// FNV-1a 64 of canonical_text(), 16 hex digits.
    std::string hash() const;
    const std::map<std::string, std::string>& values() const noexcept { return values_; }

    const std::string& text(const std::string& key) const;
    double real(const std::string& key) const;
    std::int64_t integer(const std::string& key) const;
    std::uint64_t unsigned_integer(const std::string& key) const;
    std::vector<double> real_list(const std::string& key) const;
    std::vector<std::int64_t> integer_list(const std::string& key) const;
    lyap::RealMatrix matrix(const std::string& key) const;
    std::vector<lyap::RealMatrix> matrix_list(const std::string& key) const;

    /// Line of `key` in the source text, 0 for defaults.
    std::size_t line_of(const std::string& key) const;

    /// --seed override; keeps the resolved config (and hash) consistent.
    void override_seed(std::uint64_t seed);

    const std::filesystem::path& base_dir() const noexcept { return base_dir_; }

private:
    std::map<std::string, std::string> values_;
    std::map<std::string, std::size_t> lines_;
    std::filesystem::path base_dir_;
};

/// FNV-1a 64-bit.
std::uint64_t fnv1a64(std::string_view data);

/// Parses a matrix written as rows separated by ';', entries by spaces or commas.
lyap::RealMatrix parse_matrix_text(std::string_view text);

}  // namespace lyaplab
