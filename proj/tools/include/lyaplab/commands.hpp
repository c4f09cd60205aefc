#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "lyap/cocycle.hpp"
#include "lyap/random_products.hpp"
#include "lyaplab/config.hpp"

namespace lyaplab {

enum ExitStatus : int { kExitOk = 0, kExitValidation = 1, kExitRefusal = 2 };

struct RunOptions {
    std::filesystem::path out_dir = "out";
    unsigned threads = 1;
};

const std::vector<std::string>& subcommands();

/// Runs one subcommand; data go to files under opts.out_dir, diagnostics to `err`.
int run(const std::string& subcommand, const Config& cfg, const RunOptions& opts, std::ostream& err);

lyap::CocycleFamily build_family(const Config& cfg);
lyap::MatrixDistribution build_distribution(const Config& cfg);

/// Reads matrices for ap-verify: rows of whitespace-separated decimals, one
/// matrix per block, blocks separated by blank lines.
std::vector<lyap::RealMatrix> read_matrix_file(const std::filesystem::path& path);

}  // namespace lyaplab
