#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace rtree::cli {

enum class Format { csv, json, gnuplot };

Format parse_format(const std::string& name);

struct RunConfig {
    nlohmann::json document;  // measure/tree document plus a "command" section
    Format format = Format::csv;
    unsigned threads = 1;
    std::optional<std::uint64_t> seed;  // overrides document["seed"]
};

enum ExitCode : int {
    ok = 0,
    failure = 1,
    schema_violation = 2,
    numeric_refusal = 3,
    stale_artifact = 4,
};

/// The document every artifact is keyed on: the config with the effective
/// seed filled in.
nlohmann::json effective_document(const RunConfig& cfg);
/// FNV-1a (64 bit) of the compact dump of the effective document.
std::uint64_t config_hash(const RunConfig& cfg);
std::string hash_hex(std::uint64_t h);

/// "%.17g", with nan/inf spelled out.
std::string format_number(double v);

std::vector<std::string> command_names();

/// Runs `command` (empty: document["command"]["name"]) and writes the
/// artifact to `out`. Diagnostics go to `err`.
int run(const std::string& command, const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Compares the hash embedded in an artifact with the hash of `cfg`.
int verify_artifact(const std::string& artifact, const RunConfig& cfg, std::ostream& err);

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit draw, so the
/// stream only depends on the generator algorithm.
double unit_interval(std::uint64_t draw);

}  // namespace rtree::cli
