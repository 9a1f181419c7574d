#pragma once

#include <stdexcept>
#include <string>

#include "json.hpp"
#include "rtree/measure.hpp"
#include "rtree/tree.hpp"

namespace rtree {

/// Schema violation in an input document; path() names the offending field
/// in JSON-pointer style, e.g. "/atoms/2/b".
class SchemaError : public std::invalid_argument {
public:
    SchemaError(std::string path, const std::string& what)
        : std::invalid_argument(path + ": " + what), path_(std::move(path)) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

struct MeasureDocument {
    AtomicMeasure measure;
    MeasureClassBounds bounds;
};

/// {"epsilon", "C", "atoms": [{"t", "b"|"beta"}], "tail": {"kind": ...},
///  "support": "half-line"|"whole-line"}. b may be the string "inf".
MeasureDocument measure_from_json(const nlohmann::json& j, const std::string& path = "");
nlohmann::json measure_to_json(const AtomicMeasure& mu, const MeasureClassBounds& bounds);
nlohmann::json atoms_to_json(const std::vector<Atom>& atoms);

/// {"params": [{"t", "b"}], "epsilon", "C"}
TreeSpec tree_from_json(const nlohmann::json& j, const std::string& path = "");
nlohmann::json tree_to_json(const TreeSpec& tree);

/// {"values": [int...], "max": int (optional)}
DiscreteBranchSequence sequence_from_json(const nlohmann::json& j, const std::string& path = "");

}  // namespace rtree
