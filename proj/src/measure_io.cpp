#include "rtree/measure_io.hpp"

#include <cmath>
#include <limits>
#include <variant>

namespace rtree {

using nlohmann::json;

namespace {

const json& field(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) throw SchemaError(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) throw SchemaError(path + "/" + key, "missing required field");
    return *it;
}

double number(const json& j, const std::string& path) {
    if (!j.is_number()) throw SchemaError(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw SchemaError(path, "expected a finite number");
    return v;
}

double number_field(const json& j, const std::string& key, const std::string& path) {
    return number(field(j, key, path), path + "/" + key);
}

double optional_number(const json& j, const std::string& key, const std::string& path, double fallback) {
    if (!j.contains(key)) return fallback;
    return number(j.at(key), path + "/" + key);
}

Atom atom_from_json(const json& j, const std::string& path) {
    if (!j.is_object()) throw SchemaError(path, "atom must be an object");
    const double t = number_field(j, "t", path);
    const bool has_b = j.contains("b");
    const bool has_beta = j.contains("beta");
    if (has_b == has_beta) throw SchemaError(path, "exactly one of \"b\" and \"beta\" is required");
    try {
        if (has_b) {
            const json& b = j.at("b");
            if (b.is_string()) {
                if (b.get<std::string>() != "inf") throw SchemaError(path + "/b", "only the string \"inf\" is accepted");
                return Atom::from_b(t, std::numeric_limits<double>::infinity());
            }
            return Atom::from_b(t, number(b, path + "/b"));
        }
        const double beta = number(j.at("beta"), path + "/beta");
        if (!(beta >= 1.0)) throw SchemaError(path + "/beta", "weight must be >= 1");
        return Atom{t, beta};
    } catch (const std::domain_error& e) {
        throw SchemaError(path + (has_b ? "/b" : "/beta"), e.what());
    }
}

std::vector<Atom> atoms_from_json(const json& j, const std::string& path) {
    if (!j.is_array()) throw SchemaError(path, "expected an array of atoms");
    std::vector<Atom> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(atom_from_json(j[i], path + "/" + std::to_string(i)));
    for (std::size_t i = 1; i < out.size(); ++i)
        if (!(out[i].t > out[i - 1].t))
            throw SchemaError(path + "/" + std::to_string(i) + "/t", "atom positions must increase strictly");
    return out;
}

Tail tail_from_json(const json& j, const std::string& path, std::size_t explicit_count) {
    if (!j.is_object()) throw SchemaError(path, "tail must be an object");
    const json& kind_j = field(j, "kind", path);
    if (!kind_j.is_string()) throw SchemaError(path + "/kind", "expected a string");
    const auto kind = kind_j.get<std::string>();
    if (kind == "none") return NoTail{};
    if (kind == "periodic") {
        PeriodicTail p;
        p.start = number_field(j, "start", path);
        p.period = number_field(j, "period", path);
        if (!(p.period > 0.0)) throw SchemaError(path + "/period", "period must be positive");
        p.cell = atoms_from_json(field(j, "cell", path), path + "/cell");
        if (p.cell.empty()) throw SchemaError(path + "/cell", "cell must contain at least one atom");
        for (std::size_t i = 0; i < p.cell.size(); ++i)
            if (!(p.cell[i].t > 0.0 && p.cell[i].t < p.period))
                throw SchemaError(path + "/cell/" + std::to_string(i) + "/t", "cell offsets must lie in (0, period)");
        return p;
    }
    if (kind == "gaps") {
        GapTail g;
        g.beta = number_field(j, "beta", path);
        if (!(g.beta >= 1.0)) throw SchemaError(path + "/beta", "weight must be >= 1");
        g.first_t = number_field(j, "first_t", path);
        g.first_index = explicit_count + 1;
        if (j.contains("first_index")) {
            const json& fi = j.at("first_index");
            if (!fi.is_number_integer() || fi.get<long long>() != static_cast<long long>(explicit_count + 1))
                throw SchemaError(path + "/first_index", "must equal the number of explicit atoms plus one");
        }
        return g;
    }
    throw SchemaError(path + "/kind", "unknown tail kind \"" + kind + "\"");
}

json atom_to_json(const Atom& a) { return json{{"t", a.t}, {"beta", a.beta}}; }

}  // namespace

json atoms_to_json(const std::vector<Atom>& atoms) {
    json arr = json::array();
    for (const auto& a : atoms) arr.push_back(atom_to_json(a));
    return arr;
}

MeasureDocument measure_from_json(const json& j, const std::string& path) {
    if (!j.is_object()) throw SchemaError(path, "measure document must be an object");
    MeasureDocument doc;
    doc.bounds.epsilon = number_field(j, "epsilon", path);
    if (!(doc.bounds.epsilon > 0.0)) throw SchemaError(path + "/epsilon", "must be positive");
    doc.bounds.C = optional_number(j, "C", path, 2.0);
    if (!(doc.bounds.C >= 2.0)) throw SchemaError(path + "/C", "must be >= 2");
    auto atoms = atoms_from_json(field(j, "atoms", path), path + "/atoms");

    SupportClass support = SupportClass::half_line;
    if (j.contains("support")) {
        const json& s = j.at("support");
        if (!s.is_string()) throw SchemaError(path + "/support", "expected a string");
        const auto v = s.get<std::string>();
        if (v == "whole-line") support = SupportClass::whole_line;
        else if (v != "half-line") throw SchemaError(path + "/support", "expected \"half-line\" or \"whole-line\"");
    }
    Tail tail = NoTail{};
    if (j.contains("tail")) tail = tail_from_json(j.at("tail"), path + "/tail", atoms.size());
    try {
        doc.measure = AtomicMeasure(std::move(atoms), doc.bounds.epsilon, support, std::move(tail));
    } catch (const std::invalid_argument& e) {
        throw SchemaError(path.empty() ? "/" : path, e.what());
    }
    return doc;
}

json measure_to_json(const AtomicMeasure& mu, const MeasureClassBounds& bounds) {
    json j;
    j["epsilon"] = bounds.epsilon;
    j["C"] = bounds.C;
    j["support"] = mu.support() == SupportClass::half_line ? "half-line" : "whole-line";
    j["atoms"] = atoms_to_json(mu.atoms());
    const Tail tail = mu.tail();
    if (const auto* p = std::get_if<PeriodicTail>(&tail)) {
        j["tail"] = {{"kind", "periodic"}, {"start", p->start}, {"period", p->period}, {"cell", atoms_to_json(p->cell)}};
    } else if (const auto* g = std::get_if<GapTail>(&tail)) {
        j["tail"] = {{"kind", "gaps"}, {"beta", g->beta}, {"first_index", g->first_index}, {"first_t", g->first_t}};
    } else {
        j["tail"] = {{"kind", "none"}};
    }
    return j;
}

TreeSpec tree_from_json(const json& j, const std::string& path) {
    if (!j.is_object()) throw SchemaError(path, "tree document must be an object");
    TreeSpec tree;
    tree.epsilon = number_field(j, "epsilon", path);
    if (!(tree.epsilon > 0.0)) throw SchemaError(path + "/epsilon", "must be positive");
    tree.C = optional_number(j, "C", path, 2.0);
    const json& params = field(j, "params", path);
    if (!params.is_array()) throw SchemaError(path + "/params", "expected an array");
    for (std::size_t i = 0; i < params.size(); ++i) {
        const std::string p = path + "/params/" + std::to_string(i);
        const double t = number_field(params[i], "t", p);
        const json& b = field(params[i], "b", p);
        if (!b.is_number_integer() || b.get<long long>() < 2) throw SchemaError(p + "/b", "expected an integer >= 2");
        tree.params.push_back({t, static_cast<int>(b.get<long long>())});
    }
    try {
        tree.check();
    } catch (const std::invalid_argument& e) {
        throw SchemaError(path + "/params", e.what());
    }
    return tree;
}

json tree_to_json(const TreeSpec& tree) {
    json params = json::array();
    for (const auto& v : tree.params) params.push_back({{"t", v.t}, {"b", v.b}});
    return json{{"epsilon", tree.epsilon}, {"C", tree.C}, {"params", params}};
}

DiscreteBranchSequence sequence_from_json(const json& j, const std::string& path) {
    DiscreteBranchSequence seq;
    const json& values = field(j, "values", path);
    if (!values.is_array()) throw SchemaError(path + "/values", "expected an array of integers");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!values[i].is_number_integer() || values[i].get<long long>() < 1)
            throw SchemaError(path + "/values/" + std::to_string(i), "expected an integer >= 1");
        seq.values.push_back(static_cast<int>(values[i].get<long long>()));
    }
    if (j.contains("max")) {
        const json& m = j.at("max");
        if (!m.is_number_integer()) throw SchemaError(path + "/max", "expected an integer");
        seq.declared_max = static_cast<int>(m.get<long long>());
        for (std::size_t i = 0; i < seq.values.size(); ++i)
            if (seq.values[i] > seq.declared_max)
                throw SchemaError(path + "/values/" + std::to_string(i), "exceeds the declared maximum");
    }
    return seq;
}

}  // namespace rtree
