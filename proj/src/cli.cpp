#include "rtree/cli.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>

#include "rtree/krein.hpp"
#include "rtree/measure.hpp"
#include "rtree/measure_io.hpp"
#include "rtree/parallel.hpp"
#include "rtree/transfer.hpp"
#include "rtree/tree.hpp"
#include "rtree/weyl.hpp"

namespace rtree::cli {

using nlohmann::json;

namespace {

using Cell = std::variant<double, long long, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

struct Artifact {
    std::string command;
    std::map<std::string, double> tolerances;
    std::vector<std::string> notes;  // extra "# key: value" header lines
    std::optional<Table> table;
    json payload;                    // structured result when there is no table
};

// ---------------------------------------------------------------------------
// Parameter access with schema paths.

class Params {
public:
    Params(const json& section, std::string path) : j_(section), path_(std::move(path)) {}

    bool has(const std::string& key) const { return j_.is_object() && j_.contains(key); }
    std::string path(const std::string& key) const { return path_ + "/" + key; }
    const json& raw(const std::string& key) const {
        if (!has(key)) throw SchemaError(path(key), "missing required field");
        return j_.at(key);
    }

    double number(const std::string& key) const {
        const json& v = raw(key);
        if (!v.is_number() || !std::isfinite(v.get<double>())) throw SchemaError(path(key), "expected a finite number");
        return v.get<double>();
    }
    double number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

    double positive(const std::string& key, double fallback) const {
        const double v = number(key, fallback);
        if (!(v > 0.0)) throw SchemaError(path(key), "must be positive");
        return v;
    }

    std::size_t count(const std::string& key, std::size_t fallback) const {
        if (!has(key)) return fallback;
        const json& v = raw(key);
        if (!v.is_number_integer() || v.get<long long>() < 0)
            throw SchemaError(path(key), "expected a non-negative integer");
        return static_cast<std::size_t>(v.get<long long>());
    }

    /// Either an array of strictly increasing numbers or
    /// {"start", "stop", "count"} for an evenly spaced grid.
    std::vector<double> grid(const std::string& key) const {
        const json& v = raw(key);
        std::vector<double> out;
        if (v.is_array()) {
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (!v[i].is_number()) throw SchemaError(path(key) + "/" + std::to_string(i), "expected a number");
                out.push_back(v[i].get<double>());
            }
        } else if (v.is_object()) {
            Params g(v, path(key));
            const double a = g.number("start");
            const double b = g.number("stop");
            const std::size_t n = g.count("count", 0);
            if (n == 0) throw SchemaError(g.path("count"), "grid needs at least one point");
            for (std::size_t i = 0; i < n; ++i)
                out.push_back(n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
        } else {
            throw SchemaError(path(key), "expected an array or {start, stop, count}");
        }
        if (out.empty()) throw SchemaError(path(key), "grid must be nonempty");
        for (std::size_t i = 1; i < out.size(); ++i)
            if (!(out[i] > out[i - 1])) throw SchemaError(path(key), "grid must increase strictly");
        return out;
    }

    cplx complex(const std::string& key) const {
        const json& v = raw(key);
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
            throw SchemaError(path(key), "expected [re, im]");
        return {v[0].get<double>(), v[1].get<double>()};
    }

private:
    const json& j_;
    std::string path_;
};

const json& command_section(const json& doc) {
    static const json empty = json::object();
    if (!doc.contains("command")) return empty;
    const json& c = doc.at("command");
    if (!c.is_object()) throw SchemaError("/command", "expected an object");
    return c;
}

MeasureDocument load_measure(const json& doc) {
    if (doc.contains("measure")) return measure_from_json(doc.at("measure"), "/measure");
    return measure_from_json(doc, "");
}

TreeSpec load_tree(const json& doc) {
    if (!doc.contains("tree")) throw SchemaError("/tree", "missing required field");
    return tree_from_json(doc.at("tree"), "/tree");
}

EtaSchedule load_schedule(const Params& p) {
    EtaSchedule s;
    s.eta0 = p.number("eta0", 0.0);
    if (s.eta0 < 0.0) throw SchemaError(p.path("eta0"), "must be >= 0");
    s.tol = p.positive("eta_tol", s.tol);
    s.max_levels = p.count("max_levels", s.max_levels);
    if (s.max_levels < 3) throw SchemaError(p.path("max_levels"), "needs at least three levels");
    return s;
}

KreinOptions load_krein(const Params& p) {
    KreinOptions o;
    o.tol = p.positive("tol", o.tol);
    o.max_atoms = p.count("max_atoms", o.max_atoms);
    if (p.has("truncation")) o.truncation = p.count("truncation", 0);
    return o;
}

// ---------------------------------------------------------------------------
// Commands

Artifact cmd_msweep(const RunConfig& cfg, const json& doc) {
    const auto m = load_measure(doc);
    Params p(command_section(doc), "/command");
    const KreinOptions kopt = load_krein(p);

    std::vector<cplx> zs;
    if (p.has("kappa"))
        for (double kappa : p.grid("kappa")) zs.push_back(-kappa * kappa);
    if (p.has("z")) {
        const json& arr = p.raw("z");
        if (!arr.is_array()) throw SchemaError(p.path("z"), "expected an array of [re, im]");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const auto& v = arr[i];
            if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
                throw SchemaError(p.path("z") + "/" + std::to_string(i), "expected [re, im]");
            zs.emplace_back(v[0].get<double>(), v[1].get<double>());
        }
    }
    std::uint64_t seed = 0;
    if (p.has("random")) {
        Params r(p.raw("random"), p.path("random"));
        if (r.has("rng") && !r.raw("rng").is_string()) throw SchemaError(r.path("rng"), "expected a string");
        const std::string rng = r.has("rng") ? r.raw("rng").get<std::string>() : "mt19937_64";
        if (rng != "mt19937_64") throw SchemaError(r.path("rng"), "unsupported generator \"" + rng + "\"");
        const std::size_t n = r.count("count", 0);
        const double re_lo = r.number("re_min", -4.0), re_hi = r.number("re_max", 4.0);
        const double im_lo = r.positive("im_min", 1e-2), im_hi = r.positive("im_max", 2.0);
        if (!(re_hi >= re_lo) || !(im_hi >= im_lo)) throw SchemaError(r.path("count"), "empty sampling box");
        seed = cfg.seed.value_or(doc.value("seed", std::uint64_t{0}));
        std::mt19937_64 gen(seed);
        for (std::size_t i = 0; i < n; ++i) {
            const double a = unit_interval(gen());
            const double b = unit_interval(gen());
            zs.emplace_back(re_lo + (re_hi - re_lo) * a, im_lo + (im_hi - im_lo) * b);
        }
    }
    if (zs.empty()) throw SchemaError("/command", "msweep needs \"kappa\", \"z\" or \"random\"");

    struct Row {
        MSample krein, riccati;
    };
    std::vector<Row> rows(zs.size());
    parallel_for(zs.size(), cfg.threads, [&](std::size_t i) {
        const EnergyPoint z(zs[i]);
        rows[i] = {m_plus_krein(m.measure, z, kopt), riccati_m_plus(m.measure, z, 0.0)};
    });

    Artifact a;
    a.command = "msweep";
    a.tolerances = {{"krein_tol", kopt.tol}};
    if (p.has("random")) a.notes.push_back("rng: mt19937_64 seed " + std::to_string(seed));
    Table t{{"re_z", "im_z", "re_m_krein", "im_m_krein", "re_m_riccati", "im_m_riccati", "disagreement",
             "truncation"},
            {}};
    for (std::size_t i = 0; i < zs.size(); ++i) {
        const cplx mk = rows[i].krein.value, mr = rows[i].riccati.value;
        t.rows.push_back({zs[i].real(), zs[i].imag(), mk.real(), mk.imag(), mr.real(), mr.imag(),
                          std::abs(mk - mr) / (1.0 + std::abs(mr)), static_cast<long long>(rows[i].krein.truncation)});
    }
    a.table = std::move(t);
    return a;
}

Artifact cmd_density(const RunConfig& cfg, const json& doc) {
    const auto m = load_measure(doc);
    Params p(command_section(doc), "/command");
    const auto energies = p.grid("energies");
    const double delta = p.positive("delta", kSpectralThreshold);
    const bool fixed = p.has("eta");
    const EtaSchedule sched = load_schedule(p);
    const DensityReport rep = fixed ? spectral_density(m.measure, energies, p.positive("eta", 1.0), delta, cfg.threads)
                                    : spectral_density(m.measure, energies, sched, delta, cfg.threads);
    Artifact a;
    a.command = "density";
    a.tolerances = {{"delta", delta}};
    if (!fixed) a.tolerances["eta_tol"] = sched.tol;
    a.notes.push_back("sigma_ac_fraction: " + format_number(rep.set.fraction()));
    Table t{{"E", "eta", "re_m_plus", "im_m_plus", "density", "in_sigma_ac", "converged"}, {}};
    for (std::size_t i = 0; i < rep.samples.size(); ++i) {
        const auto& s = rep.samples[i];
        t.rows.push_back({s.E, s.eta, s.m_plus.real(), s.m_plus.imag(), s.density,
                          static_cast<long long>(rep.set.member[i]), static_cast<long long>(s.converged)});
    }
    a.table = std::move(t);
    return a;
}

Artifact cmd_reflectionless(const RunConfig& cfg, const json& doc) {
    const auto m = load_measure(doc);
    Params p(command_section(doc), "/command");
    const auto energies = p.grid("energies");
    const double t0 = p.number("t", 0.0);
    const EtaSchedule sched = load_schedule(p);
    const auto rep = reflectionless_defect(m.measure, energies, t0, sched, cfg.threads);
    Artifact a;
    a.command = "reflectionless";
    a.tolerances = {{"eta_tol", sched.tol}};
    a.notes.push_back("sup_defect: " + format_number(rep.sup));
    Table t{{"E", "eta", "re_m_plus", "im_m_plus", "re_m_minus", "im_m_minus", "defect", "converged"}, {}};
    for (const auto& s : rep.samples)
        t.rows.push_back({s.E, 0.0, s.m_plus.real(), s.m_plus.imag(), s.m_minus.real(), s.m_minus.imag(), s.defect,
                          static_cast<long long>(s.converged)});
    a.table = std::move(t);
    return a;
}

Artifact cmd_sparse(const RunConfig&, const json& doc) {
    const auto m = load_measure(doc);
    Params p(command_section(doc), "/command");
    const double E = p.positive("E", 1.0);
    const double X = p.positive("X", 1.0);
    const double step = p.number("step", 0.0);
    if (step < 0.0) throw SchemaError(p.path("step"), "must be >= 0");
    const auto res = simon_stolz_integral(m.measure, E, X, step);
    Artifact a;
    a.command = "sparse";
    a.tolerances = {{"step", res.step}};
    a.notes.push_back("integral: " + format_number(res.integral));
    Table t{{"n", "t_n", "interval_lower_bound", "cumulative_integral"}, {}};
    for (const auto& iv : res.intervals)
        t.rows.push_back({static_cast<long long>(iv.n), iv.t_n, iv.lower_bound, iv.cumulative_integral});
    a.table = std::move(t);
    return a;
}

Artifact cmd_rightlimit(const RunConfig&, const json& doc) {
    const auto m = load_measure(doc);
    Params p(command_section(doc), "/command");
    const double W = p.positive("window", 3.0);
    const double tol = p.positive("tol", 1e-9);
    std::vector<double> shifts;
    if (p.has("shifts")) {
        shifts = p.grid("shifts");
    } else {
        // Midpoints between consecutive atoms, starting after atom `from`.
        const std::size_t from = p.count("from", 1);
        const std::size_t n = p.count("midpoints", 8);
        const auto atoms = m.measure.first_atoms(from + n);
        for (std::size_t i = from == 0 ? 0 : from - 1; i + 1 < atoms.size(); ++i)
            shifts.push_back(0.5 * (atoms[i].t + atoms[i + 1].t));
        if (shifts.empty()) throw SchemaError(p.path("midpoints"), "measure has too few atoms for midpoint shifts");
    }
    const auto res = right_limit(m.measure, shifts, W, tol, m.bounds);
    Artifact a;
    a.command = "rightlimit";
    a.tolerances = {{"tol", tol}, {"window", W}};
    a.payload = {{"converged", res.converged},
                 {"stable_from", res.stable_from},
                 {"window", res.window},
                 {"consumed_upto", res.consumed_upto},
                 {"shifts", shifts},
                 {"limit", measure_to_json(res.limit, m.bounds)}};
    return a;
}

Artifact cmd_sparsify(const RunConfig&, const json& doc) {
    const auto m = load_measure(doc);
    Params p(command_section(doc), "/command");
    const double R = p.number("R");
    if (R < 0.0) throw SchemaError(p.path("R"), "must be >= 0");
    const std::size_t preview = p.count("preview", 6);
    AtomicMeasure out;
    try {
        out = sparsify(m.measure, R, m.bounds);
    } catch (const ValidationError& e) {
        const auto& v = e.report().violations.front();
        throw SchemaError("/atoms/" + std::to_string(v.index - 1), e.what());
    }
    Artifact a;
    a.command = "sparsify";
    a.tolerances = {{"R", R}};
    a.payload = {{"measure", measure_to_json(out, m.bounds)},
                 {"first_atoms", atoms_to_json(out.first_atoms(out.explicit_count() + preview))},
                 {"valid", validate(out, m.bounds).ok()}};
    return a;
}

Artifact cmd_periodicity(const RunConfig&, const json& doc) {
    if (!doc.contains("sequence")) throw SchemaError("/sequence", "missing required field");
    const auto seq = sequence_from_json(doc.at("sequence"), "/sequence");
    Params p(command_section(doc), "/command");
    const std::size_t L = seq.horizon();
    const std::size_t max_period = p.count("max_period", 2);
    const std::size_t default_start = L > 2 * max_period + 1 ? L - 1 - 2 * max_period : 0;
    const std::size_t max_start = p.count("max_start", default_start);
    if (max_period == 0 || max_start == 0 || L <= max_start + 2 * max_period)
        throw SchemaError("/sequence/values", "window length must exceed max_start + 2 max_period (both >= 1)");
    const auto r = is_eventually_periodic(seq, max_start, max_period);
    Artifact a;
    a.command = "periodicity";
    a.tolerances = {{"max_start", static_cast<double>(max_start)}, {"max_period", static_cast<double>(max_period)}};
    if (r)
        a.payload = {{"start", r->start}, {"period", r->period}, {"horizon", r->horizon}};
    else
        a.payload = {{"start", nullptr}, {"period", nullptr}, {"horizon", L}};
    return a;
}

Artifact cmd_decompose(const RunConfig&, const json& doc) {
    const auto tree = load_tree(doc);
    Params p(command_section(doc), "/command");
    const std::size_t K = p.count("K", tree.params.size());
    if (K > tree.params.size()) throw SchemaError(p.path("K"), "exceeds the represented generations");
    Artifact a;
    a.command = "decompose";
    a.tolerances = {{"K", static_cast<double>(K)}};
    a.payload = json::array();
    for (const auto& c : decompose(tree, K))
        a.payload.push_back({{"k", c.k}, {"multiplicity", c.multiplicity}, {"atoms", atoms_to_json(c.measure.atoms())}});
    return a;
}

Artifact cmd_treereport(const RunConfig& cfg, const json& doc) {
    const auto tree = load_tree(doc);
    Params p(command_section(doc), "/command");
    const std::size_t K = p.count("K", tree.params.size());
    if (K > tree.params.size()) throw SchemaError(p.path("K"), "exceeds the represented generations");
    const auto energies = p.grid("energies");
    const double eta = p.number("eta", 0.0);
    if (eta < 0.0) throw SchemaError(p.path("eta"), "must be >= 0");
    const auto rep = tree_spectral_report(tree, K, energies, eta, cfg.threads);
    Artifact a;
    a.command = "treereport";
    a.tolerances = {{"eta", eta}};
    a.notes.push_back("uncounted_multiplicity: " + std::to_string(rep.uncounted_multiplicity));
    Table t{{"E", "total_density"}, {}};
    for (std::size_t k = 0; k <= K; ++k) t.columns.push_back("density_" + std::to_string(k));
    for (std::size_t i = 0; i < energies.size(); ++i) {
        std::vector<Cell> row{energies[i], rep.total_density[i]};
        for (const auto& d : rep.component_density) row.emplace_back(d[i]);
        t.rows.push_back(std::move(row));
    }
    a.table = std::move(t);
    return a;
}

Artifact cmd_resolvent_probe(const RunConfig& cfg, const json& doc) {
    const auto m = load_measure(doc);
    Params p(command_section(doc), "/command");
    const EnergyPoint z(p.complex("z"));
    if (z.on_positive_axis()) throw SchemaError(p.path("z"), "z must lie off [0, inf)");
    const double u = p.number("u");
    const auto ts = p.grid("t");
    const double h = p.positive("h", 1e-3);
    const KreinOptions kopt = load_krein(p);

    const double reach = std::max(ts.back(), u) + h;
    const auto atoms = m.measure.window(reach);
    const std::size_t N = std::max<std::size_t>(
        kopt.truncation.value_or(choose_truncation(m.measure, z, kopt.tol, kopt.max_atoms)), atoms.size());
    const KreinSystem sys = assemble_krein(m.measure, z, N);

    auto near_singular = [&](double t) {
        if (std::abs(t - u) <= h) return true;
        for (const auto& at : atoms)
            if (std::abs(t - at.t) <= h) return true;
        return false;
    };
    std::vector<std::array<double, 3>> vals(ts.size());
    parallel_for(ts.size(), cfg.threads, [&](std::size_t i) {
        const double t = ts[i];
        bool on_atom = t == u;
        for (const auto& at : atoms) on_atom = on_atom || t == at.t;
        if (on_atom) {
            vals[i] = {NAN, NAN, NAN};
            return;
        }
        const cplx G = sys.resolvent_kernel(t, u);
        double residual = NAN;
        if (!near_singular(t) && t - h > 0.0) {
            const cplx d2 = (sys.resolvent_kernel(t + h, u) - 2.0 * G + sys.resolvent_kernel(t - h, u)) / (h * h);
            residual = std::abs(d2 + z.z() * G) / ((1.0 + std::abs(z.z())) * std::max(std::abs(G), 1e-300));
        }
        vals[i] = {G.real(), G.imag(), residual};
    });

    Artifact a;
    a.command = "resolvent-probe";
    a.tolerances = {{"h", h}, {"krein_tol", kopt.tol}};
    a.notes.push_back("truncation: " + std::to_string(N));
    Table t{{"t", "u", "re_G", "im_G", "residual"}, {}};
    for (std::size_t i = 0; i < ts.size(); ++i) t.rows.push_back({ts[i], u, vals[i][0], vals[i][1], vals[i][2]});
    a.table = std::move(t);
    return a;
}

Artifact cmd_asymptotics(const RunConfig& cfg, const json& doc) {
    const auto m = load_measure(doc);
    Params p(command_section(doc), "/command");
    const auto kappas = p.grid("kappa");
    for (double k : kappas)
        if (!(k > 0.0)) throw SchemaError(p.path("kappa"), "kappa must be positive");
    const KreinOptions kopt = load_krein(p);
    std::vector<std::pair<double, double>> vals(kappas.size());
    parallel_for(kappas.size(), cfg.threads, [&](std::size_t i) {
        vals[i] = {m_plus_krein(m.measure, EnergyPoint::below(kappas[i]), kopt).value.real(),
                   asymptotic_ratio(m.measure, kappas[i], kopt)};
    });
    Artifact a;
    a.command = "asymptotics";
    a.tolerances = {{"krein_tol", kopt.tol}};
    Table t{{"kappa", "m_plus", "ratio"}, {}};
    for (std::size_t i = 0; i < kappas.size(); ++i) t.rows.push_back({kappas[i], vals[i].first, vals[i].second});
    a.table = std::move(t);
    return a;
}

using Handler = Artifact (*)(const RunConfig&, const json&);

const std::map<std::string, Handler>& handlers() {
    static const std::map<std::string, Handler> table = {
        {"msweep", cmd_msweep},         {"density", cmd_density},
        {"reflectionless", cmd_reflectionless}, {"sparse", cmd_sparse},
        {"rightlimit", cmd_rightlimit}, {"sparsify", cmd_sparsify},
        {"periodicity", cmd_periodicity}, {"decompose", cmd_decompose},
        {"treereport", cmd_treereport}, {"resolvent-probe", cmd_resolvent_probe},
        {"asymptotics", cmd_asymptotics},
    };
    return table;
}

// ---------------------------------------------------------------------------
// Writers

std::string cell_text(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) return format_number(*d);
    if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
    return std::get<std::string>(c);
}

json cell_json(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) return std::isfinite(*d) ? json(*d) : json(nullptr);
    if (const auto* i = std::get_if<long long>(&c)) return *i;
    return std::get<std::string>(c);
}

void write_header(std::ostream& out, const Artifact& a, const std::string& hash) {
    out << "# rtree " << a.command << '\n';
    out << "# config_hash: " << hash << '\n';
    out << "# tolerances:";
    for (const auto& [k, v] : a.tolerances) out << ' ' << k << '=' << format_number(v);
    out << '\n';
    for (const auto& n : a.notes) out << "# " << n << '\n';
}

void write_artifact(std::ostream& out, const Artifact& a, Format format, const std::string& hash) {
    if (format == Format::json || !a.table) {
        json tol = json::object();
        for (const auto& [k, v] : a.tolerances) tol[k] = v;
        json doc{{"command", a.command}, {"config_hash", hash}, {"tolerances", tol}};
        if (!a.notes.empty()) doc["notes"] = a.notes;
        if (a.table) {
            json rows = json::array();
            for (const auto& r : a.table->rows) {
                json row = json::array();
                for (const auto& c : r) row.push_back(cell_json(c));
                rows.push_back(std::move(row));
            }
            doc["result"] = {{"columns", a.table->columns}, {"rows", rows}};
        } else {
            doc["result"] = a.payload;
        }
        out << doc.dump(2) << '\n';
        return;
    }
    write_header(out, a, hash);
    const char* sep = format == Format::csv ? "," : " ";
    if (format == Format::gnuplot) out << "# ";
    for (std::size_t i = 0; i < a.table->columns.size(); ++i) out << (i ? sep : "") << a.table->columns[i];
    out << '\n';
    for (const auto& r : a.table->rows) {
        for (std::size_t i = 0; i < r.size(); ++i) out << (i ? sep : "") << cell_text(r[i]);
        out << '\n';
    }
}

std::optional<std::string> embedded_hash(const std::string& artifact) {
    std::istringstream in(artifact);
    std::string line;
    const std::string tag = "# config_hash: ";
    while (std::getline(in, line))
        if (line.rfind(tag, 0) == 0) return line.substr(tag.size());
    try {
        const json j = json::parse(artifact);
        if (j.is_object() && j.contains("config_hash") && j.at("config_hash").is_string())
            return j.at("config_hash").get<std::string>();
    } catch (const json::exception&) {
    }
    return std::nullopt;
}

}  // namespace

Format parse_format(const std::string& name) {
    if (name == "csv") return Format::csv;
    if (name == "json") return Format::json;
    if (name == "gnuplot") return Format::gnuplot;
    throw std::invalid_argument("unknown format \"" + name + "\"");
}

json effective_document(const RunConfig& cfg) {
    json doc = cfg.document;
    if (cfg.seed) doc["seed"] = *cfg.seed;
    return doc;
}

std::uint64_t config_hash(const RunConfig& cfg) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : effective_document(cfg).dump()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double unit_interval(std::uint64_t draw) { return static_cast<double>(draw >> 11) * 0x1.0p-53; }

std::vector<std::string> command_names() {
    std::vector<std::string> out;
    for (const auto& [name, _] : handlers()) out.push_back(name);
    return out;
}

int run(const std::string& command, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        if (!cfg.document.is_object()) throw SchemaError("", "config must be a JSON object");
        std::string name = command;
        if (name.empty()) {
            const json& c = command_section(cfg.document);
            if (!c.contains("name") || !c.at("name").is_string())
                throw SchemaError("/command/name", "no command given");
            name = c.at("name").get<std::string>();
        }
        const auto it = handlers().find(name);
        if (it == handlers().end()) throw SchemaError("/command/name", "unknown command \"" + name + "\"");
        const json doc = effective_document(cfg);
        const Artifact a = it->second(cfg, doc);
        write_artifact(out, a, cfg.format, hash_hex(config_hash(cfg)));
        return ExitCode::ok;
    } catch (const SchemaError& e) {
        err << "schema error at " << (e.path().empty() ? "/" : "") << e.what() << '\n';
        return ExitCode::schema_violation;
    } catch (const TruncationRefusal& e) {
        err << "numeric refusal: " << e.what() << " (required truncation: " << e.required() << " atoms)\n";
        return ExitCode::numeric_refusal;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return ExitCode::failure;
    }
}

int verify_artifact(const std::string& artifact, const RunConfig& cfg, std::ostream& err) {
    const auto found = embedded_hash(artifact);
    if (!found) {
        err << "artifact carries no config hash\n";
        return ExitCode::failure;
    }
    const std::string expected = hash_hex(config_hash(cfg));
    if (*found != expected) {
        err << "stale artifact: hash " << *found << ", config hash " << expected << '\n';
        return ExitCode::stale_artifact;
    }
    return ExitCode::ok;
}

}  // namespace rtree::cli
