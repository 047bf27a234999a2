#include <deflamg/config.hpp>
#include <deflamg/errors.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace deflamg {

using nlohmann::json;

namespace {

json amg_defaults() {
    return {
        {"coarsening", {
            {"type", "smoothed_aggregation"},
            {"eps_strong", 0.08},
            {"omega", 2.0 / 3.0}
        }},
        {"relax", {
            {"type", "damped_jacobi"},
            {"damping", 0.8}
        }},
        {"coarse_enough", 500}
    };
}

json solver_defaults(const std::string &type, double tol, int maxiter) {
    return {{"type", type}, {"tol", tol}, {"maxiter", maxiter}, {"M", 50}, {"L", 2}};
}

json make_defaults() {
    json precond = amg_defaults();
    precond["approx_schur"] = false;
    precond["usolver"] = {
        {"solver", solver_defaults("gmres", 1e-3, 5)},
        {"relax", {{"type", "spai0"}, {"damping", 0.8}}}
    };

    json local = amg_defaults();
    precond["psolver"] = {
        {"isolver", solver_defaults("fgmres", 1e-2, 20)},
        {"local", local},
        {"deflation", {{"kind", "constant"}}}
    };

    return {
        {"solver", solver_defaults("bicgstab2", 1e-6, 100)},
        {"precond", precond},
        {"deflation", {
            {"kind", "constant"},
            {"inexact", false},
            {"coarse_tol", 1e-2}
        }}
    };
}

std::string join(const std::string &prefix, const std::string &key) {
    return prefix.empty() ? key : prefix + "." + key;
}

bool integral(const json &v) {
    if (v.is_number_integer()) return true;
    if (v.is_number_float()) {
        double d = v.get<double>();
        return std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9.0e15;
    }
    return false;
}

const char* type_name(const json &v) {
    if (v.is_boolean()) return "a boolean";
    if (v.is_number_integer()) return "an integer";
    if (v.is_number()) return "a number";
    if (v.is_string()) return "a string";
    if (v.is_object()) return "an object";
    if (v.is_array()) return "an array";
    return "null";
}

// Checks `value` against the default `def` and returns the normalized value.
json check(const std::string &path, const json &def, const json &value) {
    auto mismatch = [&](const char *want) {
        return ConfigError(path, std::string("expected ") + want + ", got " + type_name(value));
    };

    if (def.is_object()) {
        if (!value.is_object()) throw mismatch("an object");
        return value;
    }
    if (def.is_boolean()) {
        if (!value.is_boolean()) throw mismatch("a boolean");
        return value;
    }
    if (def.is_string()) {
        if (!value.is_string()) throw mismatch("a string");
        return value;
    }
    if (def.is_number_integer()) {
        if (!integral(value)) throw mismatch("an integer");
        return json(static_cast<long long>(value.get<double>()));
    }
    if (def.is_number()) {
        if (!value.is_number()) throw mismatch("a number");
        return json(value.get<double>());
    }
    throw ConfigError(path, "unsupported default");
}

void merge_into(json &dst, const json &def, const json &src, const std::string &prefix) {
    if (!src.is_object())
        throw ConfigError(prefix, std::string("expected an object, got ") + type_name(src));

    for (auto it = src.begin(); it != src.end(); ++it) {
        const std::string path = join(prefix, it.key());
        if (!def.contains(it.key()))
            throw ConfigError(path, "unknown parameter");
        const json &d = def[it.key()];
        json v = check(path, d, it.value());
        if (d.is_object()) merge_into(dst[it.key()], d, v, path);
        else               dst[it.key()] = v;
    }
}

void validate_solver(const json &t, const std::string &prefix) {
    const json &s = t;
    const std::string type = s["type"].get<std::string>();
    if (!is_known_solver(type))
        throw ConfigError(join(prefix, "type"), "unknown solver '" + type +
                "' (expected cg, bicgstab2, bicgstabl, gmres or fgmres)");
    if (!(s["tol"].get<double>() > 0))
        throw ConfigError(join(prefix, "tol"), "must be positive");
    if (s["maxiter"].get<long long>() < 0)
        throw ConfigError(join(prefix, "maxiter"), "must not be negative");
    if (s["M"].get<long long>() < 1)
        throw ConfigError(join(prefix, "M"), "must be at least 1");
    if (s["L"].get<long long>() < 1)
        throw ConfigError(join(prefix, "L"), "must be at least 1");
}

void validate_relax(const json &r, const std::string &prefix) {
    try {
        smoother_kind_from_string(r["type"].get<std::string>());
    } catch (const ConfigError &e) {
        throw ConfigError(join(prefix, "type"), e.what());
    }
    const double w = r["damping"].get<double>();
    if (!(w > 0 && w < 2))
        throw ConfigError(join(prefix, "damping"), "must lie in (0, 2)");
}

void validate_amg(const json &a, const std::string &prefix) {
    if (a["coarsening"]["type"].get<std::string>() != "smoothed_aggregation")
        throw ConfigError(join(prefix, "coarsening.type"),
                "only smoothed_aggregation is available");
    if (a["coarsening"]["eps_strong"].get<double>() < 0)
        throw ConfigError(join(prefix, "coarsening.eps_strong"), "must not be negative");
    validate_relax(a["relax"], join(prefix, "relax"));
    if (a["coarse_enough"].get<long long>() < 1)
        throw ConfigError(join(prefix, "coarse_enough"), "must be at least 1");
}

void validate_kind(const json &v, const std::string &path) {
    try {
        deflation_kind_from_string(v.get<std::string>());
    } catch (const ConfigError &e) {
        throw ConfigError(path, e.what());
    }
}

void validate(const json &t) {
    validate_solver(t["solver"], "solver");
    validate_amg(t["precond"], "precond");
    validate_solver(t["precond"]["usolver"]["solver"], "precond.usolver.solver");
    validate_relax(t["precond"]["usolver"]["relax"], "precond.usolver.relax");
    validate_solver(t["precond"]["psolver"]["isolver"], "precond.psolver.isolver");
    validate_amg(t["precond"]["psolver"]["local"], "precond.psolver.local");
    validate_kind(t["precond"]["psolver"]["deflation"]["kind"], "precond.psolver.deflation.kind");
    validate_kind(t["deflation"]["kind"], "deflation.kind");

    const double ct = t["deflation"]["coarse_tol"].get<double>();
    if (!(ct > 0 && ct < 1))
        throw ConfigError("deflation.coarse_tol", "must lie in (0, 1)");
}

const json* find(const json &root, const std::string &path) {
    const json *node = &root;
    std::istringstream is(path);
    std::string key;
    while (std::getline(is, key, '.')) {
        if (!node->is_object() || !node->contains(key)) return nullptr;
        node = &(*node)[key];
    }
    return node;
}

} // namespace

const json& SolverConfig::defaults() {
    static const json d = make_defaults();
    return d;
}

SolverConfig::SolverConfig() : t(defaults()) {}

SolverConfig SolverConfig::from_json(const json &j) {
    SolverConfig c;
    c.merge(j);
    return c;
}

SolverConfig SolverConfig::parse(const std::string &text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error &e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    return from_json(j);
}

SolverConfig SolverConfig::load(const std::string &src) {
    auto first = src.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && src[first] == '{') return parse(src);

    std::ifstream f(src);
    if (!f) throw ParseError("cannot open config '" + src + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    try {
        return parse(ss.str());
    } catch (const ParseError &e) {
        throw ParseError(src + ": " + e.what());
    }
}

void SolverConfig::merge(const json &j) {
    json merged = t;
    merge_into(merged, defaults(), j, "");
    validate(merged);
    t = std::move(merged);
}

void SolverConfig::set(const std::string &path, const json &value) {
    json patch = value;
    std::vector<std::string> keys;
    std::istringstream is(path);
    for (std::string k; std::getline(is, k, '.');) keys.push_back(k);
    if (keys.empty()) throw ConfigError(path, "empty parameter path");
    for (auto it = keys.rbegin(); it != keys.rend(); ++it) patch = json{{*it, patch}};
    merge(patch);
}

const json& SolverConfig::get(const std::string &path) const {
    const json *v = find(t, path);
    if (!v) throw ConfigError(path, "unknown parameter");
    return *v;
}

double SolverConfig::number(const std::string &path) const {
    const json &v = get(path);
    if (!v.is_number()) throw ConfigError(path, "not a number");
    return v.get<double>();
}

index_t SolverConfig::integer(const std::string &path) const {
    const json &v = get(path);
    if (!v.is_number_integer()) throw ConfigError(path, "not an integer");
    return v.get<index_t>();
}

bool SolverConfig::boolean(const std::string &path) const {
    const json &v = get(path);
    if (!v.is_boolean()) throw ConfigError(path, "not a boolean");
    return v.get<bool>();
}

std::string SolverConfig::string(const std::string &path) const {
    const json &v = get(path);
    if (!v.is_string()) throw ConfigError(path, "not a string");
    return v.get<std::string>();
}

KrylovParams SolverConfig::krylov(const std::string &prefix) const {
    KrylovParams p;
    p.tol     = number(prefix + ".tol");
    p.maxiter = integer(prefix + ".maxiter");
    p.restart = integer(prefix + ".M");
    p.L       = static_cast<int>(integer(prefix + ".L"));
    return p;
}

AmgParams SolverConfig::amg(const std::string &prefix) const {
    AmgParams p;
    p.coarse_enough = integer(prefix + ".coarse_enough");
    p.eps_strong    = number(prefix + ".coarsening.eps_strong");
    p.omega         = number(prefix + ".coarsening.omega");
    p.relax         = smoother_kind_from_string(string(prefix + ".relax.type"));
    p.damping       = number(prefix + ".relax.damping");
    return p;
}

DeflationParams SolverConfig::deflation() const {
    DeflationParams p;
    p.kind       = deflation_kind_from_string(string("deflation.kind"));
    p.inexact    = boolean("deflation.inexact");
    p.coarse_tol = number("deflation.coarse_tol");
    return p;
}

SchurParams SolverConfig::schur() const {
    SchurParams p;
    p.usolver = string("precond.usolver.solver.type");
    p.uprm    = krylov("precond.usolver.solver");
    p.urelax  = smoother_kind_from_string(string("precond.usolver.relax.type"));
    p.udamping = number("precond.usolver.relax.damping");

    p.psolver = string("precond.psolver.isolver.type");
    p.pprm    = krylov("precond.psolver.isolver");
    p.plocal  = amg("precond.psolver.local");
    p.pdeflation.kind = deflation_kind_from_string(string("precond.psolver.deflation.kind"));

    p.approx_schur = boolean("precond.approx_schur");
    return p;
}

} // namespace deflamg
