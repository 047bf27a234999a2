#ifndef DEFLAMG_CONFIG_HPP
#define DEFLAMG_CONFIG_HPP

/**
 * \file   deflamg/config.hpp
 * \brief  Hierarchical solver parameters.
 *
 * The tree mirrors the nested parameter structure of the solver
 * components: `solver` for the outer Krylov method, `precond` for the
 * local AMG (and, for saddle-point systems, the `usolver` / `psolver`
 * subtrees of the Schur preconditioner) and `deflation`. User input is
 * merged over the defaults; every key must exist in the defaults and
 * keep its type.
 */

#include <deflamg/amg.hpp>
#include <deflamg/deflation.hpp>
#include <deflamg/krylov.hpp>
#include <deflamg/schur.hpp>

#include <json.hpp>

#include <string>

namespace deflamg {

class SolverConfig {
    public:
        /// All defaults.
        SolverConfig();

        static const nlohmann::json& defaults();

        /// Defaults overlaid with j. Throws ConfigError naming the offending
        /// dotted path for unknown keys, type mismatches and invalid values.
        static SolverConfig from_json(const nlohmann::json &j);

        /// Parses JSON text. Syntax errors become ParseError.
        static SolverConfig parse(const std::string &text);

        /// Reads a JSON file; a string starting with '{' is parsed inline.
        static SolverConfig load(const std::string &path_or_json);

        void merge(const nlohmann::json &j);

        /// Sets one value by dotted path, with the same checks as merge().
        void set(const std::string &path, const nlohmann::json &value);

        const nlohmann::json& get(const std::string &path) const;

        double      number(const std::string &path) const;
        index_t     integer(const std::string &path) const;
        bool        boolean(const std::string &path) const;
        std::string string(const std::string &path) const;

        const nlohmann::json& tree() const { return t; }

        std::string dump(int indent = 4) const { return t.dump(indent); }

        /// Krylov parameters of the solver subtree at `prefix`
        /// ("solver", "precond.usolver.solver", "precond.psolver.isolver").
        KrylovParams krylov(const std::string &prefix = "solver") const;

        /// AMG parameters of the subtree at `prefix` ("precond" or
        /// "precond.psolver.local").
        AmgParams amg(const std::string &prefix = "precond") const;

        DeflationParams deflation() const;

        SchurParams schur() const;

    private:
        nlohmann::json t;
};

} // namespace deflamg

#endif
