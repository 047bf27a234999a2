#include <deflamg/config.hpp>
#include <deflamg/errors.hpp>

#include <doctest.h>

#include <string>

using namespace deflamg;

TEST_SUITE("config") {

TEST_CASE("empty object gives the defaults") {
    SolverConfig c = SolverConfig::parse("{}");
    CHECK(c.number("solver.tol") == 1e-6);
    CHECK(c.number("precond.relax.damping") == 0.8);
    CHECK(c.string("solver.type") == "bicgstab2");
    CHECK(c.integer("precond.coarse_enough") == 500);
    CHECK(c.tree() == SolverConfig::defaults());
    CHECK(c.tree() == SolverConfig().tree());
}

TEST_CASE("schur.json parses") {
    SolverConfig c = SolverConfig::load(DEFLAMG_CONFIG_DIR "/schur.json");
    CHECK(c.integer("precond.psolver.isolver.maxiter") == 20);
    CHECK(c.number("solver.tol") == 1e-4);
    CHECK(c.string("solver.type") == "fgmres");

    SchurParams s = c.schur();
    CHECK(s.usolver == "gmres");
    CHECK(s.uprm.tol == 1e-3);
    CHECK(s.uprm.maxiter == 5);
    CHECK(s.psolver == "fgmres");
    CHECK(s.pprm.tol == 1e-2);
    CHECK(s.pprm.maxiter == 20);
    CHECK(s.plocal.coarse_enough == 500);

    KrylovParams k = c.krylov("solver");
    CHECK(k.restart == 50);
    CHECK(k.tol == 1e-4);
}

TEST_CASE("shipped default file matches the built-in defaults") {
    CHECK(SolverConfig::load(DEFLAMG_CONFIG_DIR "/default.json").tree() == SolverConfig::defaults());
}

TEST_CASE("type mismatches and unknown keys name the path") {
    auto path_of = [](const std::string &text) {
        try {
            SolverConfig::parse(text);
        } catch (const ConfigError &e) {
            return e.path();
        }
        return std::string("<none>");
    };
    CHECK(path_of(R"({"solver":{"tol":"abc"}})") == "solver.tol");
    CHECK(path_of(R"({"solver":{"tolerance":1}})") == "solver.tolerance");
    CHECK(path_of(R"({"precond":{"psolver":{"isolver":{"maxiter":2.5}}}})") == "precond.psolver.isolver.maxiter");
    CHECK(path_of(R"({"precond":{"relax":{"type":"ilu0"}}})") == "precond.relax.type");
    CHECK(path_of(R"({"precond":{"relax":{"damping":3}}})") == "precond.relax.damping");
    CHECK(path_of(R"({"solver":{"type":"minres"}})") == "solver.type");
    CHECK(path_of(R"({"deflation":{"kind":"quadratic"}})") == "deflation.kind");
    CHECK(path_of(R"({"deflation":{"coarse_tol":0}})") == "deflation.coarse_tol");
    CHECK(path_of(R"({"solver":5})") == "solver");
    CHECK(path_of(R"({"solver":{"tol":-1}})") == "solver.tol");

    CHECK_THROWS_AS(SolverConfig::parse("{not json"), ParseError);
    CHECK_THROWS_AS(SolverConfig::parse("[1, 2]"), ConfigError);
    CHECK_THROWS_AS(SolverConfig::load("/nonexistent/config.json"), ParseError);
}

TEST_CASE("dotted get and set") {
    SolverConfig c;
    c.set("precond.psolver.isolver.tol", 1e-3);
    CHECK(c.number("precond.psolver.isolver.tol") == 1e-3);
    c.set("solver.maxiter", 7);
    CHECK(c.integer("solver.maxiter") == 7);
    CHECK_THROWS_AS(c.set("solver.nope", 1), ConfigError);
    CHECK_THROWS_AS(c.set("solver.tol", "x"), ConfigError);
    CHECK_THROWS_AS(c.get("precond.nothing"), ConfigError);
    CHECK(c.get("solver").is_object());
}

TEST_CASE("override precedence: later merges win") {
    SolverConfig c = SolverConfig::parse(R"({"solver":{"tol":1e-3}})");
    CHECK(c.number("solver.tol") == 1e-3);
    c.set("solver.tol", 1e-6);
    CHECK(c.number("solver.tol") == 1e-6);
    c.merge(nlohmann::json::parse(R"({"solver":{"maxiter":11}})"));
    CHECK(c.number("solver.tol") == 1e-6);
    CHECK(c.integer("solver.maxiter") == 11);
}

TEST_CASE("canonical round trip") {
    SolverConfig c = SolverConfig::parse(R"({"deflation":{"kind":"linear"},"precond":{"approx_schur":true}})");
    SolverConfig d = SolverConfig::parse(c.dump());
    CHECK(d.tree() == c.tree());
    CHECK(d.dump() == c.dump());
    CHECK(d.deflation().kind == DeflationKind::linear);
    CHECK(d.schur().approx_schur);
}

TEST_CASE("typed views") {
    SolverConfig c = SolverConfig::parse(R"({"precond":{"coarse_enough":100,"coarsening":{"eps_strong":0.1}}})");
    AmgParams a = c.amg("precond");
    CHECK(a.coarse_enough == 100);
    CHECK(a.eps_strong == 0.1);
    CHECK(a.damping == 0.8);
    CHECK(a.relax == SmootherKind::damped_jacobi);

    DeflationParams d = SolverConfig().deflation();
    CHECK(d.kind == DeflationKind::constant);
    CHECK_FALSE(d.inexact);
    CHECK(d.coarse_tol == 1e-2);
}

}
