#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pctl/checker.hpp"
#include "pctl/errors.hpp"
#include "pctl/model.hpp"
#include "pctl/models.hpp"

namespace pctl {

/// Malformed or inconsistent run configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

struct SimulationSpec {
    std::vector<double> x0;
    std::size_t n = 100000;
    std::size_t horizon = 0;
    std::uint64_t seed = 0;
    std::string phi = "safe";
    std::string psi = "target";
};

/// Parsed run configuration. `document` keeps the input for echoing in reports.
struct RunConfig {
    nlohmann::ordered_json document;
    Model model;
    SolverOptions solver;
    std::optional<SimulationSpec> simulation;
};

namespace detail {

using nlohmann::ordered_json;

inline double endpoint(const ordered_json& v, const std::string& where) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        auto s = v.get<std::string>();
        if (s == "inf" || s == "+inf") return kInf;
        if (s == "-inf") return -kInf;
    }
    throw ConfigError(where + ": interval endpoint must be a number, \"inf\" or \"-inf\"");
}

inline Region region_from_json(const ordered_json& v, const std::string& name) {
    const std::string where = "regions." + name;
    if (!v.is_array()) throw ConfigError(where + ": expected an array of [lo, hi] intervals");
    std::vector<Interval> ivs;
    for (const auto& iv : v) {
        if (!iv.is_array() || iv.size() != 2) throw ConfigError(where + ": each interval must be [lo, hi]");
        Interval x{endpoint(iv[0], where), endpoint(iv[1], where)};
        if (x.lo > x.hi) throw ConfigError(where + ": interval has lo > hi");
        ivs.push_back(x);
    }
    return Region(std::move(ivs));
}

inline const ordered_json& require(const ordered_json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
    return obj.at(key);
}

inline Grid grid_from_json(const ordered_json& g) {
    auto lo = require(g, "lo", "grid").get<double>();
    auto hi = require(g, "hi", "grid").get<double>();
    const auto& cells = require(g, "cells", "grid");
    if (!cells.is_number_integer() || cells.get<std::int64_t>() < 1)
        throw ConfigError("grid.cells must be a positive integer");
    return Grid(lo, hi, cells.get<std::size_t>());
}

inline models::PortfolioStrategy portfolio_from_json(const ordered_json& s) {
    if (s.is_array() && s.size() == 3) return {s[0].get<double>(), s[1].get<double>(), s[2].get<double>()};
    if (s.is_object())
        return {require(s, "a", "model.strategy").get<double>(), require(s, "b", "model.strategy").get<double>(),
                require(s, "c", "model.strategy").get<double>()};
    throw ConfigError("model.strategy: expected {\"a\":..,\"b\":..,\"c\":..} or [a, b, c]");
}

inline std::size_t nonnegative_integer(const ordered_json& v, const std::string& where) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
        throw ConfigError(where + " must be a nonnegative integer");
    return v.get<std::size_t>();
}

inline RunConfig build_config(ordered_json doc) {
    if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
    for (const auto& [key, _] : doc.items()) {
        if (key != "model" && key != "grid" && key != "regions" && key != "solver" && key != "simulation")
            throw ConfigError("unknown top-level key '" + key + "'");
    }
    const auto& m = require(doc, "model", "config");
    const auto type = require(m, "type", "model").get<std::string>();

    std::optional<Kernel> kernel;
    std::optional<Grid> grid;
    std::map<std::string, Region> regions;

    if (type == "fishery") {
        auto s = models::parse_fishery_strategy(require(m, "strategy", "model").get<std::string>());
        kernel = models::fishery_kernel(s);
        grid = models::fishery_grid();
        regions = models::fishery_regions();
    } else if (type == "retirement") {
        auto p = portfolio_from_json(require(m, "strategy", "model"));
        kernel = models::retirement_kernel(p);
        grid = models::retirement_grid();
        regions = models::retirement_regions();
    } else if (type == "finite") {
        auto matrix = require(m, "matrix", "model").get<std::vector<std::vector<double>>>();
        auto values = require(m, "state_values", "model").get<std::vector<double>>();
        kernel = finite_kernel(matrix, values);
    } else if (type == "affine_gaussian") {
        auto mean = require(m, "mean", "model").get<std::vector<double>>();
        auto sd = require(m, "std", "model").get<std::vector<double>>();
        if (mean.size() != 2 || sd.size() != 2)
            throw ConfigError("model.mean and model.std must be two-element coefficient arrays");
        kernel = affine_gaussian_kernel([a = mean[0], b = mean[1]](double x) { return a + b * x; },
                                        [a = sd[0], b = sd[1]](double x) { return a + b * std::abs(x); });
    } else {
        throw ConfigError("unknown model type '" + type + "' (expected fishery, retirement, finite or affine_gaussian)");
    }

    if (doc.contains("grid")) grid = grid_from_json(doc.at("grid"));
    if (!grid) throw ConfigError("model type '" + type + "' requires a grid");

    if (doc.contains("regions")) {
        const auto& r = doc.at("regions");
        if (!r.is_object()) throw ConfigError("regions must be an object mapping names to interval lists");
        for (const auto& [name, ivs] : r.items()) regions.insert_or_assign(name, region_from_json(ivs, name));
    }

    SolverOptions solver;
    if (doc.contains("solver")) {
        const auto& s = doc.at("solver");
        if (s.contains("tol")) solver.tol = s.at("tol").get<double>();
        if (s.contains("max_iter")) solver.max_iter = nonnegative_integer(s.at("max_iter"), "solver.max_iter");
        if (!(solver.tol > 0.0)) throw ConfigError("solver.tol must be positive");
        if (solver.max_iter < 1) throw ConfigError("solver.max_iter must be at least 1");
    }

    std::optional<SimulationSpec> sim;
    if (doc.contains("simulation")) {
        const auto& s = doc.at("simulation");
        SimulationSpec spec;
        if (s.contains("x0")) {
            const auto& x0 = s.at("x0");
            spec.x0 = x0.is_array() ? x0.get<std::vector<double>>() : std::vector<double>{x0.get<double>()};
        }
        if (s.contains("n")) spec.n = nonnegative_integer(s.at("n"), "simulation.n");
        if (s.contains("horizon")) spec.horizon = nonnegative_integer(s.at("horizon"), "simulation.horizon");
        if (s.contains("seed")) spec.seed = nonnegative_integer(s.at("seed"), "simulation.seed");
        if (s.contains("phi")) spec.phi = s.at("phi").get<std::string>();
        if (s.contains("psi")) spec.psi = s.at("psi").get<std::string>();
        sim = spec;
    }

    return RunConfig{std::move(doc), Model(std::move(*kernel), *grid, std::move(regions)), solver, sim};
}

}  // namespace detail

/// Builds a run configuration from JSON text. Throws ConfigError.
inline RunConfig parse_config(const std::string& text) {
    nlohmann::ordered_json doc;
    try {
        doc = nlohmann::ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
    try {
        return detail::build_config(std::move(doc));
    } catch (const ConfigError&) {
        throw;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("configuration type error: ") + e.what());
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open configuration file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace pctl
