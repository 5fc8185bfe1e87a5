#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pidelab/expr.hpp"
#include "pidelab/galerkin_space.hpp"
#include "pidelab/levy_model.hpp"

namespace pidelab {

/// Flat key-value configuration: one `key = value` per line, `[name]`
/// section headers prefixing subsequent keys as "name.key", `#`
/// comments. Later assignments win; command-line overrides use the same
/// "section.key=value" syntax.
class KeyValueConfig {
public:
    static KeyValueConfig load(const std::string& path);
    static KeyValueConfig from_string(const std::string& text);

    void apply_override(const std::string& assignment);

    bool has(const std::string& key) const;
    std::optional<std::string> get(const std::string& key) const;

    std::string get_string(const std::string& key,
                           const std::string& fallback) const;
    std::string require_string(const std::string& key) const;
    double get_number(const std::string& key, double fallback) const;
    double require_number(const std::string& key) const;
    int get_int(const std::string& key, int fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    Expr get_expr(const std::string& key, const std::string& fallback) const;
    std::vector<int> get_int_list(const std::string& key) const;
    std::vector<double> get_number_list(const std::string& key) const;

    const std::map<std::string, std::string>& entries() const { return entries_; }

private:
    std::map<std::string, std::string> entries_;
};

/// Typed core of a run configuration shared by the solve/converge/
/// stability/price commands.
struct ResolvedProblem {
    Domain1D domain;
    int n_elements;
    int degree;
    double eta;
    double rho;
    LevyModel model;
    double T;
    int time_steps;
    double theta;
    double safety_factor;
    bool enforce_condition;
};

/// Builds the problem from the [space], [model], and [grid] sections;
/// throws std::invalid_argument with a readable message on bad values.
ResolvedProblem resolve_problem(const KeyValueConfig& cfg);

}  // namespace pidelab
