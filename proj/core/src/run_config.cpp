#include "pidelab/run_config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pidelab {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

void parse_into(std::istream& in, std::map<std::string, std::string>& entries) {
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("config line " + std::to_string(lineno) +
                                            ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": empty key");
        if (!section.empty()) key = section + "." + key;
        entries[key] = value;
    }
}

}  // namespace

KeyValueConfig KeyValueConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    KeyValueConfig cfg;
    parse_into(in, cfg.entries_);
    return cfg;
}

KeyValueConfig KeyValueConfig::from_string(const std::string& text) {
    std::istringstream in(text);
    KeyValueConfig cfg;
    parse_into(in, cfg.entries_);
    return cfg;
}

void KeyValueConfig::apply_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw std::invalid_argument("override must have the form section.key=value: " +
                                    assignment);
    entries_[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
}

bool KeyValueConfig::has(const std::string& key) const {
    return entries_.count(key) > 0;
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key,
                                       const std::string& fallback) const {
    return get(key).value_or(fallback);
}

std::string KeyValueConfig::require_string(const std::string& key) const {
    const auto v = get(key);
    if (!v) throw std::invalid_argument("missing required config key: " + key);
    return *v;
}

double KeyValueConfig::get_number(const std::string& key, double fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    // Accept any constant expression so values like pi/4 work.
    const double out = Expr::parse(*v)(0.0, 0.0);
    if (!std::isfinite(out))
        throw std::invalid_argument("config key " + key + " is not finite");
    return out;
}

double KeyValueConfig::require_number(const std::string& key) const {
    if (!has(key)) throw std::invalid_argument("missing required config key: " + key);
    return get_number(key, 0.0);
}

int KeyValueConfig::get_int(const std::string& key, int fallback) const {
    const double v = get_number(key, fallback);
    const int i = static_cast<int>(std::lround(v));
    if (std::abs(v - i) > 1e-9)
        throw std::invalid_argument("config key " + key + " must be an integer");
    return i;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw std::invalid_argument("config key " + key + " must be a boolean");
}

Expr KeyValueConfig::get_expr(const std::string& key,
                              const std::string& fallback) const {
    return Expr::parse(get(key).value_or(fallback));
}

std::vector<int> KeyValueConfig::get_int_list(const std::string& key) const {
    std::vector<int> out;
    for (double v : get_number_list(key)) {
        const int i = static_cast<int>(std::lround(v));
        if (std::abs(v - i) > 1e-9)
            throw std::invalid_argument("config key " + key +
                                        " must list integers");
        out.push_back(i);
    }
    return out;
}

std::vector<double> KeyValueConfig::get_number_list(const std::string& key) const {
    const auto v = get(key);
    std::vector<double> out;
    if (!v) return out;
    std::string item;
    std::istringstream in(*v);
    while (in >> item) {
        if (!item.empty() && item.back() == ',') item.pop_back();
        if (item.empty()) continue;
        out.push_back(Expr::parse(item)(0.0, 0.0));
    }
    return out;
}

ResolvedProblem resolve_problem(const KeyValueConfig& cfg) {
    ResolvedProblem p;
    p.domain.x_min = cfg.get_number("space.x_min", 0.0);
    p.domain.x_max = cfg.get_number("space.x_max", 1.0);
    if (!(p.domain.x_min < p.domain.x_max))
        throw std::invalid_argument("space.x_min must be below space.x_max");
    p.n_elements = cfg.get_int("space.n", 64);
    p.degree = cfg.get_int("space.degree", 1);
    p.eta = cfg.get_number("space.eta", 0.0);
    p.rho = cfg.get_number("space.rho", 1.0);

    p.T = cfg.get_number("grid.T", 1.0);
    if (!(p.T > 0.0)) throw std::invalid_argument("grid.T must be positive");
    p.time_steps = cfg.get_int("grid.steps", 100);
    if (p.time_steps < 1) throw std::invalid_argument("grid.steps must be >= 1");
    p.theta = cfg.get_number("grid.theta", 0.5);
    if (!(p.theta >= 0.0 && p.theta <= 1.0))
        throw std::invalid_argument("grid.theta must lie in [0, 1]");
    p.safety_factor = cfg.get_number("grid.safety_factor", 0.9);
    if (!(p.safety_factor > 0.0 && p.safety_factor <= 1.0))
        throw std::invalid_argument("grid.safety_factor must lie in (0, 1]");
    p.enforce_condition = cfg.get_bool("grid.enforce_condition", true);

    const Expr sigma = cfg.get_expr("model.sigma", "0.2");
    const Expr drift = cfg.get_expr("model.drift", "0");
    const Expr rate = cfg.get_expr("model.rate", "0");
    const Expr kappa = cfg.get_expr("model.kappa", "0");
    p.model.sigma = [sigma](double t) { return sigma(t); };
    p.model.drift = [drift](double t) { return drift(t); };
    p.model.rate = [rate](double t) { return rate(t); };
    p.model.kappa = [kappa](double t, double x) { return kappa(t, x); };
    p.model.horizon = p.T;

    if (cfg.has("model.jump_intensity")) {
        const Expr lam = cfg.get_expr("model.jump_intensity", "0");
        const double mean = cfg.get_number("model.jump_mean", 0.0);
        const double stdev = cfg.require_number("model.jump_stdev");
        if (!(stdev > 0.0))
            throw std::invalid_argument("model.jump_stdev must be positive");
        p.model.jumps = JumpSpec::merton([lam](double t) { return lam(t); }, mean,
                                         stdev);
    }
    return p;
}

}  // namespace pidelab
