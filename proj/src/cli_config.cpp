#include "netgrowth/cli.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>

namespace netgrowth::cli {

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Consumes keys from one section, remembering the resolved values.
class SectionReader {
public:
    SectionReader(const RawConfig& raw, const std::string& name, RawConfig& resolved)
        : name_(name), resolved_(resolved[name]) {
        if (auto it = raw.find(name); it != raw.end()) values_ = it->second;
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::optional<std::string> take_string(const std::string& key) {
        auto it = values_.find(key);
        if (it == values_.end()) return std::nullopt;
        std::string v = it->second;
        values_.erase(it);
        resolved_[key] = v;
        return v;
    }

    std::optional<double> take_double(const std::string& key) {
        auto s = take_string(key);
        if (!s) return std::nullopt;
        const double v = parse_double(key, *s);
        resolved_[key] = format_double(v);
        return v;
    }

    double require_double(const std::string& key) {
        auto v = take_double(key);
        if (!v) throw ConfigError("[" + name_ + "] missing required key '" + key + "'");
        return *v;
    }

    std::string require_string(const std::string& key) {
        auto v = take_string(key);
        if (!v) throw ConfigError("[" + name_ + "] missing required key '" + key + "'");
        return *v;
    }

    template <class T>
    void read(const std::string& key, T& target) {
        if constexpr (std::is_same_v<T, double>) {
            if (auto v = take_double(key)) target = *v;
            else resolved_[key] = format_double(target);
        } else if constexpr (std::is_same_v<T, std::optional<double>>) {
            if (auto v = take_double(key)) target = *v;
        } else if constexpr (std::is_same_v<T, bool>) {
            if (auto s = take_string(key)) {
                if (*s == "true" || *s == "1") target = true;
                else if (*s == "false" || *s == "0") target = false;
                else throw ConfigError("[" + name_ + "] " + key + ": expected true or false");
            }
            resolved_[key] = target ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (auto s = take_string(key)) target = *s;
            else resolved_[key] = target;
        } else {
            if (auto s = take_string(key)) target = parse_count<T>(key, *s);
            resolved_[key] = std::to_string(target);
        }
    }

    std::vector<std::string> remaining() const {
        std::vector<std::string> out;
        for (const auto& [k, v] : values_) out.push_back(k);
        return out;
    }

    void reject_unknown() const {
        if (!values_.empty()) throw ConfigError("[" + name_ + "] unknown key '" + values_.begin()->first + "'");
    }

private:
    double parse_double(const std::string& key, const std::string& s) const {
        errno = 0;
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v))
            throw ConfigError("[" + name_ + "] " + key + ": '" + s + "' is not a finite number");
        return v;
    }

    template <class T>
    T parse_count(const std::string& key, const std::string& s) const {
        errno = 0;
        char* end = nullptr;
        const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
        if (s.empty() || s[0] == '-' || end != s.c_str() + s.size() || errno == ERANGE)
            throw ConfigError("[" + name_ + "] " + key + ": '" + s + "' is not a non-negative integer");
        return static_cast<T>(v);
    }

    std::string name_;
    std::map<std::string, std::string> values_;
    std::map<std::string, std::string>& resolved_;
};

RoleSpec read_role(SectionReader& r, const std::string& role) {
    RoleSpec spec;
    const std::string fam = r.require_string(role + ".family");
    try {
        spec.family = family_from_string(fam);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("[model] ") + role + ".family: " + e.what());
    }
    for (const auto& name : parameter_names(spec.family))
        if (auto v = r.take_double(role + "." + name)) spec.params[name] = *v;
    for (const auto& key : r.remaining())
        if (key.rfind(role + ".", 0) == 0)
            throw ConfigError("[model] unknown parameter '" + key + "' for family " + fam);
    return spec;
}

}  // namespace

RawConfig read_config_file(const std::string& path) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::read_ini(path, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("cannot parse config: ") + e.what());
    }
    RawConfig raw;
    for (const auto& [section, body] : tree) {
        if (body.empty()) throw ConfigError("config: key '" + section + "' outside of a section");
        auto& dst = raw[section];
        // iterate children directly: keys such as "f.family" contain dots
        for (const auto& [key, val] : body) dst[key] = val.data();
    }
    return raw;
}

RunConfig parse_config(const RawConfig& raw) {
    static const std::set<std::string> sections{"model", "grid", "run", "lqg", "output"};
    for (const auto& [name, body] : raw)
        if (!sections.count(name)) throw ConfigError("unknown config section [" + name + "]");

    RunConfig cfg;
    if (raw.count("model")) {
        SectionReader r(raw, "model", cfg.resolved);
        ModelSection m;
        m.f = read_role(r, "f");
        m.g = read_role(r, "g");
        m.b = read_role(r, "b");
        m.c = read_role(r, "c");
        m.eta_tilde = r.require_double("eta_tilde");
        m.eta = r.require_double("eta");
        m.rho = r.require_double("rho");
        m.lambda_sup = r.require_double("lambda_sup");
        m.x_initial = r.require_double("x_initial");
        r.read("eta_sup", m.eta_sup);
        r.read("c_enter", m.c_enter);
        r.reject_unknown();
        cfg.model = m;
    }
    {
        SectionReader r(raw, "grid", cfg.resolved);
        r.read("n", cfg.grid.n);
        r.read("tol", cfg.grid.tol);
        r.read("max_iter", cfg.grid.max_iter);
        r.read("x_hi", cfg.grid.x_hi);
        r.reject_unknown();
    }
    {
        SectionReader r(raw, "run", cfg.resolved);
        auto& s = cfg.run;
        r.read("t_end", s.t_end);
        r.read("rtol", s.rtol);
        r.read("n_out", s.n_out);
        r.read("x0", s.x0);
        r.read("start_at_steady", s.start_at_steady);
        r.read("validate_n", s.validate_n);
        r.read("eta_lo", s.eta_lo);
        r.read("eta_hi", s.eta_hi);
        r.read("eta_grid_n", s.eta_grid_n);
        r.read("statics_points", s.statics_points);
        r.reject_unknown();
        if (s.n_out < 2) throw ConfigError("[run] n_out must be >= 2");
    }
    if (raw.count("lqg")) {
        SectionReader r(raw, "lqg", cfg.resolved);
        LqgSection l;
        auto& p = l.params;
        p.theta = r.require_double("theta");
        p.gamma_cap = r.require_double("gamma_cap");
        p.c = r.require_double("c");
        p.lambda_d = r.require_double("lambda_d");
        p.rho = r.require_double("rho");
        r.read("sigma", p.sigma);
        r.read("x0", p.x0);
        r.read("eta", p.eta);
        r.read("n_paths", l.n_paths);
        r.read("dt", l.dt);
        r.read("t_end", l.t_end);
        r.read("n_records", l.n_records);
        r.read("n_expected", l.n_expected);
        r.read("seed", l.seed);
        r.reject_unknown();
        cfg.lqg = l;
    }
    {
        SectionReader r(raw, "output", cfg.resolved);
        r.read("directory", cfg.output.directory);
        r.read("prefix", cfg.output.prefix);
        r.reject_unknown();
    }
    return cfg;
}

ModelParams make_model(const ModelSection& s) {
    ModelConfig mc;
    mc.f = FunctionSpec::make(s.f.family, s.f.params);
    mc.g = FunctionSpec::make(s.g.family, s.g.params);
    mc.b = FunctionSpec::make(s.b.family, s.b.params);
    mc.c = FunctionSpec::make(s.c.family, s.c.params);
    mc.eta_tilde = s.eta_tilde;
    mc.eta = s.eta;
    mc.eta_sup = s.eta_sup;
    mc.rho = s.rho;
    mc.lambda_sup = s.lambda_sup;
    mc.x_initial = s.x_initial;
    mc.c_enter = s.c_enter;
    return build_model(mc);
}

void apply_override(RawConfig& raw, const std::string& param, const std::string& value) {
    const auto dot = param.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == param.size())
        throw ConfigError("sweep parameter must look like section.key (e.g. model.eta, lqg.sigma)");
    const std::string section = param.substr(0, dot), key = param.substr(dot + 1);
    if (section != "model" && section != "lqg")
        throw ConfigError("sweep parameter must be in [model] or [lqg]");
    raw[section][key] = value;
}

}  // namespace netgrowth::cli
