#include "thawsim/config.hpp"

#include "thawsim/errors.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace thawsim {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Where {
    std::string origin;
    std::string key;
    int line = 0;
};

[[noreturn]] void fail(const Where& w, const std::string& what) {
    std::ostringstream os;
    os << w.origin << ":" << w.line << ": key '" << w.key << "': " << what;
    throw ConfigError(os.str());
}

double to_double(const std::string& v, const Where& w) {
    double out = 0.0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        fail(w, "expected a number, got '" + v + "'");
    return out;
}

int to_int(const std::string& v, const Where& w) {
    int out = 0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        fail(w, "expected an integer, got '" + v + "'");
    return out;
}

std::vector<double> to_list(const std::string& v, const Where& w) {
    std::vector<double> out;
    if (trim(v).empty())
        return out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(to_double(trim(item), w));
    return out;
}

std::string list_text(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i)
            s += ",";
        s += fmt(v[i]);
    }
    return s;
}

struct Key {
    std::string section;
    std::string name;
    std::function<void(SimulationConfig&, const std::string&, const Where&)> set;
    std::function<std::string(const SimulationConfig&)> get;
};

Key real(const std::string& sec, const std::string& name, double SimulationConfig::*field) {
    return {sec, name,
            [field](SimulationConfig& c, const std::string& v, const Where& w) { c.*field = to_double(v, w); },
            [field](const SimulationConfig& c) { return fmt(c.*field); }};
}

template <class Sub>
Key real(const std::string& sec, const std::string& name, Sub SimulationConfig::*sub, double Sub::*field) {
    return {sec, name,
            [sub, field](SimulationConfig& c, const std::string& v, const Where& w) {
                c.*sub.*field = to_double(v, w);
            },
            [sub, field](const SimulationConfig& c) { return fmt(c.*sub.*field); }};
}

Key integer(const std::string& sec, const std::string& name, GeometryConfig SimulationConfig::*sub,
            int GeometryConfig::*field) {
    return {sec, name,
            [sub, field](SimulationConfig& c, const std::string& v, const Where& w) {
                c.*sub.*field = to_int(v, w);
            },
            [sub, field](const SimulationConfig& c) { return std::to_string(c.*sub.*field); }};
}

const std::vector<Key>& registry() {
    static const std::vector<Key> keys = [] {
        using C = SimulationConfig;
        std::vector<Key> k;
        k.push_back({"run", "scenario", [](C&, const std::string&, const Where&) {},
                     [](const C& c) { return scenario_name(c.scenario); }});
        k.push_back(real("run", "T_init", &C::T_init));
        k.push_back(real("run", "T_a", &C::T_a));
        k.push_back(real("run", "t_end", &C::t_end));
        k.push_back({"run", "workers",
                     [](C& c, const std::string& v, const Where& w) { c.workers = to_int(v, w); },
                     [](const C& c) { return std::to_string(c.workers); }});

        k.push_back(real("geometry", "R_tree", &C::geometry, &GeometryConfig::R_tree));
        k.push_back(real("geometry", "delta", &C::geometry, &GeometryConfig::delta));
        k.push_back(real("geometry", "gamma_hat", &C::geometry, &GeometryConfig::gamma_hat));
        k.push_back(real("geometry", "s0_hat", &C::geometry, &GeometryConfig::s0_hat));
        k.push_back(integer("geometry", "M_macro", &C::geometry, &GeometryConfig::M_macro));
        k.push_back(integer("geometry", "M_micro", &C::geometry, &GeometryConfig::M_micro));
        k.push_back(integer("geometry", "cell_resolution", &C::geometry, &GeometryConfig::cell_resolution));

        using P = PhaseMaterial;
        for (auto [n, f] : std::initializer_list<std::pair<const char*, double P::*>>{
                 {"c_i", &P::c_i}, {"c_w", &P::c_w}, {"k_i", &P::k_i}, {"k_w", &P::k_w},
                 {"rho_i", &P::rho_i}, {"rho_w", &P::rho_w}, {"H_i", &P::H_i}, {"H_w", &P::H_w},
                 {"T_c", &P::T_c}, {"c_inf", &P::c_inf}, {"smoothing_width", &P::smoothing_width}})
            k.push_back(real("material", n, &C::material, f));

        using S = SapParams;
        for (auto [n, f] : std::initializer_list<std::pair<const char*, double S::*>>{
                 {"R_f", &S::R_f}, {"L_v", &S::L_v}, {"L_f", &S::L_f}, {"V_f", &S::V_f},
                 {"V_v", &S::V_v}, {"A", &S::A}, {"W", &S::W}, {"N", &S::N}, {"g", &S::g},
                 {"henry", &S::henry}, {"M_g", &S::M_g}, {"R_gas", &S::R_gas},
                 {"sigma_w", &S::sigma_w}, {"C_s", &S::C_s}, {"K", &S::K}, {"s_iw0", &S::s_iw0},
                 {"s_gi0", &S::s_gi0}, {"r0", &S::r0}, {"U0", &S::U0}, {"p_gf0", &S::p_gf0},
                 {"p_gv0", &S::p_gv0}, {"rho_gv0", &S::rho_gv0}, {"D_gas", &S::D_gas},
                 {"diffusivity_factor", &S::diffusivity_factor},
                 {"min_width_fraction", &S::min_width_fraction},
                 {"thickness_fraction", &S::thickness_fraction}, {"floor_radius", &S::floor_radius}})
            k.push_back(real("sap", n, &C::sap, f));

        using V = SolverConfig;
        for (auto [n, f] : std::initializer_list<std::pair<const char*, double V::*>>{
                 {"rtol", &V::rtol}, {"atol", &V::atol}, {"dt_init", &V::dt_init},
                 {"dt_max", &V::dt_max}, {"dt_min", &V::dt_min}, {"safety", &V::safety},
                 {"growth_cap", &V::growth_cap}, {"shrink_cap", &V::shrink_cap},
                 {"event_tol", &V::event_tol}, {"s_min_fraction", &V::s_min_fraction}})
            k.push_back(real("solver", n, &C::solver, f));
        k.push_back({"solver", "gradient",
                     [](C& c, const std::string& v, const Where& w) {
                         if (v == "fe_flux")
                             c.solver.gradient = GradientMode::fe_flux;
                         else if (v == "stencil")
                             c.solver.gradient = GradientMode::stencil;
                         else
                             fail(w, "expected fe_flux or stencil, got '" + v + "'");
                     },
                     [](const C& c) {
                         return std::string(c.solver.gradient == GradientMode::fe_flux ? "fe_flux" : "stencil");
                     }});
        k.push_back({"solver", "remap",
                     [](C& c, const std::string& v, const Where& w) {
                         if (v == "interpolate")
                             c.solver.remap = RemapMode::interpolate;
                         else if (v == "carry")
                             c.solver.remap = RemapMode::carry;
                         else
                             fail(w, "expected interpolate or carry, got '" + v + "'");
                     },
                     [](const C& c) {
                         return std::string(c.solver.remap == RemapMode::interpolate ? "interpolate" : "carry");
                     }});

        k.push_back({"output", "snapshot_times",
                     [](C& c, const std::string& v, const Where& w) { c.output.snapshot_times = to_list(v, w); },
                     [](const C& c) { return list_text(c.output.snapshot_times); }});
        k.push_back({"output", "probe_radii",
                     [](C& c, const std::string& v, const Where& w) { c.output.probe_radii = to_list(v, w); },
                     [](const C& c) { return list_text(c.output.probe_radii); }});
        k.push_back(real("output", "probe_interval", &C::output, &OutputConfig::probe_interval));
        k.push_back({"output", "directory",
                     [](C& c, const std::string& v, const Where&) { c.output.directory = v; },
                     [](const C& c) { return c.output.directory; }});
        return k;
    }();
    return keys;
}

struct Entry {
    std::string section;
    std::string key;
    std::string value;
    int line;
};

} // namespace

std::string scenario_name(Scenario s) { return s == Scenario::reduced ? "reduced" : "sap"; }

std::vector<std::string> sap_keys() {
    std::vector<std::string> out;
    for (const auto& k : registry())
        if (k.section == "sap")
            out.push_back(k.name);
    return out;
}

SimulationConfig parse_config_text(const std::string& text, const std::string& origin) {
    std::vector<Entry> entries;
    std::set<std::string> sections;
    std::istringstream in(text);
    std::string raw, section;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = trim(raw);
        if (s.empty() || s[0] == '#' || s[0] == ';')
            continue;
        if (s.front() == '[') {
            if (s.back() != ']')
                throw ConfigError(origin + ":" + std::to_string(line) + ": malformed section header");
            section = trim(s.substr(1, s.size() - 2));
            static const std::set<std::string> known{"run", "geometry", "material", "sap", "solver", "output"};
            if (!known.count(section))
                throw ConfigError(origin + ":" + std::to_string(line) + ": unknown section [" + section + "]");
            sections.insert(section);
            continue;
        }
        auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(line) + ": expected key = value");
        std::string key = trim(s.substr(0, eq));
        std::string value = trim(s.substr(eq + 1));
        auto hash = value.find('#');
        if (hash != std::string::npos)
            value = trim(value.substr(0, hash));
        std::string sec = section.empty() ? "run" : section;
        entries.push_back({sec, key, value, line});
    }

    Scenario scenario = Scenario::reduced;
    for (const auto& e : entries) {
        if (e.section == "run" && e.key == "scenario") {
            if (e.value == "reduced")
                scenario = Scenario::reduced;
            else if (e.value == "sap")
                scenario = Scenario::sap;
            else
                fail({origin, e.key, e.line}, "expected reduced or sap, got '" + e.value + "'");
        }
    }
    if (scenario == Scenario::sap && !sections.count("sap")) {
        std::string list;
        for (const auto& k : sap_keys())
            list += (list.empty() ? "" : ", ") + k;
        throw ConfigError(origin + ": scenario = sap requires a [sap] block; keys: " + list);
    }

    SimulationConfig cfg = default_config(scenario);
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& e : entries) {
        Where w{origin, e.key, e.line};
        const Key* match = nullptr;
        for (const auto& k : registry())
            if (k.section == e.section && k.name == e.key)
                match = &k;
        if (!match)
            fail(w, "unknown key in [" + e.section + "]");
        if (!seen.insert({e.section, e.key}).second)
            fail(w, "duplicate key");
        match->set(cfg, e.value, w);
    }
    try {
        cfg.validate();
    } catch (const ConfigError& err) {
        throw ConfigError(origin + ": " + err.what());
    }
    return cfg;
}

SimulationConfig parse_config(const std::string& path) {
    std::ifstream f(path);
    if (!f)
        throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str(), path);
}

std::string serialize_config(const SimulationConfig& config) {
    std::ostringstream os;
    std::string section;
    for (const auto& k : registry()) {
        if (k.section != section) {
            if (!section.empty())
                os << "\n";
            section = k.section;
            os << "[" << section << "]\n";
        }
        os << k.name << " = " << k.get(config) << "\n";
    }
    return os.str();
}

} // namespace thawsim
