#include "randuq/config.hpp"

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace randuq {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double to_double(const std::string& section, const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    double out;
    try {
        out = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("[" + section + "] " + key + ": not a number: " + v);
    }
    if (pos != v.size())
        throw std::invalid_argument("[" + section + "] " + key + ": trailing characters: " + v);
    return out;
}

int to_int(const std::string& section, const std::string& key, const std::string& v) {
    const double d = to_double(section, key, v);
    const int i = static_cast<int>(d);
    if (static_cast<double>(i) != d)
        throw std::invalid_argument("[" + section + "] " + key + ": expected an integer: " + v);
    return i;
}

bool to_bool(const std::string& section, const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw std::invalid_argument("[" + section + "] " + key + ": expected true/false: " + v);
}

} // namespace

StudyConfig StudyConfig::parse(std::istream& in) {
    StudyConfig cfg;
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("config line " + std::to_string(line_no) + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));

        const auto unknown = [&]() -> std::invalid_argument {
            return std::invalid_argument("config line " + std::to_string(line_no) + ": unknown key [" +
                                         section + "] " + key);
        };

        if (section == "model") {
            if (key == "N") cfg.total_modes = to_int(section, key, value);
            else if (key == "L") cfg.length_scale = to_double(section, key, value);
            else if (key == "L_p") cfg.period = to_double(section, key, value);
            else if (key == "c") cfg.scaling = to_double(section, key, value);
            else if (key == "decay") cfg.decay = value;
            else if (key == "variant") cfg.variant = value;
            else if (key == "a") cfg.coefficient = to_double(section, key, value);
            else throw unknown();
        } else if (section == "solver") {
            if (key == "mesh_n") cfg.mesh_n = to_int(section, key, value);
            else if (key == "dt") cfg.dt = to_double(section, key, value);
            else if (key == "T") cfg.final_time = to_double(section, key, value);
            else if (key == "cg_tol") cfg.cg_tol = to_double(section, key, value);
            else if (key == "g2") cfg.flux = to_double(section, key, value);
            else throw unknown();
        } else if (section == "grid") {
            if (key == "N_s") cfg.retained_modes = to_int(section, key, value);
            else if (key == "w") cfg.level = to_int(section, key, value);
            else if (key == "family") cfg.family = grid_family_from_string(value);
            else throw unknown();
        } else if (section == "study") {
            if (key == "normalize") cfg.normalize = to_bool(section, key, value);
            else if (key == "qoi_weight") cfg.qoi_weight = value;
            else if (key == "w_ref") cfg.reference_level = to_int(section, key, value);
            else if (key == "mesh_ref") cfg.reference_mesh_n = to_int(section, key, value);
            else if (key == "ns_ref") cfg.reference_modes = to_int(section, key, value);
            else throw unknown();
        } else if (section == "bounds") {
            if (key == "alpha") cfg.alpha = to_double(section, key, value);
            else if (key == "sigma") cfg.bounds.sigma = to_double(section, key, value);
            else if (key == "delta_star") cfg.bounds.delta_star = to_double(section, key, value);
            else if (key == "C1") cfg.bounds.C1 = to_double(section, key, value);
            else if (key == "C2_tilde") cfg.bounds.C2_tilde = to_double(section, key, value);
            else if (key == "C_D") cfg.bounds.C_D = to_double(section, key, value);
            else if (key == "D_D") cfg.bounds.D_D = to_double(section, key, value);
            else if (key == "l") cfg.bounds.decay_exponent = to_double(section, key, value);
            else if (key == "E") cfg.bounds.script_E = to_double(section, key, value);
            else if (key == "C_T") cfg.bounds.C_T = to_double(section, key, value);
            else if (key == "C_SG") cfg.bounds.C_SG = to_double(section, key, value);
            else if (key == "C_F") cfg.bounds.C_F = to_double(section, key, value);
            else if (key == "F") cfg.bounds.F = to_double(section, key, value);
            else if (key == "C_tau") cfg.bounds.C_tau = to_double(section, key, value);
            else if (key == "W_sol") cfg.bounds.W_sol = to_double(section, key, value);
            else throw unknown();
        } else {
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": unknown section [" +
                                        section + "]");
        }
    }
    // freeze the simplifying default so the echo shows the effective value
    cfg.bounds.delta_star = cfg.bounds.effective_delta_star();
    cfg.validate();
    return cfg;
}

StudyConfig StudyConfig::parse_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config file not found: " + path.string());
    return parse(in);
}

void StudyConfig::validate() const {
    if (total_modes < 1) throw std::invalid_argument("N must be at least 1");
    if (length_scale <= 0.0) throw std::invalid_argument("L must be positive");
    if (period <= 0.0) throw std::invalid_argument("L_p must be positive");
    if (scaling < 0.0) throw std::invalid_argument("c must be nonnegative");
    if (decay != "linear") throw std::invalid_argument("unsupported decay law: " + decay);
    if (variant != "upper-half-stretch") throw std::invalid_argument("unsupported variant: " + variant);
    if (coefficient <= 0.0) throw std::invalid_argument("a must be positive");
    if (mesh_n < 3 || mesh_n % 2 == 0)
        throw std::invalid_argument("mesh_n must be odd and at least 3 so the midline is resolved");
    if (dt <= 0.0) throw std::invalid_argument("dt must be positive");
    if (final_time <= 0.0) throw std::invalid_argument("T must be positive");
    if (dt > final_time) throw std::invalid_argument("dt must not exceed T");
    if (cg_tol <= 0.0) throw std::invalid_argument("cg_tol must be positive");
    if (retained_modes < 1 || retained_modes > total_modes)
        throw std::invalid_argument("N_s must satisfy 1 <= N_s <= N");
    if (level < 0) throw std::invalid_argument("w must be nonnegative");
    if (qoi_weight != "parabolic" && qoi_weight != "one")
        throw std::invalid_argument("unknown qoi_weight: " + qoi_weight);
    if (reference_level < 0) throw std::invalid_argument("w_ref must be nonnegative");
    if (reference_mesh_n < 3 || reference_mesh_n % 2 == 0)
        throw std::invalid_argument("mesh_ref must be odd and at least 3");
    if (reference_modes < 1 || reference_modes > total_modes)
        throw std::invalid_argument("ns_ref must satisfy 1 <= ns_ref <= N");
    bounds.validate();
    if (alpha <= 0.0) throw std::invalid_argument("alpha must be positive");
}

std::string StudyConfig::canonical() const {
    std::ostringstream out;
    out << "[model]\n";
    out << "N = " << total_modes << "\n";
    out << "L = " << fmt(length_scale) << "\n";
    out << "L_p = " << fmt(period) << "\n";
    out << "c = " << fmt(scaling) << "\n";
    out << "decay = " << decay << "\n";
    out << "variant = " << variant << "\n";
    out << "a = " << fmt(coefficient) << "\n";
    out << "\n[solver]\n";
    out << "mesh_n = " << mesh_n << "\n";
    out << "dt = " << fmt(dt) << "\n";
    out << "T = " << fmt(final_time) << "\n";
    out << "cg_tol = " << fmt(cg_tol) << "\n";
    out << "g2 = " << fmt(flux) << "\n";
    out << "\n[grid]\n";
    out << "N_s = " << retained_modes << "\n";
    out << "w = " << level << "\n";
    out << "family = " << grid_family_name(family) << "\n";
    out << "\n[study]\n";
    out << "normalize = " << (normalize ? "true" : "false") << "\n";
    out << "qoi_weight = " << qoi_weight << "\n";
    out << "w_ref = " << reference_level << "\n";
    out << "mesh_ref = " << reference_mesh_n << "\n";
    out << "ns_ref = " << reference_modes << "\n";
    out << "\n[bounds]\n";
    out << "alpha = " << fmt(alpha) << "\n";
    out << "sigma = " << fmt(bounds.sigma) << "\n";
    out << "delta_star = " << fmt(bounds.effective_delta_star()) << "\n";
    out << "C1 = " << fmt(bounds.C1) << "\n";
    out << "C2_tilde = " << fmt(bounds.C2_tilde) << "\n";
    out << "C_D = " << fmt(bounds.C_D) << "\n";
    out << "D_D = " << fmt(bounds.D_D) << "\n";
    out << "l = " << fmt(bounds.decay_exponent) << "\n";
    out << "E = " << fmt(bounds.script_E) << "\n";
    out << "C_T = " << fmt(bounds.C_T) << "\n";
    out << "C_SG = " << fmt(bounds.C_SG) << "\n";
    out << "C_F = " << fmt(bounds.C_F) << "\n";
    out << "F = " << fmt(bounds.F) << "\n";
    out << "C_tau = " << fmt(bounds.C_tau) << "\n";
    out << "W_sol = " << fmt(bounds.W_sol) << "\n";
    return out.str();
}

std::string StudyConfig::hash() const {
    const std::string text = canonical();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace randuq
