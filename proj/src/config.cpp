#include "qmeas/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "qmeas/csv.hpp"

namespace qmeas {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

} // namespace

KeyValueFile KeyValueFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_text(buffer.str());
}

KeyValueFile KeyValueFile::parse_text(const std::string& text) {
    KeyValueFile kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": empty key or value");
        if (!kv.entries_.emplace(key, value).second)
            throw std::invalid_argument("config: duplicate key " + key);
    }
    return kv;
}

bool KeyValueFile::has(const std::string& key) const {
    return entries_.count(key) > 0;
}

double KeyValueFile::get_double(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end())
        throw std::invalid_argument("config: missing required key " + key);
    used_[key] = true;
    try {
        std::size_t pos = 0;
        const double value = std::stod(it->second, &pos);
        if (pos != it->second.size())
            throw std::invalid_argument("trailing characters");
        return value;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: key " + key + " is not a number: " + it->second);
    }
}

double KeyValueFile::get_double_or(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

std::optional<double> KeyValueFile::get_optional(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return get_double(key);
}

std::vector<std::string> KeyValueFile::unused_keys() const {
    std::vector<std::string> unused;
    for (const auto& [key, value] : entries_)
        if (!used_.count(key)) unused.push_back(key);
    return unused;
}

RunConfig run_config_from_kv(const KeyValueFile& kv) {
    RunConfig rc;
    rc.system.e1 = kv.get_double("system.e1");
    rc.system.e2 = kv.get_double("system.e2");
    rc.system.v_amplitude = kv.get_double("system.v");
    rc.system.t1 = kv.get_double("system.t1");
    rc.system.t2 = kv.get_double("system.t2");
    rc.system.t_total = kv.get_double("system.t_total");

    const auto kappa = kv.get_optional("measurement.kappa");
    const auto ratio = kv.get_optional("measurement.fuzziness_ratio");
    if (kappa.has_value() == ratio.has_value())
        throw std::invalid_argument(
            "config: exactly one of measurement.kappa and measurement.fuzziness_ratio "
            "must be present");
    if (kappa) {
        rc.system.kappa = *kappa;
    } else {
        const double t_rabi = kPi / rc.system.v_amplitude;
        rc.system.kappa = kappa_for_fuzziness(*ratio, rc.system.e2 - rc.system.e1, t_rabi);
    }
    rc.system.validate();
    rc.scales = derive_scales(rc.system);

    const PriorSpec defaults = default_prior(rc.system);
    rc.prior.e_lo = kv.get_double_or("prior.e_lo", defaults.e_lo);
    rc.prior.e_hi = kv.get_double_or("prior.e_hi", defaults.e_hi);
    rc.prior.dt = kv.get_double_or("prior.dt", defaults.dt);

    rc.smoothing_window =
        kv.get_double_or("readout.smoothing_window", rc.system.t2 - rc.system.t1);

    rc.micro_tau = kv.get_double_or("micro.tau", rc.scales.t_rabi / 8000.0);
    rc.micro_n_per_series =
        static_cast<int>(kv.get_double_or("micro.n_per_series", 50.0));

    const auto unused = kv.unused_keys();
    if (!unused.empty())
        throw std::invalid_argument("config: unknown key " + unused.front());
    return rc;
}

RunConfig load_run_config(const std::string& path) {
    return run_config_from_kv(KeyValueFile::parse_file(path));
}

std::vector<std::pair<std::string, std::string>> manifest_entries(const RunConfig& rc) {
    std::vector<std::pair<std::string, std::string>> entries;
    auto add = [&entries](const std::string& key, double value) {
        entries.emplace_back(key, format_double(value));
    };
    add("system.e1", rc.system.e1);
    add("system.e2", rc.system.e2);
    add("system.v", rc.system.v_amplitude);
    add("system.t1", rc.system.t1);
    add("system.t2", rc.system.t2);
    add("system.t_total", rc.system.t_total);
    add("measurement.kappa", rc.system.kappa);
    add("derived.delta_e", rc.scales.delta_e);
    add("derived.t_rabi", rc.scales.t_rabi);
    add("derived.t_lr", rc.scales.t_lr);
    add("derived.fuzziness_ratio", rc.scales.fuzziness_ratio);
    add("prior.e_lo", rc.prior.e_lo);
    add("prior.e_hi", rc.prior.e_hi);
    add("prior.dt", rc.prior.dt);
    add("readout.smoothing_window", rc.smoothing_window);
    add("micro.tau", rc.micro_tau);
    add("micro.n_per_series", rc.micro_n_per_series);
    return entries;
}

MicroModelFile load_model_file(const std::string& path) {
    const KeyValueFile kv = KeyValueFile::parse_file(path);
    MicroModelFile out;
    const bool direct = kv.has("p1") || kv.has("p2");
    const bool concrete = kv.has("g") || kv.has("a_sq");
    if (direct == concrete)
        throw std::invalid_argument(
            "model file: provide either {p1, p2} or {g, a_sq, b}, not both");

    const double tau = kv.get_double("tau");
    if (direct) {
        out.model.p1 = kv.get_double("p1");
        out.model.p2 = kv.get_double("p2");
        out.model.tau = tau;
        out.model.chi = kv.get_double_or("chi", 0.0);
        out.model.chi_prime = kv.get_double_or("chi_prime", 0.0);
    } else {
        out.g = kv.get_double("g");
        out.b = kv.get_double_or("b", 0.0);
        out.model = concrete_model_params(*out.g, kv.get_double("a_sq"), *out.b, tau);
        if (kv.has("chi")) out.model.chi = kv.get_double("chi");
        if (kv.has("chi_prime")) out.model.chi_prime = kv.get_double("chi_prime");
    }
    out.model.validate();
    const auto unused = kv.unused_keys();
    if (!unused.empty())
        throw std::invalid_argument("model file: unknown key " + unused.front());
    return out;
}

} // namespace qmeas
