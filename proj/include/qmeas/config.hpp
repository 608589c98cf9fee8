#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qmeas/core.hpp"
#include "qmeas/micro.hpp"
#include "qmeas/readout.hpp"

// Structured key-value files: one `key = value` pair per line, `#` comments.
// System configs use dotted keys (system.e1, measurement.kappa, ...); micro
// model files use bare keys (p1, tau, ...).

namespace qmeas {

class KeyValueFile {
public:
    static KeyValueFile parse_file(const std::string& path);
    static KeyValueFile parse_text(const std::string& text);

    bool has(const std::string& key) const;
    double get_double(const std::string& key) const;
    double get_double_or(const std::string& key, double fallback) const;
    std::optional<double> get_optional(const std::string& key) const;

    // keys that were never read; used to reject typos
    std::vector<std::string> unused_keys() const;
    const std::map<std::string, std::string>& entries() const { return entries_; }

private:
    std::map<std::string, std::string> entries_;
    mutable std::map<std::string, bool> used_;
};

struct RunConfig {
    SystemConfig system;
    DerivedScales scales;
    PriorSpec prior;
    double smoothing_window = 0.0;
    // micro-sampler knobs used by the figure pipelines
    double micro_tau = 0.0;
    int micro_n_per_series = 0;
};

// Loads and validates a system config. Exactly one of measurement.kappa and
// measurement.fuzziness_ratio must be present.
RunConfig load_run_config(const std::string& path);
RunConfig run_config_from_kv(const KeyValueFile& kv);

// Serialized resolved config for run manifests.
std::vector<std::pair<std::string, std::string>> manifest_entries(const RunConfig& config);

struct MicroModelFile {
    ElementaryModel model;
    std::optional<double> g;
    std::optional<double> b;
};

// Accepts either {p1, p2} or {g, a_sq, b}; tau is required, chi/chi_prime
// optional.
MicroModelFile load_model_file(const std::string& path);

} // namespace qmeas
