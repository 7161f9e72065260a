#pragma once

// Run configuration: one JSON document naming the source chain, the storage
// chain, the weight, and the selection thresholds. Parsing is strict —
// unknown keys are rejected at every level, and every sub-spec must validate.

#include <cstdint>
#include <string>

#include "sdc/empirical.hpp"
#include "sdc/markov.hpp"

namespace sdc {

// Output unit for logarithmic quantities. Internals are always nats;
// conversion happens only when values are printed.
enum class LogBase { e, two, ell };

struct RunConfig {
    int alphabet_size = 0;
    TransitionModel source;
    TransitionModel storage;  // defaults to the uniform chain
    WeightSpec weight;
    double eta = 0.0;
    double eps = 0.0;
    double v = 0.0;  // total-volume exponent per symbol; defaults to log alphabet_size
    LogBase log_base = LogBase::e;
    std::uint64_t seed = 0;
    std::string output_path;  // empty: stdout only
};

// Parse a config document / file. Throws ConfigError on malformed input,
// unknown keys, or sub-specs that fail structural validation.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

// Accepts "e", "2", "ell" (alias "l"). Throws ConfigError otherwise.
LogBase parse_log_base(const std::string& token);

// Multiplier taking nats to the configured output unit.
double log_scale(LogBase base, int alphabet_size);

}  // namespace sdc
