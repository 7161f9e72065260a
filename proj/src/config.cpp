#include "sdc/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sdc/errors.hpp"

namespace sdc {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ConfigError(where + ": " + what);
}

void require_keys(const json& obj, const std::string& where,
                  std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known) fail(where, "unknown key \"" + it.key() + "\"");
    }
}

const json& member(const json& obj, const std::string& where, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) fail(where, std::string("missing key \"") + key + "\"");
    return *it;
}

double as_number(const json& j, const std::string& where) {
    if (!j.is_number()) fail(where, "expected a number");
    return j.get<double>();
}

int as_int(const json& j, const std::string& where) {
    if (!j.is_number_integer()) fail(where, "expected an integer");
    return j.get<int>();
}

std::string as_string(const json& j, const std::string& where) {
    if (!j.is_string()) fail(where, "expected a string");
    return j.get<std::string>();
}

std::vector<double> as_vector(const json& j, const std::string& where) {
    if (!j.is_array()) fail(where, "expected an array of numbers");
    std::vector<double> out;
    out.reserve(j.size());
    for (size_t i = 0; i < j.size(); ++i)
        out.push_back(as_number(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

std::vector<std::vector<double>> as_matrix(const json& j, const std::string& where) {
    if (!j.is_array()) fail(where, "expected an array of rows");
    std::vector<std::vector<double>> out;
    out.reserve(j.size());
    for (size_t i = 0; i < j.size(); ++i)
        out.push_back(as_vector(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

TransitionModel parse_chain(const json& j, int l, const std::string& where) {
    if (j.is_string()) {
        if (j.get<std::string>() == "uniform") return make_uniform(l);
        fail(where, "only the shortcut \"uniform\" is accepted as a string");
    }
    if (!j.is_object()) fail(where, "expected an object or \"uniform\"");
    const std::string kind = as_string(member(j, where, "kind"), where + ".kind");
    if (kind == "uniform") {
        require_keys(j, where, {"kind"});
        return make_uniform(l);
    }
    if (kind == "iid") {
        require_keys(j, where, {"kind", "p"});
        return make_iid(as_vector(member(j, where, "p"), where + ".p"));
    }
    if (kind == "markov") {
        require_keys(j, where, {"kind", "rows", "initial"});
        auto rows = as_matrix(member(j, where, "rows"), where + ".rows");
        ProbVector initial;
        if (j.contains("initial"))
            initial = as_vector(j["initial"], where + ".initial");
        return make_markov(std::move(rows), std::move(initial));
    }
    if (kind == "lifted") {
        require_keys(j, where, {"kind", "base", "k"});
        const int k = as_int(member(j, where, "k"), where + ".k");
        return lift_chain(parse_chain(member(j, where, "base"), l, where + ".base"), k);
    }
    fail(where, "unknown chain kind \"" + kind + "\"");
}

WeightSpec parse_weight(const json& j, int l, const std::string& where) {
    if (!j.is_object()) fail(where, "expected an object");
    const std::string kind = as_string(member(j, where, "kind"), where + ".kind");
    if (kind == "additive") {
        require_keys(j, where, {"kind", "phi"});
        auto phi = as_vector(member(j, where, "phi"), where + ".phi");
        if (static_cast<int>(phi.size()) != l)
            fail(where, "phi must have one entry per symbol");
        return additive_weight(std::move(phi));
    }
    if (kind == "additive_k") {
        require_keys(j, where, {"kind", "phi", "k"});
        auto phi = as_vector(member(j, where, "phi"), where + ".phi");
        const int k = as_int(member(j, where, "k"), where + ".k");
        return additive_k_weight(std::move(phi), l, k);
    }
    if (kind == "multiplicative") {
        require_keys(j, where, {"kind", "psi"});
        auto psi = as_vector(member(j, where, "psi"), where + ".psi");
        if (static_cast<int>(psi.size()) != l)
            fail(where, "psi must have one entry per symbol");
        return multiplicative_weight(std::move(psi));
    }
    fail(where, "unknown weight kind \"" + kind + "\"");
}

LogBase parse_log_base_json(const json& j) {
    if (j.is_number_integer() && j.get<int>() == 2) return LogBase::two;
    if (j.is_string()) return parse_log_base(j.get<std::string>());
    throw ConfigError("log_base: expected \"e\", \"2\", or \"ell\"");
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config: expected a JSON object");
    require_keys(doc, "config",
                 {"alphabet_size", "source", "storage", "weight", "eta", "eps", "v",
                  "log_base", "seed", "output_path"});

    RunConfig cfg;
    try {
        cfg.alphabet_size = as_int(member(doc, "config", "alphabet_size"), "alphabet_size");
        if (cfg.alphabet_size < 2) throw ConfigError("alphabet_size: must be at least 2");
        cfg.source = parse_chain(member(doc, "config", "source"), cfg.alphabet_size, "source");
        if (doc.contains("storage"))
            cfg.storage = parse_chain(doc["storage"], cfg.alphabet_size, "storage");
        else
            cfg.storage = make_uniform(cfg.alphabet_size);
        require_valid(cfg.source);
        require_valid(cfg.storage);
        cfg.weight = parse_weight(member(doc, "config", "weight"), cfg.alphabet_size, "weight");
        cfg.eta = as_number(member(doc, "config", "eta"), "eta");
        cfg.eps = as_number(member(doc, "config", "eps"), "eps");
        if (!(cfg.eps > 0.0)) throw ConfigError("eps: must be positive");
        if (doc.contains("v")) {
            cfg.v = as_number(doc["v"], "v");
            if (!std::isfinite(cfg.v)) throw ConfigError("v: must be finite");
        } else {
            cfg.v = std::log(static_cast<double>(cfg.alphabet_size));
        }
        if (doc.contains("log_base")) cfg.log_base = parse_log_base_json(doc["log_base"]);
        if (doc.contains("seed")) {
            const json& s = doc["seed"];
            if (!s.is_number_unsigned())
                throw ConfigError("seed: expected a nonnegative integer");
            cfg.seed = s.get<std::uint64_t>();
        }
        if (doc.contains("output_path"))
            cfg.output_path = as_string(doc["output_path"], "output_path");
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        // Structural/domain failures from the chain and weight factories.
        throw ConfigError(std::string("config rejected: ") + e.what());
    }

    if (cfg.source.alphabet_size != cfg.alphabet_size)
        throw ConfigError("source: alphabet size does not match alphabet_size");
    if (cfg.storage.alphabet_size != cfg.alphabet_size)
        throw ConfigError("storage: alphabet size does not match alphabet_size");
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

LogBase parse_log_base(const std::string& token) {
    if (token == "e") return LogBase::e;
    if (token == "2") return LogBase::two;
    if (token == "ell" || token == "l") return LogBase::ell;
    throw ConfigError("log_base: expected \"e\", \"2\", or \"ell\", got \"" + token + "\"");
}

double log_scale(LogBase base, int alphabet_size) {
    switch (base) {
        case LogBase::e:
            return 1.0;
        case LogBase::two:
            return 1.0 / std::log(2.0);
        case LogBase::ell:
            return 1.0 / std::log(static_cast<double>(alphabet_size));
    }
    return 1.0;
}

}  // namespace sdc
