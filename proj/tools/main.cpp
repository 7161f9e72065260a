// Command-line driver: config ingestion, command dispatch, CSV/JSON output.
// All library values are nats; conversion to the configured base happens here.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sdc/config.hpp"
#include "sdc/empirical.hpp"
#include "sdc/errors.hpp"
#include "sdc/ldr.hpp"
#include "sdc/markov.hpp"
#include "sdc/oracle.hpp"
#include "sdc/rates.hpp"

namespace {

using ordered_json = nlohmann::ordered_json;

// JSON has no infinities; emit them as strings so documents stay parseable.
ordered_json json_number(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

std::string format_g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void emit(const std::string& text, const std::string& output_path) {
    std::fwrite(text.data(), 1, text.size(), stdout);
    if (!output_path.empty()) {
        std::ofstream f(output_path, std::ios::binary);
        if (!f) throw sdc::ConfigError("cannot open output path: " + output_path);
        f << text;
    }
}

const char* kind_name(sdc::ChainKind k) {
    switch (k) {
        case sdc::ChainKind::markov: return "markov";
        case sdc::ChainKind::iid: return "iid";
        case sdc::ChainKind::uniform: return "uniform";
        case sdc::ChainKind::markov_order_k: return "markov_order_k";
    }
    return "?";
}

const char* status_name(sdc::RateStatus s) {
    switch (s) {
        case sdc::RateStatus::optimal: return "optimal";
        case sdc::RateStatus::infeasible: return "infeasible";
        case sdc::RateStatus::at_boundary: return "at_boundary";
        case sdc::RateStatus::at_uniform: return "at_uniform";
    }
    return "?";
}

// The decay exponent needs a pair-coordinate set; multiplicative weights go
// through their logarithmic form first.
sdc::ConstrainedSet decay_set(const sdc::RunConfig& cfg) {
    sdc::WeightSpec w = cfg.weight;
    if (w.kind == sdc::WeightKind::multiplicative)
        w = sdc::additive_weight(sdc::effective_phi(w));
    if (w.kind == sdc::WeightKind::additive_k)
        return sdc::build_set_Blk(cfg.source, w, cfg.eta, cfg.eps);
    return sdc::build_set_B(cfg.source, w, cfg.eta, cfg.eps);
}

// A block-coordinate set measures the storage chain through sliding windows,
// so the chain must run in the same block-state coordinates.
sdc::TransitionModel decay_storage(const sdc::RunConfig& cfg, const sdc::ConstrainedSet& set) {
    if (cfg.storage.state_count() == set.states) return cfg.storage;
    if (set.block_k > 1 && cfg.storage.order == 1)
        return sdc::lift_chain(cfg.storage, set.block_k);
    return cfg.storage;
}

int cmd_chain_info(const sdc::RunConfig& cfg, double factor) {
    const sdc::ValidationReport report = sdc::validate(cfg.source);
    ordered_json out;
    out["kind"] = kind_name(cfg.source.kind);
    out["alphabet_size"] = cfg.source.alphabet_size;
    out["order"] = cfg.source.order;
    out["states"] = cfg.source.state_count();
    out["stationary"] = sdc::stationary_distribution(cfg.source);
    out["entropy_rate"] = sdc::entropy_rate(cfg.source) * factor;
    out["valid"] = report.ok();
    out["validity"] = ordered_json{{"row_stochastic", report.row_stochastic},
                                   {"kind_consistent", report.kind_consistent},
                                   {"irreducible", report.irreducible},
                                   {"aperiodic", report.aperiodic},
                                   {"detail", report.detail}};
    emit(out.dump(2) + "\n", cfg.output_path);
    return 0;
}

int cmd_ldr_curve(double alpha, double beta, int points, double factor,
                  const std::string& output_path) {
    const sdc::TransitionModel chain = sdc::make_binary(alpha, beta);
    std::string text = "y0,m_star_closed,m_star_numeric,abs_diff\n";
    for (int i = 1; i <= points; ++i) {
        const double y0 = static_cast<double>(i) / (points + 1);
        const double closed = sdc::m_star_binary(alpha, beta, y0) * factor;
        const double numeric = sdc::m_star_numeric(chain, {y0, 1.0 - y0}) * factor;
        text += format_g(y0) + "," + format_g(closed) + "," + format_g(numeric) + "," +
                format_g(std::fabs(closed - numeric)) + "\n";
    }
    emit(text, output_path);
    return 0;
}

int cmd_rate(const sdc::RunConfig& cfg, double factor) {
    const sdc::ConstrainedSet set = decay_set(cfg);
    const sdc::RateResult k = sdc::kappa_inf_rate(decay_storage(cfg, set), set);
    const double gamma = sdc::volume_exponent(k, cfg.v);
    ordered_json out;
    out["kappa"] = json_number(k.value * factor);
    out["gamma"] = json_number(gamma * factor);
    if (cfg.weight.kind == sdc::WeightKind::multiplicative)
        out["iota"] = json_number(gamma * factor);
    out["v"] = cfg.v * factor;
    out["optimizer"] = k.optimizer;
    out["status"] = status_name(k.status);
    emit(out.dump(2) + "\n", cfg.output_path);
    return k.status == sdc::RateStatus::infeasible ? 3 : 0;
}

int cmd_enumerate(const sdc::RunConfig& cfg, int n, double factor) {
    const sdc::SelectionSpec spec =
        sdc::make_selection(cfg.source, cfg.weight, cfg.eta, cfg.eps);
    const sdc::EnumerationResult e = sdc::enumerate_selected(spec, n);
    const double p = sdc::exact_probability(cfg.storage, spec, n);
    const double log_rate =
        e.count > 0 ? std::log(static_cast<double>(e.count)) / n
                    : -std::numeric_limits<double>::infinity();
    ordered_json out;
    out["n"] = n;
    out["b_n"] = e.count;
    out["p_st"] = p;
    out["log_rate"] = json_number(log_rate * factor);
    emit(out.dump(2) + "\n", cfg.output_path);
    return 0;
}

int cmd_simulate(const sdc::RunConfig& cfg, int n, long long trials) {
    const sdc::SelectionSpec spec =
        sdc::make_selection(cfg.source, cfg.weight, cfg.eta, cfg.eps);
    const sdc::MonteCarloResult m =
        sdc::monte_carlo_probability(cfg.storage, spec, n, trials, cfg.seed);
    ordered_json out;
    out["estimate"] = m.estimate;
    out["stderr"] = m.std_error;
    emit(out.dump(2) + "\n", cfg.output_path);
    return 0;
}

int cmd_convergence(const sdc::RunConfig& cfg, const std::vector<int>& ns, double factor) {
    const sdc::SelectionSpec spec =
        sdc::make_selection(cfg.source, cfg.weight, cfg.eta, cfg.eps);
    const sdc::RateResult g =
        sdc::gamma_exponent(cfg.source, cfg.weight, cfg.eta, cfg.eps);
    const sdc::ConstrainedSet set = decay_set(cfg);
    const sdc::RateResult k = sdc::kappa_inf_rate(decay_storage(cfg, set), set);
    const auto count_rows =
        sdc::rate_convergence(spec, cfg.storage, g, ns, sdc::ConvergenceMode::count);
    const auto prob_rows = sdc::rate_convergence(spec, cfg.storage, k, ns,
                                                 sdc::ConvergenceMode::probability);
    std::string text = "n,count_rate,gamma,count_gap,prob_rate,kappa,prob_gap\n";
    for (size_t i = 0; i < count_rows.size(); ++i) {
        const auto& c = count_rows[i];
        const auto& p = prob_rows[i];
        text += std::to_string(c.n) + "," + format_g(c.rate * factor) + "," +
                format_g(c.analytic * factor) + "," + format_g(c.gap * factor) + "," +
                format_g(p.rate * factor) + "," + format_g(p.analytic * factor) + "," +
                format_g(p.gap * factor) + "\n";
    }
    emit(text, cfg.output_path);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exponents and oracles for selected high-utility string sets"};
    app.require_subcommand(1);
    std::string base_flag;
    app.add_option("--log-base", base_flag, "Output log base: e, 2, or ell")
        ->check(CLI::IsMember({"e", "2", "ell", "l"}));

    std::string config_path;
    double alpha = 0.0, beta = 0.0;
    int points = 99;
    int n = 0;
    long long trials = 0;
    std::vector<int> n_list;

    auto* info = app.add_subcommand(
        "chain-info", "Report the source chain: stationary law, entropy rate, validity");
    info->add_option("config", config_path, "JSON config file")
        ->required()
        ->check(CLI::ExistingFile);

    auto* curve = app.add_subcommand(
        "ldr-curve", "Tabulate the two-letter rate function: closed form vs numeric");
    curve->add_option("--alpha", alpha, "P(0 -> 1)")->required();
    curve->add_option("--beta", beta, "P(1 -> 0)")->required();
    curve->add_option("--points", points, "Interior grid size")
        ->check(CLI::PositiveNumber);
    curve->add_option("config", config_path, "Optional JSON config (log base, output path)")
        ->check(CLI::ExistingFile);

    auto* rate = app.add_subcommand(
        "rate", "Compute the decay and volume exponents for the configured selection");
    rate->add_option("config", config_path, "JSON config file")
        ->required()
        ->check(CLI::ExistingFile);

    auto* census = app.add_subcommand("enumerate", "Exact selected-set census at length n");
    census->add_option("--n", n, "String length")->required()->check(CLI::PositiveNumber);
    census->add_option("config", config_path, "JSON config file")
        ->required()
        ->check(CLI::ExistingFile);

    auto* sim =
        app.add_subcommand("simulate", "Monte Carlo selected-set probability at length n");
    sim->add_option("--n", n, "String length")->required()->check(CLI::PositiveNumber);
    sim->add_option("--trials", trials, "Sample count")->required()->check(CLI::PositiveNumber);
    sim->add_option("config", config_path, "JSON config file")
        ->required()
        ->check(CLI::ExistingFile);

    auto* conv = app.add_subcommand(
        "convergence", "Finite-length rates against the analytic exponents over an n grid");
    conv->add_option("--n-list", n_list, "Ascending string lengths")
        ->required()
        ->expected(-1);
    conv->add_option("config", config_path, "JSON config file")
        ->required()
        ->check(CLI::ExistingFile);

    for (auto* sub : {info, curve, rate, census, sim, conv}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        sdc::RunConfig cfg;
        const bool have_config = !config_path.empty();
        if (have_config) cfg = sdc::load_config(config_path);
        sdc::LogBase base = cfg.log_base;
        if (!base_flag.empty()) base = sdc::parse_log_base(base_flag);
        const double factor =
            sdc::log_scale(base, have_config ? cfg.alphabet_size : 2);

        if (info->parsed()) return cmd_chain_info(cfg, factor);
        if (curve->parsed())
            return cmd_ldr_curve(alpha, beta, points, factor,
                                 have_config ? cfg.output_path : std::string());
        if (rate->parsed()) return cmd_rate(cfg, factor);
        if (census->parsed()) return cmd_enumerate(cfg, n, factor);
        if (sim->parsed()) return cmd_simulate(cfg, n, trials);
        if (conv->parsed()) return cmd_convergence(cfg, n_list, factor);
    } catch (const sdc::SizeError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
