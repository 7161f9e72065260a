#include "sdc/empirical.hpp"

#include <cmath>
#include <limits>

namespace sdc {

EmpiricalMeasure occupancy(const String& x, int alphabet_size, int block_k) {
    const int n = static_cast<int>(x.size());
    if (n < 1) throw DomainError("occupancy: empty string");
    if (alphabet_size < 2) throw DomainError("occupancy: alphabet size must be at least 2");
    if (block_k < 1) throw DomainError("occupancy: block length must be positive");
    for (int s : x)
        if (s < 0 || s >= alphabet_size) throw DomainError("occupancy: symbol out of range");

    EmpiricalMeasure e;
    e.n = n;
    e.alphabet_size = alphabet_size;
    e.block_k = block_k;

    e.u.assign(alphabet_size, 0.0);
    for (int s : x) e.u[s] += 1.0;
    for (double& v : e.u) v /= n;

    if (n >= 2) {
        e.t.assign(static_cast<size_t>(alphabet_size) * alphabet_size, 0.0);
        for (int i = 0; i + 1 < n; ++i)
            e.t[static_cast<size_t>(x[i]) * alphabet_size + x[i + 1]] += 1.0;
        for (double& v : e.t) v /= (n - 1);
    }

    if (block_k == 1) {
        e.zeta = e.u;  // 1-blocks are the symbols themselves
    } else if (n >= block_k) {
        long long blocks = 1;
        for (int i = 0; i < block_k; ++i) blocks *= alphabet_size;
        e.zeta.assign(blocks, 0.0);
        int idx = block_index(x.data(), block_k, alphabet_size);
        e.zeta[idx] += 1.0;
        for (int i = block_k; i < n; ++i) {
            idx = shift_block(idx, x[i], block_k, alphabet_size);
            e.zeta[idx] += 1.0;
        }
        for (double& v : e.zeta) v /= (n - block_k + 1);
    }
    return e;
}

WeightSpec additive_weight(std::vector<double> phi) {
    if (phi.size() < 2) throw SpecError("additive_weight: phi needs one entry per symbol");
    WeightSpec w;
    w.kind = WeightKind::additive;
    w.phi = std::move(phi);
    return w;
}

WeightSpec additive_k_weight(std::vector<double> phi_blocks, int alphabet_size, int k) {
    if (k < 1) throw SpecError("additive_k_weight: k must be positive");
    long long blocks = 1;
    for (int i = 0; i < k; ++i) blocks *= alphabet_size;
    if (static_cast<long long>(phi_blocks.size()) != blocks)
        throw SpecError("additive_k_weight: phi needs one entry per k-block");
    WeightSpec w;
    w.kind = WeightKind::additive_k;
    w.phi = std::move(phi_blocks);
    w.k = k;
    w.alphabet_size = alphabet_size;
    return w;
}

WeightSpec multiplicative_weight(std::vector<double> psi) {
    if (psi.size() < 2) throw SpecError("multiplicative_weight: psi needs one entry per symbol");
    for (double v : psi)
        if (!(v > 0.0)) throw SpecError("multiplicative_weight: psi must be strictly positive");
    WeightSpec w;
    w.kind = WeightKind::multiplicative;
    w.psi = std::move(psi);
    return w;
}

std::vector<double> effective_phi(const WeightSpec& w) {
    switch (w.kind) {
        case WeightKind::additive:
            return w.phi;
        case WeightKind::multiplicative: {
            std::vector<double> phi(w.psi.size());
            for (size_t i = 0; i < w.psi.size(); ++i) phi[i] = std::log(w.psi[i]);
            return phi;
        }
        case WeightKind::additive_k:
            throw SpecError("effective_phi: k-block weights have no one-digit form");
    }
    throw SpecError("effective_phi: unknown weight kind");
}

double weight_rate(const String& x, const WeightSpec& w) {
    const int n = static_cast<int>(x.size());
    switch (w.kind) {
        case WeightKind::additive: {
            EmpiricalMeasure e = occupancy(x, static_cast<int>(w.phi.size()));
            double acc = 0.0;
            for (size_t i = 0; i < e.u.size(); ++i) acc += e.u[i] * w.phi[i];
            return acc;
        }
        case WeightKind::multiplicative: {
            EmpiricalMeasure e = occupancy(x, static_cast<int>(w.psi.size()));
            double acc = 0.0;
            for (size_t i = 0; i < e.u.size(); ++i) acc += e.u[i] * std::log(w.psi[i]);
            return acc;
        }
        case WeightKind::additive_k: {
            if (n < w.k) throw DomainError("weight_rate: string shorter than block length");
            EmpiricalMeasure e = occupancy(x, w.alphabet_size, w.k);
            double acc = 0.0;
            for (size_t b = 0; b < e.zeta.size(); ++b) acc += e.zeta[b] * w.phi[b];
            return acc;
        }
    }
    throw SpecError("weight_rate: unknown weight kind");
}

double info_rate(const String& x, const TransitionModel& source) {
    require_valid(source);
    const int n = static_cast<int>(x.size());
    const double inf = std::numeric_limits<double>::infinity();

    if (source.kind != ChainKind::markov_order_k) {
        if (n < 2) throw DomainError("info_rate: need at least two symbols");
        EmpiricalMeasure e = occupancy(x, source.alphabet_size);
        double acc = 0.0;
        const int l = source.alphabet_size;
        for (int i = 0; i < l; ++i)
            for (int j = 0; j < l; ++j) {
                double t = e.t[static_cast<size_t>(i) * l + j];
                if (t == 0.0) continue;
                double p = source.rows[i][j];
                if (p == 0.0) return inf;
                acc -= t * std::log(p);
            }
        return acc;
    }

    const int k = source.order;
    if (n <= k) throw DomainError("info_rate: need more symbols than the source order");
    const int l = source.alphabet_size;
    for (int s : x)
        if (s < 0 || s >= l) throw DomainError("info_rate: symbol out of range");
    double acc = 0.0;
    int w = block_index(x.data(), k, l);
    for (int i = k; i < n; ++i) {
        int w2 = shift_block(w, x[i], k, l);
        double p = source.rows[w][w2];
        if (p == 0.0) return inf;
        acc -= std::log(p);
        w = w2;
    }
    return acc / (n - k);
}

SelectionSpec make_selection(TransitionModel source, WeightSpec weight, double eta, double eps) {
    if (!(eps > 0.0)) throw SpecError("make_selection: eps must be positive");
    SelectionSpec spec;
    spec.h = entropy_rate(source);  // validates the source
    spec.source = std::move(source);
    spec.weight = std::move(weight);
    spec.eta = eta;
    spec.eps = eps;

    const int l = spec.source.alphabet_size;
    size_t want = spec.weight.kind == WeightKind::additive_k
                      ? [&] {
                            size_t b = 1;
                            for (int i = 0; i < spec.weight.k; ++i) b *= l;
                            return b;
                        }()
                      : static_cast<size_t>(l);
    const auto& coeff = spec.weight.kind == WeightKind::multiplicative ? spec.weight.psi
                                                                       : spec.weight.phi;
    if (coeff.size() != want)
        throw SpecError("make_selection: weight dimension does not match the source alphabet");
    return spec;
}

bool select(const String& x, const SelectionSpec& spec) {
    const int n = static_cast<int>(x.size());
    if (n < 1) throw DomainError("select: empty string");
    double w = weight_rate(x, spec.weight);
    if (!(w >= spec.eta - kSelectGuard)) return false;
    int min_len = spec.source.kind == ChainKind::markov_order_k ? spec.source.order + 1 : 2;
    if (n < min_len) return true;  // no pair statistics: information constraint is vacuous
    double info = info_rate(x, spec.source);
    return info <= spec.h + spec.eps + kSelectGuard;
}

}  // namespace sdc
