#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "sdc/markov.hpp"

using namespace sdc;

namespace {

// Random strictly positive row-stochastic model (always valid).
TransitionModel random_model(int l, std::mt19937_64& rng) {
    std::vector<std::vector<double>> rows(l, std::vector<double>(l));
    for (auto& row : rows) {
        double sum = 0.0;
        for (double& v : row) {
            v = 0.05 + 0.95 * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
            sum += v;
        }
        for (double& v : row) v /= sum;
    }
    return make_markov(std::move(rows));
}

double row_entropy(const std::vector<double>& row) {
    double h = 0.0;
    for (double p : row)
        if (p > 0.0) h -= p * std::log(p);
    return h;
}

}  // namespace

TEST_CASE("binary stationary distribution matches beta/(a+b)") {
    TransitionModel m = make_binary(0.5, 0.1);
    ProbVector pi = stationary_distribution(m);
    CHECK(pi[0] == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
    CHECK(pi[1] == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("stationary residual and positivity on random models") {
    std::mt19937_64 rng(7);
    for (int l : {2, 3, 5, 8}) {
        for (int rep = 0; rep < 5; ++rep) {
            TransitionModel m = random_model(l, rng);
            ProbVector pi = stationary_distribution(m);
            double resid = 0.0, sum = 0.0;
            for (int j = 0; j < l; ++j) {
                double acc = 0.0;
                for (int i = 0; i < l; ++i) acc += pi[i] * m.rows[i][j];
                resid = std::max(resid, std::abs(acc - pi[j]));
                CHECK(pi[j] > 0.0);
                sum += pi[j];
            }
            CHECK(resid <= 1e-12);
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("entropy rate of the (1/2, 1/10) binary chain") {
    TransitionModel m = make_binary(0.5, 0.1);
    // pi-weighted row entropies with pi = (1/6, 5/6) known in closed form.
    double expected = (1.0 / 6.0) * row_entropy({0.5, 0.5}) + (5.0 / 6.0) * row_entropy({0.1, 0.9});
    CHECK(entropy_rate(m) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("entropy rate bounds and the uniform maximum") {
    std::mt19937_64 rng(11);
    for (int l : {2, 3, 4}) {
        CHECK(entropy_rate(make_uniform(l)) == std::log(static_cast<double>(l)));
        for (int rep = 0; rep < 5; ++rep) {
            TransitionModel m = random_model(l, rng);
            double h = entropy_rate(m);
            CHECK(h >= 0.0);
            CHECK(h <= std::log(static_cast<double>(l)) + 1e-12);
        }
    }
    // Strictly below log l for a clearly non-uniform chain.
    CHECK(entropy_rate(make_binary(0.2, 0.2)) < std::log(2.0) - 1e-3);
}

TEST_CASE("iid entropy rate uses the single-row formula") {
    ProbVector p{0.2, 0.3, 0.5};
    TransitionModel m = make_iid(p);
    CHECK(entropy_rate(m) == row_entropy(p));
    CHECK(stationary_distribution(m)[0] == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("validation rejects structural violations in order") {
    TransitionModel bad;
    bad.alphabet_size = 2;
    bad.kind = ChainKind::markov;
    bad.rows = {{0.5, 0.6}, {0.5, 0.5}};
    bad.initial = {0.5, 0.5};
    ValidationReport r = validate(bad);
    CHECK_FALSE(r.ok());
    CHECK(r.detail.find("row-stochasticity") != std::string::npos);

    TransitionModel reducible;
    reducible.alphabet_size = 2;
    reducible.kind = ChainKind::markov;
    reducible.rows = {{1.0, 0.0}, {0.5, 0.5}};
    reducible.initial = {0.5, 0.5};
    r = validate(reducible);
    CHECK_FALSE(r.irreducible);
    CHECK(r.detail.find("irreducibility") != std::string::npos);
    CHECK_THROWS_AS(require_valid(reducible), StructuralError);

    TransitionModel periodic;
    periodic.alphabet_size = 2;
    periodic.kind = ChainKind::markov;
    periodic.rows = {{0.0, 1.0}, {1.0, 0.0}};
    periodic.initial = {0.5, 0.5};
    r = validate(periodic);
    CHECK(r.irreducible);
    CHECK_FALSE(r.aperiodic);
    CHECK(r.detail.find("aperiodicity") != std::string::npos);

    // Period 3 cycle with a chord of length 1 becomes aperiodic only with a loop.
    TransitionModel cycle3;
    cycle3.alphabet_size = 3;
    cycle3.kind = ChainKind::markov;
    cycle3.rows = {{0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}, {1.0, 0.0, 0.0}};
    cycle3.initial = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    CHECK_FALSE(validate(cycle3).aperiodic);
    cycle3.rows = {{0.1, 0.9, 0.0}, {0.0, 0.0, 1.0}, {1.0, 0.0, 0.0}};
    CHECK(validate(cycle3).ok());
}

TEST_CASE("string log probability accumulates factors and handles zeros") {
    TransitionModel m;
    m.alphabet_size = 2;
    m.kind = ChainKind::markov;
    m.rows = {{0.9, 0.1}, {0.2, 0.8}};
    m.initial = {1.0, 0.0};
    CHECK(string_log_prob(m, {0, 1}) == doctest::Approx(std::log(0.1)).epsilon(1e-15));
    CHECK(string_log_prob(m, {1}) == -std::numeric_limits<double>::infinity());
    CHECK_THROWS_AS(string_log_prob(m, {0, 2}), DomainError);
    CHECK_THROWS_AS(string_log_prob(m, {}), DomainError);
}

TEST_CASE("string probabilities sum to one over all strings") {
    std::mt19937_64 rng(23);
    TransitionModel m = random_model(2, rng);
    for (int n : {1, 6, 12}) {
        double total = 0.0;
        for (long long code = 0; code < (1ll << n); ++code) {
            String x(n);
            for (int i = 0; i < n; ++i) x[i] = static_cast<int>((code >> i) & 1);
            total += std::exp(string_log_prob(m, x));
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("sampling the uniform chain gives balanced symbol frequencies") {
    TransitionModel m = make_uniform(2);
    String x = sample_string(m, 100000, 42);
    double ones = 0.0;
    for (int s : x) ones += s;
    CHECK(std::abs(ones / 100000.0 - 0.5) < 0.01);
    // Determinism: same seed, same string.
    CHECK(sample_string(m, 64, 9001) == sample_string(m, 64, 9001));
    CHECK(sample_string(m, 64, 9001) != sample_string(m, 64, 9002));
}

TEST_CASE("order-2 lift has shift-consistent support and matching entropy") {
    TransitionModel base = make_binary(0.5, 0.1);
    TransitionModel lifted = lift_chain(base, 2);
    CHECK(lifted.kind == ChainKind::markov_order_k);
    CHECK(lifted.state_count() == 4);
    for (const auto& row : lifted.rows) {
        int positive = 0;
        for (double v : row) positive += v > 0.0;
        CHECK(positive <= 2);
    }
    CHECK(validate(lifted).ok());
    CHECK(entropy_rate(lifted) == doctest::Approx(entropy_rate(base)).epsilon(1e-13));

    // k-step block reading with the 1/k prefactor agrees with the one-step rate.
    ProbVector pi = stationary_distribution(lifted);
    double h2 = 0.0;
    for (int u = 0; u < 4; ++u)
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) {
                double p2 = lifted.rows[u][a] * lifted.rows[a][b];
                if (p2 > 0.0) h2 -= pi[u] * p2 * std::log(p2);
            }
    CHECK(0.5 * h2 == doctest::Approx(entropy_rate(lifted)).epsilon(1e-12));
}

TEST_CASE("order-k lift reproduces first-order string probabilities") {
    TransitionModel base = make_binary(0.3, 0.6);
    TransitionModel lifted = lift_chain(base, 3);
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 20; ++rep) {
        String x(10);
        for (int& s : x) s = static_cast<int>(rng() & 1);
        CHECK(string_log_prob(lifted, x) ==
              doctest::Approx(string_log_prob(base, x)).epsilon(1e-12));
    }
    CHECK(lift_chain(base, 1).kind == ChainKind::markov);
}

TEST_CASE("lift_to_order_k rejects off-shift mass") {
    std::vector<std::vector<double>> rows(4, std::vector<double>(4, 0.25));
    CHECK_THROWS_AS(lift_to_order_k(2, 2, rows), StructuralError);
}

TEST_CASE("block index helpers round-trip") {
    int syms[3];
    for (int idx = 0; idx < 27; ++idx) {
        block_symbols(idx, 3, 3, syms);
        CHECK(block_index(syms, 3, 3) == idx);
    }
    // Shift drops the oldest (most significant) symbol.
    int u = block_index((const int[]){1, 0, 2}, 3, 3);
    int v = shift_block(u, 1, 3, 3);
    block_symbols(v, 3, 3, syms);
    CHECK(syms[0] == 0);
    CHECK(syms[1] == 2);
    CHECK(syms[2] == 1);
}
