#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "lossq/dists.hpp"
#include "lossq/errors.hpp"

using namespace lossq;

namespace {

// Test-side quadrature of int_x^inf S(u) du, independent of the library's
// integration path: plain composite Simpson on a fixed fine grid.
template <typename Surv>
double brute_tail_integral(Surv&& surv, double x, double upper) {
    const int n = 200000;  // even
    const double h = (upper - x) / n;
    double acc = surv(x) + surv(upper);
    for (int i = 1; i < n; ++i) acc += surv(x + h * i) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

// Independent closed form for the Erlang mean residual life via the
// stop-loss transform: E(X-x)^+ = (k/r) S_{k+1}(x) - x S_k(x).
double erlang_mrl_oracle(int shape, double rate, double x) {
    auto surv = [&](int k, double t) {
        double term = std::exp(-rate * t);
        double sum = term;
        for (int i = 1; i < k; ++i) {
            term *= rate * t / i;
            sum += term;
        }
        return sum;
    };
    const double sk = surv(shape, x);
    return ((shape / rate) * surv(shape + 1, x) - x * sk) / sk;
}

std::vector<double> draw(const DistributionSpec& spec, std::size_t n, std::uint64_t seed) {
    RandomStream rng(seed);
    std::vector<double> out(n);
    for (auto& v : out) v = sample(spec, rng);
    return out;
}

}  // namespace

TEST_CASE("factory validation") {
    CHECK_THROWS_AS(make_exponential(-2.0), ConfigError);
    CHECK_THROWS_AS(make_exponential(0.0), ConfigError);
    CHECK_THROWS_AS(make_deterministic(0.0), ConfigError);
    CHECK_THROWS_AS(make_erlang(0, 1.0), ConfigError);
    CHECK_THROWS_AS(make_hyperexponential({0.5, 0.6}, {1.0, 2.0}), ConfigError);
    CHECK_THROWS_AS(make_hyperexponential({0.5, 0.5}, {1.0}), ConfigError);
    CHECK_THROWS_AS(make_uniform(-1.0, 2.0), ConfigError);
    CHECK_THROWS_AS(make_uniform(2.0, 2.0), ConfigError);
    CHECK_THROWS_AS(make_lattice(1.0, {1, 1}, {0.5, 0.5}), ConfigError);
    CHECK_THROWS_AS(make_lattice(1.0, {0, 2}, {0.5, 0.5}), ConfigError);
    CHECK_THROWS_AS(make_lattice(-1.0, {1}, {1.0}), ConfigError);
}

TEST_CASE("lattice gcd folds into the span") {
    const auto spec = make_lattice(1.0, {2, 4}, {0.5, 0.5});
    const auto& lat = std::get<LatticeDiscrete>(spec);
    CHECK(lat.span == doctest::Approx(2.0));
    CHECK(lat.multipliers == std::vector<int>{1, 2});

    // Canonical already: untouched.
    const auto spec2 = make_lattice(0.5, {1, 3}, {0.25, 0.75});
    const auto& lat2 = std::get<LatticeDiscrete>(spec2);
    CHECK(lat2.span == doctest::Approx(0.5));
    CHECK(lat2.multipliers == std::vector<int>{1, 3});
}

TEST_CASE("analytic means") {
    CHECK(mean(make_erlang(2, 4.0)) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(mean(make_hyperexponential({0.5, 0.5}, {0.5, 2.0})) ==
          doctest::Approx(1.25).epsilon(1e-12));
    CHECK(mean(make_lattice(1.0, {1, 3}, {0.5, 0.5})) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(mean(make_exponential(2.0)) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(mean(make_uniform(1.0, 3.0)) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("sampling point masses and lattice frequencies") {
    RandomStream rng(7);
    const auto det = make_deterministic(2.0);
    for (int i = 0; i < 100; ++i) CHECK(sample(det, rng) == 2.0);

    const auto lat = make_lattice(1.0, {1, 3}, {0.5, 0.5});
    std::size_t ones = 0;
    const std::size_t n = 100000;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = sample(lat, rng);
        CHECK((v == 1.0 || v == 3.0));
        if (v == 1.0) ++ones;
    }
    // 3 sigma band around p = 0.5
    const double se = std::sqrt(0.25 / n);
    CHECK(std::abs(static_cast<double>(ones) / n - 0.5) < 3.0 * se);
}

TEST_CASE("sample means match analytic means within 4 standard errors") {
    const std::size_t n = 1000000;
    const std::vector<DistributionSpec> specs = {
        make_exponential(2.0),
        make_erlang(3, 2.0),
        make_hyperexponential({0.9, 0.1}, {2.0, 0.25}),
        make_uniform(0.5, 2.5),
        make_lattice(0.5, {1, 4}, {0.3, 0.7}),
        make_deterministic(1.5),
    };
    std::uint64_t seed = 1000;
    for (const auto& spec : specs) {
        const auto xs = draw(spec, n, seed++);
        double sum = 0.0;
        for (double v : xs) {
            CHECK(v > 0.0);
            sum += v;
        }
        const double m = sum / n;
        double ss = 0.0;
        for (double v : xs) ss += (v - m) * (v - m);
        const double se = std::sqrt(ss / (n - 1.0) / n);
        CHECK(std::abs(m - mean(spec)) <= 4.0 * se + 1e-12);
    }
}

TEST_CASE("identical seeds reproduce identical draw sequences") {
    const auto spec = make_hyperexponential({0.5, 0.5}, {0.5, 2.0});
    const auto a = draw(spec, 1000, 42);
    const auto b = draw(spec, 1000, 42);
    CHECK(a == b);
    const auto c = draw(spec, 1000, 43);
    CHECK(a != c);

    RandomStream s0(42, 0), s1(42, 1);
    CHECK(s0.next_u64() != s1.next_u64());
}

TEST_CASE("mean residual life closed forms") {
    CHECK(mean_residual_life(make_exponential(1.0), 7.3) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mean_residual_life(make_deterministic(5.0), 2.0) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(mean_residual_life(make_uniform(0.0, 2.0), 1.5) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(mean_residual_life(make_uniform(1.0, 3.0), 0.5) == doctest::Approx(1.5).epsilon(1e-12));

    const auto lat = make_lattice(1.0, {1, 3}, {0.5, 0.5});
    CHECK(mean_residual_life(lat, 1.5) == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(mean_residual_life(lat, 0.0) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("mrl at zero equals the mean for every family") {
    const std::vector<DistributionSpec> specs = {
        make_exponential(0.7),
        make_deterministic(3.0),
        make_erlang(4, 2.0),  // numeric path
        make_hyperexponential({0.5, 0.5}, {0.5, 2.0}),
        make_uniform(0.5, 2.0),
        make_lattice(0.5, {1, 2, 5}, {0.2, 0.5, 0.3}),
    };
    for (const auto& spec : specs)
        CHECK(std::abs(mean_residual_life(spec, 0.0) - mean(spec)) <= 1e-9);
}

TEST_CASE("hyperexponential mrl rises toward the reciprocal of the smallest rate") {
    const auto spec = make_hyperexponential({0.5, 0.5}, {0.5, 2.0});

    const double v10 = mean_residual_life(spec, 10.0);
    CHECK(v10 > 1.25);
    CHECK(v10 <= 2.0);

    double prev = mean_residual_life(spec, 0.0);
    for (double x = 2.0; x <= 40.0; x += 2.0) {
        const double v = mean_residual_life(spec, x);
        CHECK(v >= prev - 1e-12);
        prev = v;
    }
    CHECK(mean_residual_life(spec, 40.0) == doctest::Approx(2.0).epsilon(1e-3));

    // Independent check of the closed form by brute quadrature.
    auto surv = [&](double u) { return 0.5 * std::exp(-0.5 * u) + 0.5 * std::exp(-2.0 * u); };
    const double brute = brute_tail_integral(surv, 10.0, 120.0) / surv(10.0);
    CHECK(v10 == doctest::Approx(brute).epsilon(1e-7));
}

TEST_CASE("erlang mrl numeric integration against the stop-loss oracle") {
    const struct {
        int shape;
        double rate;
        double x;
    } cases[] = {{2, 1.0, 0.5}, {2, 1.0, 3.0}, {4, 2.0, 1.0}, {4, 2.0, 5.0}, {7, 0.5, 20.0},
                 {1, 3.0, 0.9}};
    for (const auto& c : cases) {
        const auto spec = make_erlang(c.shape, c.rate);
        const double got = mean_residual_life(spec, c.x);
        const double want = erlang_mrl_oracle(c.shape, c.rate, c.x);
        const double s = survival(spec, c.x);
        CHECK(std::abs(got - want) <= 1e-8 / s + 1e-9);
    }
}

TEST_CASE("mrl domain errors beyond the support") {
    CHECK_THROWS_AS(mean_residual_life(make_deterministic(5.0), 5.0), DomainError);
    CHECK_THROWS_AS(mean_residual_life(make_uniform(0.0, 2.0), 2.0), DomainError);
    CHECK_THROWS_AS(mean_residual_life(make_lattice(1.0, {1, 3}, {0.5, 0.5}), 3.0), DomainError);
    CHECK_THROWS_AS(mean_residual_life(make_exponential(1.0), -0.1), DomainError);
}

TEST_CASE("aging classification per family") {
    CHECK(classify_aging(make_exponential(3.0)) == AgingClass::Both);
    CHECK(classify_aging(make_deterministic(1.0)) == AgingClass::NBUE);
    CHECK(classify_aging(make_erlang(1, 2.0)) == AgingClass::Both);
    CHECK(classify_aging(make_erlang(2, 2.0)) == AgingClass::NBUE);
    CHECK(classify_aging(make_uniform(0.0, 1.0)) == AgingClass::NBUE);
    CHECK(classify_aging(make_hyperexponential({0.9, 0.1}, {2.0, 0.25})) == AgingClass::NWUE);
    CHECK(classify_aging(make_hyperexponential({0.5, 0.5}, {2.0, 2.0})) == AgingClass::Both);
    CHECK(classify_aging(make_lattice(2.0, {1}, {1.0})) == AgingClass::NBUE);
    CHECK(classify_aging(make_lattice(1.0, {1, 3}, {0.5, 0.5})) == AgingClass::Unknown);
}

TEST_CASE("nwue verdict is consistent with the mrl grid") {
    const auto spec = make_hyperexponential({0.9, 0.1}, {2.0, 0.25});
    REQUIRE(classify_aging(spec) == AgingClass::NWUE);
    const double m = mean(spec);
    for (double x = 0.0; x <= 20.0; x += 0.1)
        CHECK(mean_residual_life(spec, x) >= m - 1e-9);
}

TEST_CASE("classification agrees with the mrl inequality on the q-grid") {
    const std::vector<DistributionSpec> specs = {
        make_exponential(0.7),
        make_deterministic(3.0),
        make_erlang(4, 2.0),
        make_erlang(1, 0.5),
        make_hyperexponential({0.5, 0.5}, {0.5, 2.0}),
        make_hyperexponential({0.9, 0.1}, {2.0, 0.25}),
        make_uniform(0.5, 2.0),
        make_uniform(0.0, 4.0),
        make_lattice(2.0, {1}, {1.0}),
    };
    for (const auto& spec : specs) {
        const AgingClass cls = classify_aging(spec);
        const double m = mean(spec);
        const double hi = max_support(spec);
        for (int q = 0; q <= 20; ++q) {
            const double x = 0.25 * q * m;
            if (x >= hi) break;
            const double r = mean_residual_life(spec, x);
            switch (cls) {
                case AgingClass::NBUE: CHECK(r <= m + 1e-9); break;
                case AgingClass::NWUE: CHECK(r >= m - 1e-9); break;
                case AgingClass::Both: CHECK(std::abs(r - m) <= 1e-9); break;
                case AgingClass::Unknown: break;
            }
        }
    }
}

TEST_CASE("empirical mrl check: exponential memorylessness") {
    const auto spec = make_exponential(1.0);
    const auto xs = draw(spec, 1000000, 99);
    const std::vector<double> grid = {0.0, 1.0, 2.0};
    const auto rep = empirical_mrl_check(xs, grid);
    for (const auto& pt : rep.points) {
        REQUIRE(pt.conclusive);
        CHECK(std::abs(pt.mrl - 1.0) <= 2.0 * pt.se);
    }
    CHECK(rep.nbue_consistent);
    CHECK(rep.nwue_consistent);
}

TEST_CASE("empirical mrl check: deterministic is exact") {
    const auto xs = draw(make_deterministic(5.0), 20000, 5);
    const std::vector<double> grid = {0.0, 2.0};
    const auto rep = empirical_mrl_check(xs, grid);
    CHECK(rep.points[0].mrl == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(rep.points[1].mrl == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(rep.points[0].se == 0.0);
}

TEST_CASE("empirical mrl check: nwue pattern for the hyperexponential") {
    const auto spec = make_hyperexponential({0.5, 0.5}, {0.5, 2.0});
    const auto xs = draw(spec, 1000000, 123);
    const std::vector<double> grid = {0.0, 2.0, 6.0};
    const auto rep = empirical_mrl_check(xs, grid);
    CHECK(rep.nwue_consistent);
    for (const auto& pt : rep.points) {
        REQUIRE(pt.conclusive);
        CHECK(std::abs(pt.mrl - mean_residual_life(spec, pt.x)) <= 2.0 * pt.se);
    }
    // Above the mean and nondecreasing along the grid.
    CHECK(rep.points[1].mrl >= rep.sample_mean - 2.0 * rep.points[1].se);
    CHECK(rep.points[2].mrl >= rep.points[1].mrl - 2.0 * rep.points[2].se);
}

TEST_CASE("empirical mrl check guards") {
    const auto few = draw(make_exponential(1.0), 100, 3);
    CHECK_THROWS_AS(empirical_mrl_check(few, std::vector<double>{0.0}), EstimationError);

    // A grid point beyond the support is inconclusive, not an error.
    const auto xs = draw(make_deterministic(5.0), 20000, 4);
    const auto rep = empirical_mrl_check(xs, std::vector<double>{6.0});
    CHECK_FALSE(rep.points[0].conclusive);
    CHECK(rep.points[0].exceed_count == 0);
}

TEST_CASE("cdf and survival basics") {
    CHECK(cdf(make_deterministic(2.0), 1.9) == 0.0);
    CHECK(cdf(make_deterministic(2.0), 2.0) == 1.0);
    CHECK(cdf(make_lattice(1.0, {1, 3}, {0.5, 0.5}), 2.0) == doctest::Approx(0.5));
    CHECK(survival(make_exponential(2.0), 1.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
    CHECK(max_support(make_uniform(1.0, 3.0)) == doctest::Approx(3.0));
    CHECK(std::isinf(max_support(make_erlang(2, 1.0))));
    CHECK(is_point_mass(make_deterministic(1.0)));
    CHECK(is_point_mass(make_lattice(2.0, {1}, {1.0})));
    CHECK_FALSE(is_point_mass(make_lattice(1.0, {1, 3}, {0.5, 0.5})));
    CHECK_FALSE(is_point_mass(make_exponential(1.0)));
}
