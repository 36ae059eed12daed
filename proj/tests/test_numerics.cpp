#include <doctest.h>

#include <cmath>

#include "fairdec/numerics.hpp"
#include "oracles.hpp"

using namespace fairdec;

TEST_CASE("standard normal cdf matches quadrature") {
    CHECK(std_normal_cdf(0.0) == 0.5);
    CHECK(std_normal_cdf(1.96) == doctest::Approx(0.975).epsilon(1e-4));
    // Quadrature oracle pins the value near the 20th percentile.
    const double oracle = oracles::normal_cdf_quadrature(-0.8416);
    CHECK(oracle == doctest::Approx(0.2000).epsilon(5e-4));
    CHECK(std_normal_cdf(-0.8416) == doctest::Approx(oracle).epsilon(1e-10));
    for (double x = -8.0; x <= 8.0; x += 0.37) {
        CHECK(std::abs(std_normal_cdf(x) - oracles::normal_cdf_quadrature(x)) < 1e-12);
    }
    CHECK(std_normal_cdf(-1e9) == doctest::Approx(0.0));
    CHECK_THROWS_AS(std_normal_cdf(std::nan("")), ConfigError);
    CHECK_THROWS_AS(std_normal_cdf(INFINITY), ConfigError);
}

TEST_CASE("cdf is monotone non-decreasing") {
    double prev = 0.0;
    for (double x = -10.0; x <= 10.0; x += 0.01) {
        const double v = std_normal_cdf(x);
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("standard normal quantile") {
    CHECK(std_normal_quantile(0.5) == 0.0);
    CHECK(std_normal_quantile(0.2) == doctest::Approx(-0.842).epsilon(1e-3));
    CHECK(std_normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-9));
    CHECK_THROWS_AS(std_normal_quantile(0.0), ConfigError);
    CHECK_THROWS_AS(std_normal_quantile(1.0), ConfigError);
    CHECK_THROWS_AS(std_normal_quantile(-0.2), ConfigError);

    SUBCASE("round trip on a grid") {
        for (double x = -6.0; x <= 6.0; x += 0.05) {
            CHECK(std_normal_quantile(std_normal_cdf(x)) == doctest::Approx(x).epsilon(1e-8));
        }
    }
    SUBCASE("forward accuracy") {
        for (double p : {1e-12, 1e-9, 1e-4, 0.2, 0.5, 0.8, 0.999, 1.0 - 1e-9}) {
            CHECK(std::abs(std_normal_cdf(std_normal_quantile(p)) - p) <= 1e-9);
        }
    }
    SUBCASE("strictly increasing") {
        double prev = std_normal_quantile(1e-6);
        for (double p = 1e-3; p < 1.0; p += 1e-3) {
            const double v = std_normal_quantile(p);
            CHECK(v > prev);
            prev = v;
        }
    }
}

TEST_CASE("cholesky factor") {
    SUBCASE("identity") {
        const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(3, 3);
        CHECK(cholesky_factor(I).mat().isApprox(I, 1e-15));
    }
    SUBCASE("hand-solved 2x2") {
        Eigen::MatrixXd m(2, 2);
        m << 1.0, 0.6, 0.6, 1.0;
        const auto L = cholesky_factor(m);
        CHECK(L.mat()(0, 0) == doctest::Approx(1.0));
        CHECK(L.mat()(1, 0) == doctest::Approx(0.6));
        CHECK(L.mat()(1, 1) == doctest::Approx(0.8));
    }
    SUBCASE("rejects |rho| > 1") {
        Eigen::MatrixXd m(2, 2);
        m << 1.0, 1.2, 1.2, 1.0;
        CHECK_THROWS_AS(cholesky_factor(m), NotPositiveDefinite);
    }
    SUBCASE("rejects asymmetry") {
        Eigen::MatrixXd m(2, 2);
        m << 1.0, 0.5, 0.2, 1.0;
        CHECK_THROWS_AS(cholesky_factor(m), ShapeError);
    }
    SUBCASE("reconstruction and eigenvalue-oracle agreement") {
        Rng rng(RandomStream{2024, 1});
        int pd_seen = 0, npd_seen = 0;
        for (int trial = 0; trial < 200; ++trial) {
            const int n = 2 + static_cast<int>(rng.below(3));
            Eigen::MatrixXd m(n, n);
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j <= i; ++j) {
                    m(i, j) = m(j, i) = 2.0 * rng.uniform() - 1.0;
                }
                m(i, i) += 0.5;
            }
            const double min_eig = oracles::min_eigenvalue(m);
            if (std::abs(min_eig) < 1e-8) continue;  // skip borderline draws
            if (min_eig > 0.0) {
                ++pd_seen;
                const auto L = cholesky_factor(m);
                CHECK((L.mat() * L.mat().transpose() - m).cwiseAbs().maxCoeff() < 1e-10);
                for (int i = 0; i < n; ++i) CHECK(L.mat()(i, i) > 0.0);
            } else {
                ++npd_seen;
                CHECK_THROWS_AS(cholesky_factor(m), NotPositiveDefinite);
            }
        }
        CHECK(pd_seen > 20);
        CHECK(npd_seen > 20);
    }
}

TEST_CASE("pearson correlation") {
    const std::vector<double> x{1.0, 2.0, 3.0};
    SUBCASE("perfect linear relations") {
        CHECK(pearson_corr(x, x) == doctest::Approx(1.0));
        std::vector<double> y;
        for (double v : x) y.push_back(-2.0 * v + 7.0);
        CHECK(pearson_corr(x, y) == doctest::Approx(-1.0));
    }
    SUBCASE("direct evaluation example") {
        const std::vector<double> y{2.0, 2.0, 4.0};
        const double oracle = oracles::pearson_two_pass(x, y);
        CHECK(oracle == doctest::Approx(0.866).epsilon(1e-3));
        CHECK(pearson_corr(x, y) == doctest::Approx(oracle).epsilon(1e-12));
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(pearson_corr(x, std::vector<double>{1.0, 2.0}), ShapeError);
        CHECK_THROWS_AS(pearson_corr(x, std::vector<double>{5.0, 5.0, 5.0}),
                        DegenerateVariance);
    }
    SUBCASE("matches the two-pass oracle on random data") {
        Rng rng(RandomStream{7, 7});
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<double> a(50), b(50);
            for (int i = 0; i < 50; ++i) {
                a[i] = rng.normal();
                b[i] = 0.3 * a[i] + rng.normal();
            }
            CHECK(pearson_corr(a, b) ==
                  doctest::Approx(oracles::pearson_two_pass(a, b)).epsilon(1e-12));
        }
    }
    SUBCASE("symmetry and affine invariance") {
        Rng rng(RandomStream{8, 8});
        std::vector<double> a(40), b(40), c(40);
        for (int i = 0; i < 40; ++i) {
            a[i] = rng.normal();
            b[i] = rng.normal() + 0.5 * a[i];
            c[i] = 3.0 * b[i] + 11.0;
        }
        CHECK(pearson_corr(a, b) == doctest::Approx(pearson_corr(b, a)));
        CHECK(pearson_corr(a, c) == doctest::Approx(pearson_corr(a, b)).epsilon(1e-12));
    }
}

TEST_CASE("random streams") {
    Rng a(RandomStream{42, 3});
    Rng b(RandomStream{42, 3});
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    Rng c(RandomStream{42, 4});
    int equal = 0;
    Rng a2(RandomStream{42, 3});
    for (int i = 0; i < 100; ++i) equal += a2.next_u64() == c.next_u64();
    CHECK(equal == 0);

    SUBCASE("uniforms stay inside the open interval") {
        Rng r(RandomStream{1, 1});
        for (int i = 0; i < 10000; ++i) {
            const double u = r.uniform();
            CHECK(u > 0.0);
            CHECK(u < 1.0);
        }
    }
    SUBCASE("substreams differ from the parent") {
        const RandomStream base{9, 2};
        Rng r0(base);
        Rng r1(base.substream(0));
        Rng r2(base.substream(1));
        CHECK(r0.next_u64() != r1.next_u64());
        CHECK(r1.next_u64() != r2.next_u64());
    }
}

TEST_CASE("multivariate normal sampling") {
    SUBCASE("dim 1 mean obeys the CLT bound") {
        const auto L = cholesky_factor(Eigen::MatrixXd::Identity(1, 1));
        const long n = 100000;
        const Eigen::MatrixXd s = sample_mvn(L, n, RandomStream{11, 0});
        CHECK(std::abs(s.col(0).mean()) < 4.0 / std::sqrt(static_cast<double>(n)));
    }
    SUBCASE("dim 2 with latent 0.6 correlation") {
        Eigen::MatrixXd R(2, 2);
        R << 1.0, 0.6, 0.6, 1.0;
        const auto L = cholesky_factor(R);
        const long n = 100000;
        const Eigen::MatrixXd s = sample_mvn(L, n, RandomStream{12, 0});
        std::vector<double> c0(s.col(0).data(), s.col(0).data() + n);
        std::vector<double> c1(s.col(1).data(), s.col(1).data() + n);
        CHECK(pearson_corr(c0, c1) == doctest::Approx(0.6).epsilon(0.01 / 0.6));
    }
    SUBCASE("same stream twice gives identical matrices") {
        Eigen::MatrixXd R(2, 2);
        R << 1.0, -0.3, -0.3, 1.0;
        const auto L = cholesky_factor(R);
        const Eigen::MatrixXd s1 = sample_mvn(L, 500, RandomStream{13, 5});
        const Eigen::MatrixXd s2 = sample_mvn(L, 500, RandomStream{13, 5});
        CHECK((s1 - s2).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("identity factor gives near-zero cross correlations") {
        const auto L = cholesky_factor(Eigen::MatrixXd::Identity(3, 3));
        const long n = 40000;
        const Eigen::MatrixXd s = sample_mvn(L, n, RandomStream{14, 0});
        const double bound = 4.0 / std::sqrt(static_cast<double>(n));
        for (int i = 0; i < 3; ++i) {
            for (int j = i + 1; j < 3; ++j) {
                std::vector<double> a(s.col(i).data(), s.col(i).data() + n);
                std::vector<double> b(s.col(j).data(), s.col(j).data() + n);
                CHECK(std::abs(pearson_corr(a, b)) < bound);
            }
        }
    }
    SUBCASE("rejects n < 1") {
        const auto L = cholesky_factor(Eigen::MatrixXd::Identity(1, 1));
        CHECK_THROWS_AS(sample_mvn(L, 0, RandomStream{1, 1}), ConfigError);
    }
}
