#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <vector>

#include "kawahara/banded.hpp"

using namespace kawahara;

namespace {

// Dense Gaussian elimination with partial pivoting; reference oracle.
std::vector<double> dense_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
    const int n = static_cast<int>(b.size());
    for (int k = 0; k < n; ++k) {
        int p = k;
        for (int i = k + 1; i < n; ++i)
            if (std::abs(a[i][k]) > std::abs(a[p][k])) p = i;
        std::swap(a[k], a[p]);
        std::swap(b[k], b[p]);
        for (int i = k + 1; i < n; ++i) {
            const double m = a[i][k] / a[k][k];
            for (int j = k; j < n; ++j) a[i][j] -= m * a[k][j];
            b[i] -= m * b[k];
        }
    }
    std::vector<double> x(n);
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        for (int j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
        x[i] = s / a[i][i];
    }
    return x;
}

} // namespace

TEST_CASE("identity band returns the right-hand side") {
    const int n = 12;
    BandedMatrix a(n, 2, 2);
    for (int i = 0; i < n; ++i) a.set(i, i, 1.0);
    std::vector<double> b(n);
    for (int i = 0; i < n; ++i) b[i] = 0.5 * i - 3.0;
    const auto x = banded_lu_solve(a, b);
    for (int i = 0; i < n; ++i) CHECK(x[i] == Catch::Approx(b[i]).margin(1e-15));
}

TEST_CASE("Laplacian band against a constructed solution") {
    const int n = 40;
    BandedMatrix a(n, 1, 1);
    for (int i = 0; i < n; ++i) {
        a.set(i, i, 2.0);
        if (i > 0) a.set(i, i - 1, -1.0);
        if (i < n - 1) a.set(i, i + 1, -1.0);
    }
    const std::vector<double> ones(n, 1.0);
    const auto b = a.apply(ones);
    const auto x = banded_lu_solve(a, b);
    for (int i = 0; i < n; ++i) CHECK(std::abs(x[i] - 1.0) < 1e-10);
}

TEST_CASE("zero row raises the singular-matrix error") {
    const int n = 8;
    BandedMatrix a(n, 1, 1);
    for (int i = 0; i < n; ++i)
        if (i != 4) a.set(i, i, 1.0);
    std::vector<double> b(n, 1.0);
    CHECK_THROWS_AS(banded_lu_solve(a, b), singular_matrix_error);
}

TEST_CASE("random diagonally dominant bands match the dense reference") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int trial = 0; trial < 25; ++trial) {
        std::uniform_int_distribution<int> ndist(5, 64);
        const int n = ndist(rng);
        std::uniform_int_distribution<int> bdist(1, std::min(4, n - 1));
        const int kl = bdist(rng), ku = bdist(rng);
        BandedMatrix a(n, kl, ku);
        std::vector<std::vector<double>> dense(n, std::vector<double>(n, 0.0));
        for (int i = 0; i < n; ++i) {
            double off = 0.0;
            for (int j = std::max(0, i - kl); j <= std::min(n - 1, i + ku); ++j) {
                if (j == i) continue;
                const double v = unif(rng);
                a.set(i, j, v);
                dense[i][j] = v;
                off += std::abs(v);
            }
            const double d = off + 1.0 + std::abs(unif(rng));
            a.set(i, i, d);
            dense[i][i] = d;
        }
        std::vector<double> b(n);
        for (int i = 0; i < n; ++i) b[i] = unif(rng);
        const auto x = banded_lu_solve(a, b);
        const auto xd = dense_solve(dense, b);
        for (int i = 0; i < n; ++i) CHECK(std::abs(x[i] - xd[i]) < 1e-9);

        // residual postcondition
        const auto r = a.apply(x);
        double resid = 0.0, xmax = 0.0, bmax = 0.0;
        for (int i = 0; i < n; ++i) {
            resid = std::max(resid, std::abs(r[i] - b[i]));
            xmax = std::max(xmax, std::abs(x[i]));
            bmax = std::max(bmax, std::abs(b[i]));
        }
        CHECK(resid <= 1e-10 * (a.inf_norm() * xmax + bmax));
    }
}

TEST_CASE("pivoting handles non-dominant rows") {
    // row order forces interchanges: small diagonal above a large subdiagonal
    const int n = 6;
    BandedMatrix a(n, 1, 1);
    for (int i = 0; i < n; ++i) {
        a.set(i, i, 1e-8);
        if (i > 0) a.set(i, i - 1, 2.0);
        if (i < n - 1) a.set(i, i + 1, 1.0);
    }
    std::vector<double> xtrue(n);
    for (int i = 0; i < n; ++i) xtrue[i] = i - 2.5;
    const auto b = a.apply(xtrue);
    const auto x = banded_lu_solve(a, b);
    for (int i = 0; i < n; ++i) CHECK(std::abs(x[i] - xtrue[i]) < 1e-8);
}

TEST_CASE("band storage accessors") {
    BandedMatrix a(5, 1, 2);
    CHECK(a.data.size() == 5u * 4u);
    a.set(1, 3, 7.0);
    CHECK(a.at(1, 3) == 7.0);
    CHECK(a.at(3, 1) == 0.0);
    CHECK_THROWS_AS(a.set(4, 0, 1.0), argument_error);
    CHECK_THROWS_AS(BandedMatrix(4, 4, 1), config_error);
}
