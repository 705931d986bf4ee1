#ifndef KAWAHARA_BANDED_HPP
#define KAWAHARA_BANDED_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "kawahara/errors.hpp"

namespace kawahara {

// Band matrix, row-major storage: row i holds columns [i-kl, i+ku] at
// offset j-i+kl, so the storage length is n*(kl+ku+1).
struct BandedMatrix {
    int n = 0, kl = 0, ku = 0;
    std::vector<double> data;

    BandedMatrix() = default;
    BandedMatrix(int n_, int kl_, int ku_) : n(n_), kl(kl_), ku(ku_) {
        if (n <= 0) throw config_error("banded matrix: dimension must be positive");
        if (kl < 0 || ku < 0 || kl >= n || ku >= n)
            throw config_error("banded matrix: bandwidths must satisfy 0 <= kl,ku < n");
        data.assign(static_cast<size_t>(n) * (kl + ku + 1), 0.0);
    }

    bool in_band(int i, int j) const { return j >= i - kl && j <= i + ku; }

    double at(int i, int j) const {
        return in_band(i, j) ? data[static_cast<size_t>(i) * (kl + ku + 1) + (j - i + kl)] : 0.0;
    }
    void set(int i, int j, double v) {
        if (!in_band(i, j)) throw argument_error("banded matrix: entry outside band");
        data[static_cast<size_t>(i) * (kl + ku + 1) + (j - i + kl)] = v;
    }
    void add(int i, int j, double v) {
        if (!in_band(i, j)) throw argument_error("banded matrix: entry outside band");
        data[static_cast<size_t>(i) * (kl + ku + 1) + (j - i + kl)] += v;
    }

    double inf_norm() const {
        double m = 0.0;
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = std::max(0, i - kl); j <= std::min(n - 1, i + ku); ++j)
                s += std::abs(at(i, j));
            m = std::max(m, s);
        }
        return m;
    }

    std::vector<double> apply(const std::vector<double>& x) const {
        std::vector<double> y(n, 0.0);
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = std::max(0, i - kl); j <= std::min(n - 1, i + ku); ++j)
                s += at(i, j) * x[j];
            y[i] = s;
        }
        return y;
    }
};

// LU factorization of a band matrix with partial pivoting. Fill-in widens the
// upper band to kl+ku; storage follows the usual column-window layout so row
// swaps stay local.
class BandedLU {
public:
    explicit BandedLU(const BandedMatrix& a, double pivot_rtol = 1e-13)
        : n_(a.n), kl_(a.kl), ku_(a.ku), ldab_(2 * a.kl + a.ku + 1),
          ab_(static_cast<size_t>(ldab_) * a.n, 0.0), pivots_(a.n, 0) {
        const double anorm = a.inf_norm();
        const double tol = pivot_rtol * std::max(anorm, 1e-300);
        for (int j = 0; j < n_; ++j)
            for (int i = std::max(0, j - ku_); i <= std::min(n_ - 1, j + kl_); ++i)
                ab(i, j) = a.at(i, j);
        factor(tol);
    }

    int size() const { return n_; }

    std::vector<double> solve(std::vector<double> b) const {
        // forward elimination with recorded row interchanges
        for (int j = 0; j < n_ - 1; ++j) {
            if (pivots_[j] != j) std::swap(b[j], b[pivots_[j]]);
            const int km = std::min(kl_, n_ - 1 - j);
            for (int i = 1; i <= km; ++i) b[j + i] -= ab_c(j + i, j) * b[j];
        }
        // back substitution against the widened upper band
        for (int j = n_ - 1; j >= 0; --j) {
            double s = b[j];
            const int jmax = std::min(n_ - 1, j + kl_ + ku_);
            for (int c = j + 1; c <= jmax; ++c) s -= ab_c(j, c) * b[c];
            b[j] = s / ab_c(j, j);
        }
        return b;
    }

private:
    double& ab(int i, int j) { return ab_[static_cast<size_t>(j) * ldab_ + (kl_ + ku_ + i - j)]; }
    double ab_c(int i, int j) const {
        return ab_[static_cast<size_t>(j) * ldab_ + (kl_ + ku_ + i - j)];
    }

    void factor(double tol) {
        for (int j = 0; j < n_; ++j) {
            const int km = std::min(kl_, n_ - 1 - j);
            int p = 0;
            double pmax = std::abs(ab(j, j));
            for (int i = 1; i <= km; ++i) {
                const double v = std::abs(ab(j + i, j));
                if (v > pmax) { pmax = v; p = i; }
            }
            if (!(pmax >= tol))
                throw singular_matrix_error("banded LU: pivot " + std::to_string(pmax) +
                                            " below tolerance in column " + std::to_string(j));
            pivots_[j] = j + p;
            const int cmax = std::min(n_ - 1, j + kl_ + ku_);
            if (p != 0)
                for (int c = j; c <= cmax; ++c) std::swap(ab(j, c), ab(j + p, c));
            const double piv = ab(j, j);
            for (int i = 1; i <= km; ++i) ab(j + i, j) /= piv;
            for (int c = j + 1; c <= cmax; ++c) {
                const double ujc = ab(j, c);
                if (ujc != 0.0)
                    for (int i = 1; i <= km; ++i) ab(j + i, c) -= ab(j + i, j) * ujc;
            }
        }
    }

    int n_, kl_, ku_, ldab_;
    std::vector<double> ab_;
    std::vector<int> pivots_;
};

inline std::vector<double> banded_lu_solve(const BandedMatrix& a, const std::vector<double>& b) {
    if (static_cast<int>(b.size()) != a.n)
        throw argument_error("banded solve: right-hand side length mismatch");
    return BandedLU(a).solve(b);
}

} // namespace kawahara

#endif
