#pragma once

// Independent reference computations for the test suites. Nothing here calls
// into the code under test except for plain data types.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "blockreg/corpus.hpp"
#include "blockreg/pipeline.hpp"

namespace oracle {

inline blockreg::TrafficMatrix make_matrix(const std::vector<std::vector<double>>& rows, std::int64_t start = 0) {
    blockreg::TrafficMatrix t;
    t.start_hour = start;
    t.values.resize(static_cast<Eigen::Index>(rows.size()),
                    rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        char id[32];
        std::snprintf(id, sizeof id, "bs_%03zu", i);
        t.bs_ids.emplace_back(id);
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            t.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return t;
}

struct Window {
    std::size_t bs = 0;
    std::size_t target_col = 0;
    std::vector<double> x;
    double y = 0.0;
};

// Every target hour l with a full window of W differenced lags before it,
// enumerated straight from the raw traffic.
inline std::vector<Window> brute_windows(const blockreg::TrafficMatrix& t, std::size_t m, std::size_t w) {
    std::vector<Window> out;
    const std::size_t L = t.n_hours();
    auto at = [&](std::size_t i, std::size_t j) {
        return t.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    };
    for (std::size_t i = 0; i < t.n_bs(); ++i) {
        for (std::size_t l = 0; l < L; ++l) {
            // The oldest lag, l - w, must itself have a value m hours earlier.
            if (l < w + m) continue;
            Window win;
            win.bs = i;
            win.target_col = l;
            for (std::size_t h = l - w; h < l; ++h) {
                win.x.push_back(at(i, h) - at(i, h - m));
            }
            win.y = at(i, l) - at(i, l - m);
            out.push_back(std::move(win));
        }
    }
    return out;
}

inline double direct_cost(double theta0, const Eigen::VectorXd& theta, const blockreg::RowMatrix& x,
                          const Eigen::VectorXd& y) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        double r = y[i] - theta0;
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            r -= theta[j] * x(i, j);
        }
        s += r * r;
    }
    return s / (2.0 * static_cast<double>(x.rows()));
}

inline Eigen::VectorXd central_difference(const std::function<double(const Eigen::VectorXd&)>& f,
                                          const Eigen::VectorXd& at, double h) {
    Eigen::VectorXd g(at.size());
    for (Eigen::Index k = 0; k < at.size(); ++k) {
        Eigen::VectorXd plus = at;
        Eigen::VectorXd minus = at;
        plus[k] += h;
        minus[k] -= h;
        g[k] = (f(plus) - f(minus)) / (2.0 * h);
    }
    return g;
}

// Least squares on [1 | X] by Householder QR; (theta0, theta...) stacked.
inline Eigen::VectorXd qr_least_squares(const blockreg::RowMatrix& x, const Eigen::VectorXd& y) {
    Eigen::MatrixXd a(x.rows(), x.cols() + 1);
    a.col(0).setOnes();
    a.rightCols(x.cols()) = x;
    return a.householderQr().solve(y);
}

inline double direct_nrmse(const std::vector<double>& a, const std::vector<double>& f) {
    double se = 0.0;
    double sum = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        se += (a[k] - f[k]) * (a[k] - f[k]);
        sum += a[k];
    }
    const double n = static_cast<double>(a.size());
    return std::sqrt(se / n) / (sum / n);
}

// Normalized random regression instance: n rows, w features, y linear in x
// plus noise of the given scale.
inline blockreg::FeatureSet random_features(std::mt19937_64& rng, std::size_t n, std::size_t w, double noise) {
    std::normal_distribution<double> nd;
    blockreg::FeatureSet f;
    f.window_w = w;
    f.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(w));
    f.y.resize(static_cast<Eigen::Index>(n));
    Eigen::VectorXd beta(static_cast<Eigen::Index>(w));
    for (auto& b : beta) b = nd(rng);
    const double b0 = nd(rng);
    for (std::size_t i = 0; i < n; ++i) {
        double v = b0;
        for (std::size_t j = 0; j < w; ++j) {
            const double xv = nd(rng);
            f.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = xv;
            v += beta[static_cast<Eigen::Index>(j)] * xv;
        }
        f.y[static_cast<Eigen::Index>(i)] = v + noise * nd(rng);
        f.provenance.push_back({0, i});
    }
    return f;
}

// z_t = phi1 z_{t-1} + phi2 z_{t-2} + e_t with N(0, 1) innovations.
inline std::vector<double> simulate_ar2(double phi1, double phi2, std::size_t n, std::uint64_t seed,
                                        std::size_t burn_in = 500) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    std::vector<double> z(n + burn_in, 0.0);
    for (std::size_t t = 2; t < z.size(); ++t) {
        z[t] = phi1 * z[t - 1] + phi2 * z[t - 2] + nd(rng);
    }
    return {z.end() - static_cast<std::ptrdiff_t>(n), z.end()};
}

// Traffic series whose lag-s seasonal difference equals z: the first s hours
// are a fixed positive daily shape.
inline std::vector<double> integrate_seasonal(const std::vector<double>& z, std::size_t s, double level) {
    std::vector<double> t(s + z.size());
    for (std::size_t h = 0; h < s; ++h) {
        t[h] = level + std::sin(static_cast<double>(h));
    }
    for (std::size_t k = 0; k < z.size(); ++k) {
        t[k + s] = t[k] + z[k];
    }
    return t;
}

} // namespace oracle
