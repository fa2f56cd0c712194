#include "blockreg/baselines.hpp"

#include <cmath>
#include <complex>
#include <optional>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>

#include "blockreg/error.hpp"
#include "blockreg/parallel.hpp"

namespace blockreg {

namespace {

struct LeastSquares {
    Eigen::VectorXd beta;
    Eigen::VectorXd residuals;
};

LeastSquares solve_least_squares(const Eigen::MatrixXd& a, const Eigen::VectorXd& y) {
    if (a.rows() < a.cols()) {
        throw Error(ErrorCode::InsufficientHistory, "regression has fewer rows than unknowns");
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    if (qr.rank() < a.cols()) {
        const auto r = qr.matrixR().diagonal().cwiseAbs();
        std::ostringstream msg;
        msg << "design matrix has rank " << qr.rank() << " < " << a.cols() << " (condition estimate "
            << r.maxCoeff() / std::max(r.minCoeff(), 1e-300) << ")";
        throw Error(ErrorCode::SingularSystem, msg.str());
    }
    LeastSquares out;
    out.beta = qr.solve(y);
    out.residuals = y - a * out.beta;
    return out;
}

} // namespace

// ---------------------------------------------------------------------------

LrFit train_lr(const TrafficMatrix& t, std::size_t w, std::size_t train_hours, const CgOptions& opts) {
    if (train_hours == 0 || train_hours > t.n_hours()) {
        throw Error(ErrorCode::InsufficientHistory, "training range of " + std::to_string(train_hours) +
                                                        " hours does not fit a corpus of " +
                                                        std::to_string(t.n_hours()) + " hours");
    }
    const RowMatrix train = t.values.leftCols(static_cast<Eigen::Index>(train_hours));
    auto fit = fit_windowed(train, w, opts);

    LrFit out;
    out.model.theta0 = fit.coef.theta0;
    out.model.theta = std::move(fit.coef.theta);
    out.model.stats = std::move(fit.stats);
    out.model.window_w = w;
    out.diagnostics = std::move(fit.diagnostics);
    return out;
}

double forecast_lr_one(const LrModel& model, std::span<const double> history) {
    const std::size_t w = model.window_w;
    const std::size_t n = history.size();
    if (n < w) {
        throw Error(ErrorCode::InsufficientHistory, "need " + std::to_string(w) + " hours of history, got " +
                                                        std::to_string(n));
    }
    double linear = model.theta0;
    for (std::size_t p = 0; p < w; ++p) {
        const auto pi = static_cast<Eigen::Index>(p);
        linear += model.theta[pi] * ((history[n - w + p] - model.stats.mu_x[pi]) / model.stats.sigma_x[pi]);
    }
    return model.stats.mu_y + linear * model.stats.sigma_y;
}

ForecastSeries forecast_lr(const LrModel& model, const TrafficMatrix& t, std::string_view bs, std::int64_t start,
                           std::size_t k, ForecastMode mode) {
    return run_horizon(t, bs, start, k, mode, model.window_w,
                       [&model](std::span<const double> history) { return forecast_lr_one(model, history); });
}

// ---------------------------------------------------------------------------

Eigen::VectorXd make_invertible(const Eigen::VectorXd& psi) {
    Eigen::Index q = psi.size();
    while (q > 0 && psi[q - 1] == 0.0) {
        --q;
    }
    if (q == 0) {
        return psi;
    }

    // Roots of 1 + psi_1 x + ... + psi_q x^q via the companion matrix of the
    // monic polynomial x^q + (psi_{q-1}/psi_q) x^{q-1} + ... + 1/psi_q.
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(q, q);
    for (Eigen::Index j = 0; j < q; ++j) {
        const double coeff = j == 0 ? 1.0 : psi[j - 1];
        companion(j, q - 1) = -coeff / psi[q - 1];
        if (j > 0) {
            companion(j, j - 1) = 1.0;
        }
    }
    const Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    Eigen::VectorXcd roots = solver.eigenvalues();

    bool reflected = false;
    for (auto& r : roots) {
        if (std::abs(r) < 1.0) {
            r = 1.0 / std::conj(r);
            reflected = true;
        }
    }
    if (!reflected) {
        return psi;
    }

    // Rebuild prod_k (1 - x / r_k), which has constant term 1.
    Eigen::VectorXcd poly = Eigen::VectorXcd::Zero(q + 1);
    poly[0] = 1.0;
    for (Eigen::Index k = 0; k < q; ++k) {
        for (Eigen::Index j = k + 1; j > 0; --j) {
            poly[j] -= poly[j - 1] / roots[k];
        }
    }
    Eigen::VectorXd out = Eigen::VectorXd::Zero(psi.size());
    for (Eigen::Index j = 0; j < q; ++j) {
        out[j] = poly[j + 1].real();
    }
    return out;
}

SaCoefficients hannan_rissanen(std::span<const double> z, std::size_t ar, std::size_t ma) {
    const std::size_t n = z.size();
    if (n < ar + ma + 20) {
        throw Error(ErrorCode::InsufficientHistory, "ARMA estimation needs at least " +
                                                        std::to_string(ar + ma + 20) + " observations, got " +
                                                        std::to_string(n));
    }

    std::vector<double> proxy(n, 0.0);
    std::size_t first = ar;
    if (ma > 0) {
        const auto long_order = std::max<std::size_t>(
            1, std::min<std::size_t>(static_cast<std::size_t>(std::ceil(1.5 * std::sqrt(static_cast<double>(n)))),
                                     n / 4));
        const auto rows = static_cast<Eigen::Index>(n - long_order);
        Eigen::MatrixXd a(rows, static_cast<Eigen::Index>(long_order + 1));
        Eigen::VectorXd y(rows);
        for (Eigen::Index r = 0; r < rows; ++r) {
            const std::size_t h = long_order + static_cast<std::size_t>(r);
            a(r, 0) = 1.0;
            for (std::size_t j = 1; j <= long_order; ++j) {
                a(r, static_cast<Eigen::Index>(j)) = z[h - j];
            }
            y[r] = z[h];
        }
        const auto stage1 = solve_least_squares(a, y);
        for (Eigen::Index r = 0; r < rows; ++r) {
            proxy[long_order + static_cast<std::size_t>(r)] = stage1.residuals[r];
        }
        first = std::max(ar, long_order + ma);
    }

    const auto rows = static_cast<Eigen::Index>(n - first);
    const auto cols = static_cast<Eigen::Index>(1 + ar + ma);
    Eigen::MatrixXd a(rows, cols);
    Eigen::VectorXd y(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const std::size_t h = first + static_cast<std::size_t>(r);
        a(r, 0) = 1.0;
        for (std::size_t j = 1; j <= ar; ++j) {
            a(r, static_cast<Eigen::Index>(j)) = z[h - j];
        }
        for (std::size_t j = 1; j <= ma; ++j) {
            a(r, static_cast<Eigen::Index>(ar + j)) = proxy[h - j];
        }
        y[r] = z[h];
    }
    const auto stage2 = solve_least_squares(a, y);

    SaCoefficients c;
    c.intercept = stage2.beta[0];
    c.phi = stage2.beta.segment(1, static_cast<Eigen::Index>(ar));
    c.psi = make_invertible(stage2.beta.tail(static_cast<Eigen::Index>(ma)));
    const double dof = static_cast<double>(std::max<Eigen::Index>(rows - cols, 1));
    c.noise_variance = stage2.residuals.squaredNorm() / dof;
    return c;
}

SaModel train_sa(const TrafficMatrix& t, const SaConfig& cfg, std::size_t threads) {
    const std::size_t s = cfg.seasonality;
    if (s < 1) {
        throw Error(ErrorCode::InvalidConfig, "seasonality must be positive");
    }
    if (cfg.train_hours > t.n_hours() || cfg.train_hours < s + cfg.ar + cfg.ma + 20) {
        throw Error(ErrorCode::InsufficientHistory,
                    "seasonal ARIMA training needs " + std::to_string(s + cfg.ar + cfg.ma + 20) +
                        " hours within a corpus of " + std::to_string(t.n_hours()) + " hours, got a range of " +
                        std::to_string(cfg.train_hours));
    }

    const std::size_t n = cfg.train_hours - s;
    std::vector<std::optional<SaCoefficients>> fits(t.n_bs());
    parallel_for(t.n_bs(), threads, [&](std::size_t i) {
        const auto row = t.row(i);
        std::vector<double> z(n);
        for (std::size_t h = 0; h < n; ++h) {
            z[h] = row[h + s] - row[h];
        }
        try {
            fits[i] = hannan_rissanen(z, cfg.ar, cfg.ma);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::SingularSystem) {
                throw;
            }
        }
    });

    SaModel model;
    model.seasonality = s;
    model.ar_order = cfg.ar;
    model.ma_order = cfg.ma;
    for (std::size_t i = 0; i < t.n_bs(); ++i) {
        if (fits[i]) {
            model.per_bs.emplace(t.bs_ids[i], std::move(*fits[i]));
        } else {
            model.failed.push_back(t.bs_ids[i]);
        }
    }
    return model;
}

double forecast_sa_one(const SaCoefficients& c, std::size_t seasonality, std::span<const double> history) {
    const auto ar = static_cast<std::size_t>(c.phi.size());
    const auto ma = static_cast<std::size_t>(c.psi.size());
    const std::size_t n = history.size();
    if (n < seasonality + ar || n < seasonality) {
        throw Error(ErrorCode::InsufficientHistory, "need " + std::to_string(seasonality + ar) +
                                                        " hours of history, got " + std::to_string(n));
    }

    const std::size_t nz = n - seasonality;
    std::vector<double> z(nz);
    for (std::size_t h = 0; h < nz; ++h) {
        z[h] = history[h + seasonality] - history[h];
    }

    // Conditional residuals: zero before the first index with a full AR lag set.
    auto predict = [&](std::size_t h, const std::vector<double>& e) {
        double v = c.intercept;
        for (std::size_t j = 1; j <= ar; ++j) {
            v += c.phi[static_cast<Eigen::Index>(j - 1)] * z[h - j];
        }
        for (std::size_t j = 1; j <= ma && j <= h; ++j) {
            v += c.psi[static_cast<Eigen::Index>(j - 1)] * e[h - j];
        }
        return v;
    };
    std::vector<double> e(nz + 1, 0.0);
    if (ma > 0) {
        for (std::size_t h = ar; h < nz; ++h) {
            e[h] = z[h] - predict(h, e);
        }
    }
    return history[n - seasonality] + predict(nz, e);
}

ForecastSeries forecast_sa(const SaModel& model, const TrafficMatrix& t, std::string_view bs, std::int64_t start,
                           std::size_t k, ForecastMode mode) {
    const auto it = model.per_bs.find(std::string(bs));
    if (it == model.per_bs.end()) {
        throw Error(ErrorCode::UnknownBs, "no seasonal ARIMA fit for base station '" + std::string(bs) + "'");
    }
    const SaCoefficients& c = it->second;
    return run_horizon(t, bs, start, k, mode, model.seasonality + model.ar_order,
                       [&c, s = model.seasonality](std::span<const double> history) {
                           return forecast_sa_one(c, s, history);
                       });
}

} // namespace blockreg
