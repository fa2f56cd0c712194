#include "blockreg/regressor.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "blockreg/error.hpp"

namespace blockreg {

namespace {

void check_width(const LinearCoefficients& c, const FeatureSet& f) {
    if (static_cast<Eigen::Index>(c.width()) != f.x.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "model has " + std::to_string(c.width()) +
                                                      " weights but features have " +
                                                      std::to_string(f.x.cols()) + " columns");
    }
    if (f.x.rows() != f.y.size()) {
        throw Error(ErrorCode::DimensionMismatch, "feature rows and targets differ in length");
    }
}

// Normal-equation system of the cost over the augmented design [1 | X]:
// H = A^T A / n, b = A^T y / n. Accumulated row by row in a fixed order.
struct NormalSystem {
    Eigen::MatrixXd h;
    Eigen::VectorXd b;
};

NormalSystem build_normal_system(const FeatureSet& f) {
    const auto n = f.x.rows();
    const auto p = f.x.cols() + 1;
    NormalSystem s{Eigen::MatrixXd::Zero(p, p), Eigen::VectorXd::Zero(p)};
    Eigen::VectorXd a(p);
    for (Eigen::Index r = 0; r < n; ++r) {
        a[0] = 1.0;
        a.tail(p - 1) = f.x.row(r).transpose();
        for (Eigen::Index i = 0; i < p; ++i) {
            for (Eigen::Index j = 0; j <= i; ++j) {
                s.h(i, j) += a[i] * a[j];
            }
            s.b[i] += a[i] * f.y[r];
        }
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            s.h(i, j) *= inv_n;
            s.h(j, i) = s.h(i, j);
        }
    }
    s.b *= inv_n;
    return s;
}

LinearCoefficients unpack(const Eigen::VectorXd& v) {
    return {v[0], v.tail(v.size() - 1)};
}

} // namespace

Eigen::VectorXd residuals(const LinearCoefficients& c, const FeatureSet& f) {
    check_width(c, f);
    return (f.y - f.x * c.theta).array() - c.theta0;
}

double cost(const LinearCoefficients& c, const FeatureSet& f) {
    const Eigen::VectorXd r = residuals(c, f);
    return r.squaredNorm() / (2.0 * static_cast<double>(r.size()));
}

double cost(const BlockModel& m, const FeatureSet& f) {
    return cost(m.coefficients(), f);
}

Eigen::VectorXd gradient(const LinearCoefficients& c, const FeatureSet& f) {
    const Eigen::VectorXd r = residuals(c, f);
    const double n = static_cast<double>(r.size());
    Eigen::VectorXd g(c.theta.size() + 1);
    g[0] = -r.sum() / n;
    g.tail(c.theta.size()) = -(f.x.transpose() * r) / n;
    return g;
}

CgFit train_cg(const FeatureSet& f, const CgOptions& opts) {
    const auto w = static_cast<std::size_t>(f.x.cols());
    const std::size_t p = w + 1;
    if (f.n_samples() < p) {
        throw Error(ErrorCode::Underdetermined, std::to_string(f.n_samples()) + " samples cannot determine " +
                                                    std::to_string(p) + " parameters");
    }
    if (static_cast<std::size_t>(f.x.rows()) != f.n_samples()) {
        throw Error(ErrorCode::DimensionMismatch, "feature rows and targets differ in length");
    }
    const std::size_t max_iter = opts.max_iter.value_or(10 * p);

    const NormalSystem sys = build_normal_system(f);
    const auto& h = sys.h;

    Eigen::VectorXd theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
    Eigen::VectorXd r = sys.b; // -gradient at theta = 0
    Eigen::VectorXd d = r;
    double rr = r.squaredNorm();

    Eigen::VectorXd best = theta;
    double best_norm = std::sqrt(rr);
    bool converged = best_norm <= opts.tol;
    std::size_t iter = 0;

    while (!converged && iter < max_iter) {
        const Eigen::VectorXd hd = h * d;
        const double curvature = d.dot(hd);
        if (!(curvature > 0.0)) {
            break;
        }
        const double alpha = rr / curvature;
        theta += alpha * d;
        ++iter;

        // Periodic exact recomputation keeps rounding drift out of r.
        if (iter % p == 0) {
            r = sys.b - h * theta;
        } else {
            r -= alpha * hd;
        }
        double rr_next = r.squaredNorm();

        if (std::sqrt(rr_next) <= opts.tol) {
            r = sys.b - h * theta;
            rr_next = r.squaredNorm();
            if (std::sqrt(rr_next) <= opts.tol) {
                converged = true;
            }
        }
        if (std::sqrt(rr_next) < best_norm || converged) {
            best = theta;
            best_norm = std::sqrt(rr_next);
        }
        if (converged) {
            break;
        }
        d = r + (rr_next / rr) * d;
        rr = rr_next;
    }

    CgFit fit;
    fit.coef = unpack(best);
    fit.diagnostics.iterations = iter;
    fit.diagnostics.converged = converged;
    fit.diagnostics.residuals = residuals(fit.coef, f);
    fit.diagnostics.final_cost =
        fit.diagnostics.residuals.squaredNorm() / (2.0 * static_cast<double>(f.n_samples()));
    fit.diagnostics.gradient_norm = (h * best - sys.b).norm();
    return fit;
}

LinearCoefficients train_normal_equations(const FeatureSet& f) {
    const auto n = f.x.rows();
    const auto p = f.x.cols() + 1;
    if (n < p) {
        throw Error(ErrorCode::SingularSystem, "fewer samples than parameters");
    }
    Eigen::MatrixXd a(n, p);
    a.col(0).setOnes();
    a.rightCols(p - 1) = f.x;

    const Eigen::MatrixXd gram = a.transpose() * a;
    const Eigen::VectorXd rhs = a.transpose() * f.y;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    const double rcond = ldlt.info() == Eigen::Success ? ldlt.rcond() : 0.0;
    constexpr double kMinRcond = 1e-12;
    if (!(rcond >= kMinRcond) || !ldlt.isPositive()) {
        std::ostringstream msg;
        msg << "normal matrix is rank deficient (condition estimate "
            << (rcond > 0.0 ? 1.0 / rcond : INFINITY) << ")";
        throw Error(ErrorCode::SingularSystem, msg.str());
    }
    return unpack(ldlt.solve(rhs));
}

WindowedFit fit_windowed(const RowMatrix& series, std::size_t w, const CgOptions& opts) {
    const FeatureSet raw = slide_windows(series, w);
    WindowedFit out;
    out.stats = fit_normalization(raw);
    auto cg = train_cg(apply_normalization(raw, out.stats), opts);
    out.coef = std::move(cg.coef);
    out.diagnostics = std::move(cg.diagnostics);
    return out;
}

BlockFit fit_block_model(const TrafficMatrix& t, const BrConfig& cfg) {
    if (cfg.train_hours > t.n_hours() || cfg.train_hours == 0) {
        throw Error(ErrorCode::InsufficientHistory, "training range of " + std::to_string(cfg.train_hours) +
                                                        " hours does not fit a corpus of " +
                                                        std::to_string(t.n_hours()) + " hours");
    }
    TrafficMatrix train;
    train.bs_ids = t.bs_ids;
    train.start_hour = t.start_hour;
    train.values = t.values.leftCols(static_cast<Eigen::Index>(cfg.train_hours));

    const DifferencedMatrix diff = seasonal_difference(train, cfg.m);
    if (cfg.w < 1 || cfg.w >= static_cast<std::size_t>(diff.values.cols())) {
        throw Error(ErrorCode::WindowTooLarge, "window " + std::to_string(cfg.w) + " requires 1 <= w < L - M = " +
                                                   std::to_string(diff.values.cols()));
    }
    auto fit = fit_windowed(diff.values, cfg.w, cfg.cg);

    BlockFit out;
    out.model.theta0 = fit.coef.theta0;
    out.model.theta = std::move(fit.coef.theta);
    out.model.stats = std::move(fit.stats);
    out.model.seasonality_m = cfg.m;
    out.model.window_w = cfg.w;
    out.diagnostics = std::move(fit.diagnostics);
    return out;
}

} // namespace blockreg
