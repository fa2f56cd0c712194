#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "blockreg/corpus.hpp"

namespace blockreg {

/// Seasonally differenced traffic. Column k holds t(k + m) - t(k) of the
/// origin, i.e. it is aligned with origin hour column k + m.
struct DifferencedMatrix {
    std::size_t seasonality_m = 0;
    RowMatrix values;
    TrafficMatrix origin;
};

struct RowProvenance {
    std::size_t bs_index = 0;
    /// Column of the target hour in the source matrix (absolute hour is
    /// origin.start_hour + target_col).
    std::size_t target_col = 0;

    bool operator==(const RowProvenance&) const = default;
};

/// Windowed design matrix. Row r of x holds the W values immediately before
/// the target hour of provenance[r], oldest first; y[r] is the target value.
struct FeatureSet {
    RowMatrix x;
    Eigen::VectorXd y;
    std::vector<RowProvenance> provenance;
    std::size_t window_w = 0;

    std::size_t n_samples() const noexcept { return static_cast<std::size_t>(y.size()); }
};

struct NormalizationStats {
    Eigen::VectorXd mu_x;
    Eigen::VectorXd sigma_x;
    double mu_y = 0.0;
    double sigma_y = 1.0;

    std::size_t width() const noexcept { return static_cast<std::size_t>(mu_x.size()); }
    /// mu = 0, sigma = 1 for a window of width w.
    static NormalizationStats identity(std::size_t w);
};

/// (1 - D^m) applied row-wise. Requires 1 <= m < L.
DifferencedMatrix seasonal_difference(const TrafficMatrix& t, std::size_t m);

/// Windows of width w over the differenced matrix; targets are hours
/// M + w + 1 .. L (1-based), giving (L - M - w) * N rows ordered by
/// (bs_index, target hour).
FeatureSet slide_windows(const DifferencedMatrix& d, std::size_t w);

/// Window extraction over arbitrary series rows. Column c of `series` maps to
/// source column c + col_offset; targets are series columns w..end.
FeatureSet slide_windows(const RowMatrix& series, std::size_t w, std::size_t col_offset = 0);

/// Column means and sample standard deviations (divisor N_s - 1); a zero
/// standard deviation is stored as 1.
NormalizationStats fit_normalization(const FeatureSet& f);

FeatureSet apply_normalization(const FeatureSet& f, const NormalizationStats& s);
FeatureSet denormalize(const FeatureSet& f, const NormalizationStats& s);

} // namespace blockreg
