#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "lyap/error.hpp"

namespace lyap {

struct LeastSquares {
    std::vector<double> coefficients;
    double rms_residual = 0.0;
};

/// Least squares y ~ sum_k coefficients[k] * columns[k] via modified
/// Gram-Schmidt on the columns. Throws DomainError on rank deficiency.
inline LeastSquares least_squares(const std::vector<std::vector<double>>& columns,
                                  std::span<const double> y) {
    const std::size_t m = y.size();
    const std::size_t k = columns.size();
    if (k == 0 || m < k) throw DomainError("least squares needs at least as many rows as columns");
    std::vector<std::vector<double>> q = columns;
    std::vector<std::vector<double>> r(k, std::vector<double>(k, 0.0));
    for (std::size_t c = 0; c < k; ++c) {
        if (q[c].size() != m) throw DomainError("least squares column length mismatch");
        double scale = 0.0;
        for (double v : columns[c]) scale += v * v;
        for (int pass = 0; pass < 2; ++pass)
            for (std::size_t i = 0; i < c; ++i) {
                double dot = 0.0;
                for (std::size_t t = 0; t < m; ++t) dot += q[i][t] * q[c][t];
                r[i][c] += dot;
                for (std::size_t t = 0; t < m; ++t) q[c][t] -= dot * q[i][t];
            }
        double nrm = 0.0;
        for (double v : q[c]) nrm += v * v;
        nrm = std::sqrt(nrm);
        if (!(nrm > 1e-12 * std::sqrt(scale))) throw DomainError("least squares columns are dependent");
        r[c][c] = nrm;
        for (double& v : q[c]) v /= nrm;
    }
    std::vector<double> qty(k, 0.0);
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t t = 0; t < m; ++t) qty[c] += q[c][t] * y[t];
    LeastSquares out;
    out.coefficients.assign(k, 0.0);
    for (std::size_t c = k; c-- > 0;) {
        double s = qty[c];
        for (std::size_t i = c + 1; i < k; ++i) s -= r[c][i] * out.coefficients[i];
        out.coefficients[c] = s / r[c][c];
    }
    double ss = 0.0;
    for (std::size_t t = 0; t < m; ++t) {
        double pred = 0.0;
        for (std::size_t c = 0; c < k; ++c) pred += out.coefficients[c] * columns[c][t];
        ss += (y[t] - pred) * (y[t] - pred);
    }
    out.rms_residual = std::sqrt(ss / static_cast<double>(m));
    return out;
}

struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
    double rms_residual = 0.0;
};

inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DomainError("fit_line: length mismatch");
    const auto ls =
        least_squares({std::vector<double>(x.size(), 1.0), std::vector<double>(x.begin(), x.end())}, y);
    return {ls.coefficients[0], ls.coefficients[1], ls.rms_residual};
}

}  // namespace lyap
