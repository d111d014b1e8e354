#include "pixcal/curve_space.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace pixcal {

std::vector<double> uniform_grid(int m) {
    if (m < 2) throw ValidationError("uniform_grid: m must be >= 2");
    std::vector<double> g(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i)
        g[static_cast<size_t>(i)] = static_cast<double>(i) / static_cast<double>(m - 1);
    return g;
}

CalibrationCurve discretize_map(const IsotonicMap& map, int m) {
    CalibrationCurve curve;
    curve.values.reserve(static_cast<size_t>(m));
    for (double p : uniform_grid(m)) curve.values.push_back(map(p));
    return curve;
}

CalibrationCurve discretize_curve(const std::vector<ConfidencePair>& pairs, int m) {
    return discretize_map(fit_isotonic(pairs), m);
}

PcaCurveBasis fit_pca_basis(const std::vector<CalibrationCurve>& curves, int n) {
    const int k = static_cast<int>(curves.size());
    if (k < 2) throw ValidationError("fit_pca_basis: need at least 2 curves");
    const int m = curves[0].grid_size();
    for (const auto& c : curves)
        if (c.grid_size() != m) throw ValidationError("fit_pca_basis: curve lengths differ");
    if (n < 1 || n > std::min(k - 1, m))
        throw ValidationError("fit_pca_basis: component count out of range");

    Eigen::MatrixXd v(k, m);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < m; ++j) v(i, j) = curves[static_cast<size_t>(i)].values[static_cast<size_t>(j)];

    Eigen::RowVectorXd mean = v.colwise().mean();
    Eigen::MatrixXd centered = v.rowwise() - mean;

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const Eigen::MatrixXd& right = svd.matrixV(); // m x min(k,m)

    double total = 0.0;
    for (int i = 0; i < sv.size(); ++i) total += sv(i) * sv(i);

    PcaCurveBasis basis;
    basis.mean.assign(mean.data(), mean.data() + m);
    basis.components.resize(static_cast<size_t>(n));
    basis.explained_variance_ratio.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd comp = right.col(i);
        // sign convention: largest-magnitude entry positive
        int arg = 0;
        for (int j = 1; j < m; ++j)
            if (std::fabs(comp(j)) > std::fabs(comp(arg))) arg = j;
        if (comp(arg) < 0.0) comp = -comp;
        basis.components[static_cast<size_t>(i)].assign(comp.data(), comp.data() + m);
        basis.explained_variance_ratio[static_cast<size_t>(i)] =
            total > 0.0 ? sv(i) * sv(i) / total : 0.0;
    }
    return basis;
}

CurveCoefficients project_curve(const PcaCurveBasis& basis, const CalibrationCurve& curve) {
    if (curve.grid_size() != basis.grid_size())
        throw ValidationError("project_curve: grid size mismatch");
    CurveCoefficients coeff;
    coeff.theta.resize(basis.components.size(), 0.0);
    for (size_t i = 0; i < basis.components.size(); ++i) {
        double acc = 0.0;
        for (size_t j = 0; j < basis.mean.size(); ++j)
            acc += basis.components[i][j] * (curve.values[j] - basis.mean[j]);
        coeff.theta[i] = acc;
    }
    return coeff;
}

std::vector<double> reconstruct_curve(const PcaCurveBasis& basis, const CurveCoefficients& theta) {
    if (theta.theta.size() != basis.components.size())
        throw ValidationError("reconstruct_curve: coefficient count mismatch");
    std::vector<double> out(basis.mean);
    for (size_t i = 0; i < basis.components.size(); ++i)
        for (size_t j = 0; j < out.size(); ++j)
            out[j] += theta.theta[i] * basis.components[i][j];
    return out;
}

IsotonicMap monotonize_curve(const std::vector<double>& raw) {
    if (raw.size() < 2) throw ValidationError("monotonize_curve: need at least 2 values");
    std::vector<double> clamped(raw);
    for (double& v : clamped) v = std::clamp(v, 0.0, 1.0);
    std::vector<double> fitted =
        pool_adjacent_violators(clamped, std::vector<double>(clamped.size(), 1.0));
    fitted.front() = 0.0;
    fitted.back() = 1.0;
    return IsotonicMap::from_knots(uniform_grid(static_cast<int>(raw.size())), fitted);
}

} // namespace pixcal
