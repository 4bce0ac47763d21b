#pragma once

#include "lbws/common.hpp"

#include <cmath>

namespace lbws {

/// Quadrature rule on the reference hex [-1,1]^3. Weights sum to 8.
struct QuadratureRule {
    std::vector<Vec3> points;
    std::vector<double> weights;
    std::size_t size() const { return points.size(); }
};

/// Full 2x2x2 Gauss integration for trilinear hexes.
inline QuadratureRule gauss_2x2x2() {
    QuadratureRule rule;
    const double g = 1.0 / std::sqrt(3.0);
    for (int k = 0; k < 2; ++k)
        for (int j = 0; j < 2; ++j)
            for (int i = 0; i < 2; ++i) {
                rule.points.push_back({(2 * i - 1) * g, (2 * j - 1) * g, (2 * k - 1) * g});
                rule.weights.push_back(1.0);
            }
    return rule;
}

/// Trilinear shape values and reference gradients at a point of [-1,1]^3,
/// local node ordering l = di + 2*dj + 4*dk.
inline void trilinear_basis(const Vec3& xi, Eigen::Matrix<double, 8, 1>& values,
                            Eigen::Matrix<double, 8, 3>& gradients) {
    for (int l = 0; l < 8; ++l) {
        const double sx = (l & 1) ? 1.0 : -1.0;
        const double sy = (l & 2) ? 1.0 : -1.0;
        const double sz = (l & 4) ? 1.0 : -1.0;
        const double fx = 1.0 + sx * xi[0];
        const double fy = 1.0 + sy * xi[1];
        const double fz = 1.0 + sz * xi[2];
        values(l) = fx * fy * fz / 8.0;
        gradients(l, 0) = sx * fy * fz / 8.0;
        gradients(l, 1) = fx * sy * fz / 8.0;
        gradients(l, 2) = fx * fy * sz / 8.0;
    }
}

/// Per-quadrature-point shape data of one element: values, physical-space
/// gradients, and the Jacobian determinant.
struct ShapeEval {
    struct Point {
        Eigen::Matrix<double, 8, 1> values;
        Eigen::Matrix<double, 8, 3> gradients;  // physical space
        double det_jacobian = 0.0;
        double weight = 0.0;  // quadrature weight (reference measure)
    };
    std::vector<Point> points;
    double volume = 0.0;  // sum of weight * detJ
};

inline ShapeEval shape_eval(const QuadratureRule& rule, const std::array<Vec3, 8>& corners) {
    ShapeEval eval;
    eval.points.resize(rule.size());
    for (std::size_t q = 0; q < rule.size(); ++q) {
        auto& pt = eval.points[q];
        Eigen::Matrix<double, 8, 3> ref_grad;
        trilinear_basis(rule.points[q], pt.values, ref_grad);
        Eigen::Matrix3d jac = Eigen::Matrix3d::Zero();  // J_ab = d x_a / d xi_b
        for (int l = 0; l < 8; ++l) jac += corners[static_cast<std::size_t>(l)] * ref_grad.row(l);
        pt.det_jacobian = jac.determinant();
        if (!(pt.det_jacobian > 0.0))
            throw degenerate_element_error("shape_eval: non-positive Jacobian determinant");
        pt.gradients = ref_grad * jac.inverse();  // grad_x N = J^{-T} grad_xi N
        pt.weight = rule.weights[q];
        eval.volume += pt.weight * pt.det_jacobian;
    }
    return eval;
}

} // namespace lbws
