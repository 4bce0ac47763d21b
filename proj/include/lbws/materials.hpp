#pragma once

#include "lbws/common.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lbws {

enum class MaterialParam { youngs_modulus, poisson_ratio, expansion_coeff, conductivity, heat_capacity };

/// Voigt strain ordering used throughout: [11, 22, 33, 13, 12, 23],
/// engineering shear strains on the last three slots.
using Voigt = Eigen::Matrix<double, 6, 1>;
using Tangent = Eigen::Matrix<double, 6, 6>;

/// Voigt image of the identity tensor (trace extractor).
inline Voigt voigt_identity() {
    Voigt one;
    one << 1, 1, 1, 0, 0, 0;
    return one;
}

/// Piecewise-linear temperature curve; clamps outside the tabulated range.
struct ParamCurve {
    std::vector<double> temperatures;  // strictly increasing, deg C
    std::vector<double> values;

    double operator()(double temp) const {
        const auto& t = temperatures;
        if (temp <= t.front()) return values.front();
        if (temp >= t.back()) return values.back();
        const auto it = std::upper_bound(t.begin(), t.end(), temp);
        const std::size_t hi = static_cast<std::size_t>(it - t.begin());
        const std::size_t lo = hi - 1;
        const double s = (temp - t[lo]) / (t[hi] - t[lo]);
        return std::lerp(values[lo], values[hi], s);
    }

    void validate(const char* name) const {
        if (temperatures.empty() || temperatures.size() != values.size())
            throw std::invalid_argument(std::string("material curve ") + name + ": empty or mismatched breakpoints");
        for (std::size_t i = 1; i < temperatures.size(); ++i)
            if (!(temperatures[i] > temperatures[i - 1]))
                throw std::invalid_argument(std::string("material curve ") + name +
                                            ": breakpoint temperatures must be strictly increasing");
    }
};

/// Temperature-dependent parameters of austenitic chrome-nickel steel (1.4301).
///
/// Values are stored exactly as tabulated (printed scale factors applied):
/// E in N/mm^2, nu dimensionless, alpha_T in 1/K, conductivity in W/(m K),
/// heat capacity in J/(kg K) times 1e5, density in kg/m^3. Unit conversion
/// into the mm-N-s-degC working system is isolated in the *_mm accessors.
struct MaterialTable {
    ParamCurve youngs_modulus;
    ParamCurve poisson_ratio;
    ParamCurve expansion_coeff;
    ParamCurve conductivity;
    ParamCurve heat_capacity;
    double density = 7.919;

    double value(MaterialParam p, double temp) const {
        switch (p) {
            case MaterialParam::youngs_modulus: return youngs_modulus(temp);
            case MaterialParam::poisson_ratio: return poisson_ratio(temp);
            case MaterialParam::expansion_coeff: return expansion_coeff(temp);
            case MaterialParam::conductivity: return conductivity(temp);
            case MaterialParam::heat_capacity: return heat_capacity(temp);
        }
        throw std::invalid_argument("MaterialTable::value: unknown parameter id");
    }

    /// Conductivity in mJ/(s mm K); numerically equal to the tabulated W/(m K).
    double conductivity_mm(double temp) const { return conductivity(temp); }

    /// Volumetric heat capacity rho*c_rho in mJ/(mm^3 K). The tabulated
    /// density (kg/m^3) and heat-capacity scale (1e5 J/(kg K)) are each off
    /// by 1e3 from plausible steel values in opposite directions; their
    /// product is a consistent SI volumetric heat capacity and converts to
    /// the mm system by a single factor 1e-6.
    double volumetric_heat_capacity_mm(double temp) const {
        return density * heat_capacity(temp) * 1e-6;
    }

    void validate() const {
        youngs_modulus.validate("E");
        poisson_ratio.validate("nu");
        expansion_coeff.validate("alpha_T");
        conductivity.validate("lambda");
        heat_capacity.validate("c_rho");
    }
};

/// Tabulated 1.4301 steel curves, linear interpolation between breakpoints.
inline MaterialTable steel_1_4301() {
    MaterialTable m;
    m.youngs_modulus = {{20, 170, 400, 800, 1000, 1100, 1500},
                        {20.0e4, 19.1e4, 17.5e4, 12.5e4, 7.2e4, 1.6e4, 0.1e4}};
    m.poisson_ratio = {{20, 183, 484, 799, 994, 1994, 2000},
                       {0.271, 0.284, 0.300, 0.319, 0.329, 0.364, 0.364}};
    m.expansion_coeff = {{20, 200, 580, 1000, 1200, 1500, 2000},
                         {1.6e-5, 1.81e-5, 1.98e-5, 2.13e-5, 2.23e-5, 2.23e-5, 2.33e-5}};
    m.conductivity = {{20, 200, 400, 600, 800, 1350, 1393, 1460},
                      {15.6, 18.1, 21.0, 23.8, 26.6, 34.4, 35.0, 60.0}};
    m.heat_capacity = {{20, 200, 400, 600, 800, 1350, 1427, 1442, 1460},
                       {5.11e5, 5.42e5, 5.75e5, 6.05e5, 6.30e5, 6.85e5, 7.30e5, 20.20e5, 50.00e5}};
    m.density = 7.919;
    return m;
}

inline double interpolate(const MaterialTable& table, MaterialParam param, double temp) {
    return table.value(param, temp);
}

inline double bulk_modulus(double youngs, double poisson) {
    if (!(poisson < 0.5))
        throw std::invalid_argument("bulk_modulus: Poisson ratio must be < 0.5");
    return youngs / (3.0 * (1.0 - 2.0 * poisson));
}

inline double stress_temp_modulus(double expansion, double bulk) { return 3.0 * expansion * bulk; }

/// Isotropic Hooke tensor in the [11,22,33,13,12,23] engineering-shear Voigt ordering.
inline Tangent elastic_tangent(double youngs, double poisson) {
    if (!(poisson < 0.5))
        throw std::invalid_argument("elastic_tangent: Poisson ratio must be < 0.5");
    if (!(youngs > 0.0)) throw std::invalid_argument("elastic_tangent: Young's modulus must be > 0");
    const double lame = youngs * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
    const double shear = youngs / (2.0 * (1.0 + poisson));
    Tangent c = Tangent::Zero();
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) c(a, b) = lame;
        c(a, a) = lame + 2.0 * shear;
        c(a + 3, a + 3) = shear;
    }
    return c;
}

} // namespace lbws
