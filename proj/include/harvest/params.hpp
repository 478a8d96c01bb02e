#pragma once

#include <stdexcept>
#include <string>

namespace harvest {

enum class Regime { sublinear, critical, superlinear };  // sign of p*q - 1

/// Problem coefficients for the logistic bulk term beta*u - |u|^{p-1}u and
/// the boundary absorption lambda*(u+alpha)^{q-1}u.
struct Params {
    double p;
    double q;
    double lambda = 0.0;
    double alpha = 0.0;
    double beta = 1.0;

    // structural constraints; lambda may be transiently negative inside the
    // arclength corrector, so its sign is checked at solver entry points only
    void validate_shape() const {
        if (!(q > 0.0 && q < 1.0 && p > 1.0))
            throw std::invalid_argument("params: need 0 < q < 1 < p");
        if (!(alpha >= 0.0)) throw std::invalid_argument("params: alpha must be >= 0");
        if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("params: need 0 < beta <= 1");
    }

    void validate() const {
        validate_shape();
        if (!(lambda >= 0.0)) throw std::invalid_argument("params: lambda must be >= 0");
    }

    // recomputed from p and q, never stored
    Regime regime() const {
        const double s = p * q - 1.0;
        if (s > 1e-12) return Regime::superlinear;
        if (s < -1e-12) return Regime::sublinear;
        return Regime::critical;
    }

    std::string regime_tag() const {
        switch (regime()) {
            case Regime::superlinear: return "pq>1";
            case Regime::sublinear: return "pq<1";
            default: return "pq=1";
        }
    }
};

}  // namespace harvest
