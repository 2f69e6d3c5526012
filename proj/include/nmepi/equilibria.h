#pragma once

#include "nmepi/distributions.h"
#include "nmepi/grid.h"
#include "nmepi/model.h"

#include <nlohmann/json.hpp>

#include <string>

namespace nmepi {

enum class EquilibriumClass { Trivial, Endemic };

struct EquilibriumPoint {
    ModelKind kind = ModelKind::SIS;
    double S = 1.0, I = 0.0, R = 0.0;
    EquilibriumClass classification = EquilibriumClass::Trivial;
    std::string note;
    /// Rates used to compute the point.
    double lambda = 0.0, gamma = 0.0, mu = 0.0;
};

/// Endemic 1 - mu/lambda when mu < lambda, else trivial.
EquilibriumPoint sis_equilibrium(double lambda, double mu);

/// Endemic point when lambda > gamma, else trivial with a note.
EquilibriumPoint sirs_equilibrium(double lambda, double gamma, double mu);

struct IdentityReport {
    double residual1 = 0.0;
    double residual2 = 0.0;
    /// Max residual of the integral fixed-point equations with constant paths plugged in.
    double fixed_point_residual = 0.0;
    std::size_t probes = 0;
    bool ok = false;
};

/// Checks the algebraic identities and, for SIRS, the fixed-point integral equations at 50 probes.
/// first: infectious period law (SIRS) and second: immune period law; SIS uses only `first`.
IdentityReport verify_equilibrium_identities(const EquilibriumPoint& point, const DurationDist& first,
                                             const DurationDist& second, const TimeGrid& grid,
                                             double tolerance = 1e-6);

nlohmann::json to_json(const EquilibriumPoint& point, const IdentityReport& report);

} // namespace nmepi
