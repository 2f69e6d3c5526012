#pragma once

#include "nmepi/distributions.h"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nmepi {

enum class ModelKind { SIS, SIR, SIRS, SEIR };

std::string to_string(ModelKind kind);
/// Case-insensitive; throws ValidationError for unknown names.
ModelKind parse_model_kind(const std::string& name);

/// Contact rate, constant or piecewise constant and right-continuous in time.
class ContactRate {
public:
    ContactRate(double value = 0.0);
    /// values[0] applies on [0, breaks[0]), values[i] on [breaks[i-1], breaks[i]).
    ContactRate(std::vector<double> breaks, std::vector<double> values);

    double value(double t) const;
    double value_left(double t) const;
    /// Supremum over [a, b].
    double max_on(double a, double b) const;
    double max() const;
    bool is_constant() const { return breaks_.empty(); }
    const std::vector<double>& breaks() const { return breaks_; }
    const std::vector<double>& values() const { return values_; }

private:
    std::vector<double> breaks_;
    std::vector<double> values_;
};

/// Initial population fractions.
struct InitialFractions {
    double exposed = 0.0;
    double infectious = 0.0;
    double recovered = 0.0;
};

/// Full model description.
///
/// Every infected individual passes through a first phase of length xi and a second phase of
/// length eta, drawn from `life`:
///   SIR, SIS: xi = 0, second phase infectious;
///   SEIR: first phase exposed, second infectious, then recovered;
///   SIRS: first phase infectious, second immune, then susceptible again.
/// Individuals in the first phase at time 0 draw (xi, eta) from `initial_first`; individuals in
/// the second phase at time 0 draw their residual from `initial_second`.
struct ModelSpec {
    ModelKind kind = ModelKind::SIR;
    ContactRate lambda;
    JointDurationDist life = JointDurationDist::independent(DurationDist::deterministic(0.0),
                                                            DurationDist::exponential(1.0));
    JointDurationDist initial_first = JointDurationDist::independent(DurationDist::deterministic(0.0),
                                                                     DurationDist::exponential(1.0));
    DurationDist initial_second = DurationDist::exponential(1.0);
    InitialFractions init;

    /// F0 defaults to the stationary-excess law of the infectious period.
    static ModelSpec sir(ContactRate lambda, DurationDist infectious, double i0,
                         std::optional<DurationDist> initial_residual = std::nullopt);
    static ModelSpec sis(ContactRate lambda, DurationDist infectious, double i0,
                         std::optional<DurationDist> initial_residual = std::nullopt);
    /// H0 defaults to (exposed residual ~ G_e, infectious ~ F) when the life law is independent.
    static ModelSpec seir(ContactRate lambda, JointDurationDist life, double e0, double i0,
                          std::optional<JointDurationDist> initial_exposed = std::nullopt,
                          std::optional<DurationDist> initial_infectious = std::nullopt);
    static ModelSpec sirs(ContactRate lambda, JointDurationDist life, double i0, double r0,
                          std::optional<JointDurationDist> initial_infectious = std::nullopt,
                          std::optional<DurationDist> initial_immune = std::nullopt);

    /// Throws ValidationError on negative rates, fractions outside [0, 1] or summing above 1.
    void validate() const;

    bool has_first_phase() const { return kind == ModelKind::SEIR || kind == ModelKind::SIRS; }
    /// Mass initially in the first phase (E for SEIR, I for SIRS, 0 otherwise).
    double first_phase_fraction() const;
    /// Mass initially in the second phase (I for SIR/SIS/SEIR, R for SIRS).
    double second_phase_fraction() const;
    double susceptible_fraction() const { return 1.0 - first_phase_fraction() - second_phase_fraction(); }
    /// Law of the second phase for new infections (marginal when independent).
    const DurationDist& second_law() const { return life.second_given(0.0); }

    nlohmann::json to_json() const;
    /// FNV-1a hash of the canonical JSON echo.
    std::uint64_t fingerprint() const;
};

nlohmann::json to_json(const DurationDist& d);
nlohmann::json to_json(const JointDurationDist& h);

/// Compartments of the model outputs.
enum class Compartment { S, E, I, R, A, L };
std::string to_string(Compartment c);
Compartment parse_compartment(const std::string& name);

} // namespace nmepi
