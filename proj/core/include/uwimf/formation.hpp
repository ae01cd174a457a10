#pragma once

#include <array>

#include <nlohmann/json_fwd.hpp>

#include "uwimf/image.hpp"

namespace uwimf {

/// Floor applied to T * W before any division during restoration.
inline constexpr double kDenominatorFloor = 1e-3;

/// Coefficients of beta(z) = a * exp(b * z) + c * exp(d * z).
struct ExpTerms {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double d = 0.0;

    friend bool operator==(const ExpTerms&, const ExpTerms&) = default;
};

enum class AttenuationKind { constant, two_exp };

/// Range-dependent wideband attenuation coefficient beta_D(z), per channel.
///
/// A constant model is stored as a two-term model with b = c = d = 0, so
/// evaluation is uniform across kinds; the kind tag only affects serialization.
class AttenuationModel {
public:
    AttenuationModel() = default;

    static AttenuationModel constant(const Rgb& beta);
    static AttenuationModel two_exp(const std::array<ExpTerms, 3>& terms);

    AttenuationKind kind() const noexcept { return kind_; }
    const ExpTerms& terms(int channel) const noexcept { return terms_[channel]; }

    /// beta_D for `channel` at range z (meters). Never negative.
    double beta(int channel, double z) const noexcept;

    /// Throws InvalidInput on non-finite or out-of-family coefficients.
    void validate() const;

    friend bool operator==(const AttenuationModel&, const AttenuationModel&) = default;

private:
    AttenuationKind kind_ = AttenuationKind::constant;
    std::array<ExpTerms, 3> terms_{};
};

/// One water condition.
struct WaterParams {
    Rgb B_inf{0.0, 0.0, 0.0};   ///< veiling light per channel, [0, 1]
    Rgb beta_B{0.0, 0.0, 0.0};  ///< backscatter coefficient per channel, 1/m
    AttenuationModel beta_D;    ///< wideband attenuation
    Rgb white_point{1.0, 1.0, 1.0};
    double depth_m = 0.0;       ///< 0 means unknown

    void validate() const;

    friend bool operator==(const WaterParams&, const WaterParams&) = default;
};

void to_json(nlohmann::json& j, const AttenuationModel& m);
void from_json(const nlohmann::json& j, AttenuationModel& m);
void to_json(nlohmann::json& j, const WaterParams& p);
/// Parses and validates; throws InvalidInput on schema violations.
void from_json(const nlohmann::json& j, WaterParams& p);

/// Disentangled per-pixel components of one underwater image.
struct ComponentMaps {
    LinearImage backscatter;    ///< B-hat, [0, 1)
    LinearImage transmission;   ///< T-hat = exp(-beta_D(z) z), (0, 1]
    Rgb white_point{1.0, 1.0, 1.0};
};

/// B_inf * (1 - exp(-beta_B * z)) per pixel and channel.
LinearImage backscatter_map(const RangeMap& z, const Rgb& B_inf, const Rgb& beta_B);
LinearImage backscatter_map(const RangeMap& z, const WaterParams& params);

/// exp(-beta_D(z) * z) per pixel and channel.
LinearImage transmission_map(const RangeMap& z, const AttenuationModel& beta_D);

/// Components implied by a water condition over a range map.
ComponentMaps make_components(const RangeMap& z, const WaterParams& params);

struct Synthesis {
    LinearImage image;
    ComponentMaps components;
};

/// Renders I = J * W * T + B from an in-air image and its range map.
Synthesis synthesize(const LinearImage& clear, const RangeMap& z, const WaterParams& params);

/// Shared-coefficient model: I = J * exp(-beta z) + B_inf * (1 - exp(-beta z)).
LinearImage synthesize_simplified(const LinearImage& clear, const RangeMap& z, const Rgb& beta,
                                  const Rgb& B_inf);

/// Full restoration (I - B) / (T * W). Unclamped.
///
/// The denominator is floored at kDenominatorFloor by raising T to
/// kDenominatorFloor / W where needed, and the division is carried out as
/// ((I - B) / T) / W so that restore == restore_scene_radiance / W holds bit for bit.
LinearImage restore(const LinearImage& observed, const ComponentMaps& components);

/// Range-only restoration (I - B) / T, i.e. radiance at depth before white-point division.
/// Uses the same floored transmission as restore().
LinearImage restore_scene_radiance(const LinearImage& observed, const ComponentMaps& components);

}  // namespace uwimf
