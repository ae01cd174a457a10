#include "uwimf/formation.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <string>

namespace uwimf {
namespace {

bool finite(const Rgb& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

Rgb parse_rgb(const nlohmann::json& j, const char* key) {
    if (!j.contains(key)) throw InvalidInput(std::string("missing field '") + key + "'");
    const auto& v = j.at(key);
    if (!v.is_array() || v.size() != 3) {
        throw InvalidInput(std::string("field '") + key + "' must be an array of 3 numbers");
    }
    Rgb out{};
    for (int c = 0; c < 3; ++c) {
        if (!v[c].is_number()) {
            throw InvalidInput(std::string("field '") + key + "' must contain numbers");
        }
        out[c] = v[c].get<double>();
    }
    return out;
}

ExpTerms parse_terms(const nlohmann::json& j, const char* key) {
    if (!j.contains(key)) throw InvalidInput(std::string("missing beta_D channel '") + key + "'");
    const auto& v = j.at(key);
    if (!v.is_array() || v.size() != 4) {
        throw InvalidInput(std::string("beta_D channel '") + key + "' must be [a, b, c, d]");
    }
    for (const auto& x : v) {
        if (!x.is_number()) throw InvalidInput("beta_D coefficients must be numbers");
    }
    return ExpTerms{v[0].get<double>(), v[1].get<double>(), v[2].get<double>(), v[3].get<double>()};
}

// Effective transmission so that T * W >= kDenominatorFloor.
double floored_transmission(double t, double w) {
    return std::max(t, kDenominatorFloor / w);
}

void require_components(const LinearImage& observed, const ComponentMaps& components,
                        const char* context) {
    validate(observed, "observed image");
    require_same_size(observed, components.backscatter, context);
    require_same_size(observed, components.transmission, context);
    for (double w : components.white_point) {
        if (!(w > 0.0) || !std::isfinite(w)) {
            throw InvalidInput(std::string(context) + ": white point must be positive");
        }
    }
}

}  // namespace

AttenuationModel AttenuationModel::constant(const Rgb& beta) {
    AttenuationModel m;
    m.kind_ = AttenuationKind::constant;
    for (int c = 0; c < 3; ++c) m.terms_[c] = ExpTerms{beta[c], 0.0, 0.0, 0.0};
    m.validate();
    return m;
}

AttenuationModel AttenuationModel::two_exp(const std::array<ExpTerms, 3>& terms) {
    AttenuationModel m;
    m.kind_ = AttenuationKind::two_exp;
    m.terms_ = terms;
    m.validate();
    return m;
}

double AttenuationModel::beta(int channel, double z) const noexcept {
    const ExpTerms& t = terms_[channel];
    const double v = t.a * std::exp(t.b * z) + t.c * std::exp(t.d * z);
    return std::max(v, 0.0);
}

void AttenuationModel::validate() const {
    for (const ExpTerms& t : terms_) {
        if (!std::isfinite(t.a) || !std::isfinite(t.b) || !std::isfinite(t.c) ||
            !std::isfinite(t.d)) {
            throw InvalidInput("attenuation coefficients must be finite");
        }
        if (t.a < 0.0 || t.c < 0.0) throw InvalidInput("attenuation amplitudes a, c must be >= 0");
        if (t.b > 0.0 || t.d > 0.0) throw InvalidInput("attenuation rates b, d must be <= 0");
    }
}

void WaterParams::validate() const {
    if (!finite(B_inf) || !finite(beta_B) || !finite(white_point) || !std::isfinite(depth_m)) {
        throw InvalidInput("water parameters must be finite");
    }
    for (int c = 0; c < 3; ++c) {
        if (B_inf[c] < 0.0 || B_inf[c] > 1.0) throw InvalidInput("B_inf must lie in [0, 1]");
        if (beta_B[c] < 0.0) throw InvalidInput("beta_B must be non-negative");
        if (!(white_point[c] > 0.0) || white_point[c] > 1.0) {
            throw InvalidInput("white_point components must lie in (0, 1]");
        }
    }
    if (depth_m < 0.0) throw InvalidInput("depth_m must be non-negative");
    beta_D.validate();
}

void to_json(nlohmann::json& j, const AttenuationModel& m) {
    if (m.kind() == AttenuationKind::constant) {
        j = nlohmann::json{{"kind", "constant"},
                           {"value", {m.terms(0).a, m.terms(1).a, m.terms(2).a}}};
        return;
    }
    j = nlohmann::json{{"kind", "two_exp"}};
    const char* names[3] = {"R", "G", "B"};
    for (int c = 0; c < 3; ++c) {
        const ExpTerms& t = m.terms(c);
        j[names[c]] = {t.a, t.b, t.c, t.d};
    }
}

void from_json(const nlohmann::json& j, AttenuationModel& m) {
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
        throw InvalidInput("beta_D must be an object with a 'kind' string");
    }
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "constant") {
        m = AttenuationModel::constant(parse_rgb(j, "value"));
    } else if (kind == "two_exp") {
        m = AttenuationModel::two_exp(
            {parse_terms(j, "R"), parse_terms(j, "G"), parse_terms(j, "B")});
    } else {
        throw InvalidInput("unknown beta_D kind '" + kind + "'");
    }
}

void to_json(nlohmann::json& j, const WaterParams& p) {
    j = nlohmann::json{{"B_inf", p.B_inf},
                       {"beta_B", p.beta_B},
                       {"beta_D", p.beta_D},
                       {"white_point", p.white_point},
                       {"depth_m", p.depth_m}};
}

void from_json(const nlohmann::json& j, WaterParams& p) {
    if (!j.is_object()) throw InvalidInput("water parameters must be a JSON object");
    WaterParams out;
    out.B_inf = parse_rgb(j, "B_inf");
    out.beta_B = parse_rgb(j, "beta_B");
    if (!j.contains("beta_D")) throw InvalidInput("missing field 'beta_D'");
    from_json(j.at("beta_D"), out.beta_D);
    out.white_point = parse_rgb(j, "white_point");
    if (j.contains("depth_m")) {
        if (!j.at("depth_m").is_number()) throw InvalidInput("depth_m must be a number");
        out.depth_m = j.at("depth_m").get<double>();
    }
    out.validate();
    p = out;
}

LinearImage backscatter_map(const RangeMap& z, const Rgb& B_inf, const Rgb& beta_B) {
    LinearImage out(z.width(), z.height());
    const std::size_t n = z.pixel_count();
    for (std::size_t p = 0; p < n; ++p) {
        const double range = z.at(p);
        for (int c = 0; c < 3; ++c) {
            out.at(p, c) = B_inf[c] * -std::expm1(-beta_B[c] * range);
        }
    }
    return out;
}

LinearImage backscatter_map(const RangeMap& z, const WaterParams& params) {
    return backscatter_map(z, params.B_inf, params.beta_B);
}

LinearImage transmission_map(const RangeMap& z, const AttenuationModel& beta_D) {
    LinearImage out(z.width(), z.height());
    const std::size_t n = z.pixel_count();
    for (std::size_t p = 0; p < n; ++p) {
        const double range = z.at(p);
        for (int c = 0; c < 3; ++c) out.at(p, c) = std::exp(-beta_D.beta(c, range) * range);
    }
    return out;
}

ComponentMaps make_components(const RangeMap& z, const WaterParams& params) {
    validate(z);
    params.validate();
    return ComponentMaps{backscatter_map(z, params), transmission_map(z, params.beta_D),
                         params.white_point};
}

Synthesis synthesize(const LinearImage& clear, const RangeMap& z, const WaterParams& params) {
    validate(clear, "clear image");
    require_same_size(clear, z, "synthesize");
    Synthesis out{LinearImage(clear.width(), clear.height()), make_components(z, params)};
    const ComponentMaps& comp = out.components;
    const std::size_t n = clear.pixel_count();
    for (std::size_t p = 0; p < n; ++p) {
        for (int c = 0; c < 3; ++c) {
            out.image.at(p, c) = clear.at(p, c) * comp.white_point[c] * comp.transmission.at(p, c) +
                                 comp.backscatter.at(p, c);
        }
    }
    return out;
}

LinearImage synthesize_simplified(const LinearImage& clear, const RangeMap& z, const Rgb& beta,
                                  const Rgb& B_inf) {
    validate(clear, "clear image");
    validate(z);
    require_same_size(clear, z, "synthesize_simplified");
    LinearImage out(clear.width(), clear.height());
    const std::size_t n = clear.pixel_count();
    for (std::size_t p = 0; p < n; ++p) {
        for (int c = 0; c < 3; ++c) {
            const double t = std::exp(-beta[c] * z.at(p));
            out.at(p, c) = clear.at(p, c) * t + B_inf[c] * (1.0 - t);
        }
    }
    return out;
}

LinearImage restore_scene_radiance(const LinearImage& observed, const ComponentMaps& components) {
    require_components(observed, components, "restore_scene_radiance");
    LinearImage out(observed.width(), observed.height());
    const std::size_t n = observed.pixel_count();
    for (std::size_t p = 0; p < n; ++p) {
        for (int c = 0; c < 3; ++c) {
            const double t =
                floored_transmission(components.transmission.at(p, c), components.white_point[c]);
            out.at(p, c) = (observed.at(p, c) - components.backscatter.at(p, c)) / t;
        }
    }
    return out;
}

LinearImage restore(const LinearImage& observed, const ComponentMaps& components) {
    LinearImage out = restore_scene_radiance(observed, components);
    const std::size_t n = out.pixel_count();
    for (std::size_t p = 0; p < n; ++p) {
        for (int c = 0; c < 3; ++c) out.at(p, c) /= components.white_point[c];
    }
    return out;
}

}  // namespace uwimf
