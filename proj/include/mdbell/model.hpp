#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

#include "mdbell/geometry.hpp"
#include "mdbell/sampling.hpp"

namespace mdbell {

/// A +-1 measurement outcome.
struct Outcome {
    int value = +1;

    Outcome() = default;
    explicit Outcome(int v) : value(v) {
        if (v != +1 && v != -1) {
            throw std::invalid_argument("Outcome: value must be +1 or -1");
        }
    }
};

/// Abstract setting labels for models whose contexts carry no geometry.
enum class SettingLabel { X, Xprime, Y, Yprime };

inline std::string to_string(SettingLabel l) {
    switch (l) {
        case SettingLabel::X: return "X";
        case SettingLabel::Xprime: return "X'";
        case SettingLabel::Y: return "Y";
        case SettingLabel::Yprime: return "Y'";
    }
    return "?";
}

/// A measurement setting: a sphere direction for continuous models, a context
/// label for discrete ones.
using Setting = std::variant<UnitVec3, SettingLabel>;

/// A hidden variable: a sphere direction (continuous models) or a 1-based label
/// (discrete models).
class HiddenVar {
  public:
    static HiddenVar from_direction(const UnitVec3& v) { return HiddenVar(v); }
    static HiddenVar from_label(std::size_t label) {
        if (label == 0) {
            throw std::invalid_argument("HiddenVar: labels are 1-based");
        }
        return HiddenVar(label);
    }

    bool is_direction() const { return std::holds_alternative<UnitVec3>(value_); }
    bool is_label() const { return std::holds_alternative<std::size_t>(value_); }

    const UnitVec3& direction() const {
        if (!is_direction()) {
            throw std::invalid_argument("HiddenVar: not a direction");
        }
        return std::get<UnitVec3>(value_);
    }
    std::size_t label() const {
        if (!is_label()) {
            throw std::invalid_argument("HiddenVar: not a label");
        }
        return std::get<std::size_t>(value_);
    }

  private:
    explicit HiddenVar(const UnitVec3& v) : value_(v) {}
    explicit HiddenVar(std::size_t label) : value_(label) {}
    std::variant<UnitVec3, std::size_t> value_;
};

/// Parameters of the two-lambda table model: lambda_1 carries weight p under the
/// X' context and zero under X; outcomes are fixed by the signs a and b.
struct ToyModelParams {
    double p = 0.0;
    Outcome a = Outcome(+1);
    Outcome b = Outcome(+1);
};

enum class ModelKind { SingletOnesided, ToyTable, UniformBaseline };
enum class LambdaDependence { AliceOnly, None };

inline std::string to_string(ModelKind k) {
    switch (k) {
        case ModelKind::SingletOnesided: return "singlet-onesided";
        case ModelKind::ToyTable: return "toy-table";
        case ModelKind::UniformBaseline: return "uniform-baseline";
    }
    return "?";
}

/// Immutable description of a hidden-variable model.
///
/// Three kinds are provided:
///   singlet-onesided : lambda is a sphere direction with density |X.lambda|/2pi
///                      about Alice's setting; a = -sign(X.lambda), b = +sign(Y.lambda).
///   toy-table        : two lambda labels with context-dependent weights
///                      (0 and p under X resp. X') and fixed outcome signs.
///   uniform-baseline : measurement-independent control; lambda uniform on the
///                      sphere, a = +sign(X.lambda), b = -sign(Y.lambda).
class ModelDescriptor {
  public:
    static ModelDescriptor singlet_onesided() {
        return ModelDescriptor(ModelKind::SingletOnesided, LambdaDependence::AliceOnly, {});
    }
    static ModelDescriptor toy_table(const ToyModelParams& params) {
        if (!(params.p >= 0.0 && params.p <= 1.0)) {
            throw std::invalid_argument("toy_table: p must lie in [0, 1]");
        }
        return ModelDescriptor(ModelKind::ToyTable, LambdaDependence::AliceOnly, params);
    }
    static ModelDescriptor uniform_baseline() {
        return ModelDescriptor(ModelKind::UniformBaseline, LambdaDependence::None, {});
    }

    ModelKind kind() const { return kind_; }
    LambdaDependence lambda_dependence() const { return dependence_; }

    const ToyModelParams& toy_params() const {
        if (kind_ != ModelKind::ToyTable) {
            throw std::invalid_argument("toy_params: not a toy-table model");
        }
        return toy_;
    }

  private:
    ModelDescriptor(ModelKind kind, LambdaDependence dep, const ToyModelParams& toy)
        : kind_(kind), dependence_(dep), toy_(toy) {}

    ModelKind kind_;
    LambdaDependence dependence_;
    ToyModelParams toy_;
};

namespace detail {

inline const UnitVec3& require_direction(const Setting& s, const char* who) {
    if (!std::holds_alternative<UnitVec3>(s)) {
        throw std::invalid_argument(std::string(who) + ": continuous model needs a vector setting");
    }
    return std::get<UnitVec3>(s);
}

inline SettingLabel require_label(const Setting& s, const char* who) {
    if (!std::holds_alternative<SettingLabel>(s)) {
        throw std::invalid_argument(std::string(who) + ": discrete model needs a context label");
    }
    return std::get<SettingLabel>(s);
}

inline SettingLabel require_alice_label(const Setting& s, const char* who) {
    const SettingLabel l = require_label(s, who);
    if (l != SettingLabel::X && l != SettingLabel::Xprime) {
        throw std::invalid_argument(std::string(who) + ": expected an Alice context (X or X')");
    }
    return l;
}

inline SettingLabel require_bob_label(const Setting& s, const char* who) {
    const SettingLabel l = require_label(s, who);
    if (l != SettingLabel::Y && l != SettingLabel::Yprime) {
        throw std::invalid_argument(std::string(who) + ": expected a Bob context (Y or Y')");
    }
    return l;
}

// Weight of lambda_1 conditioned on the Alice context, per the table.
inline double toy_rho1(const ToyModelParams& params, SettingLabel alice_context) {
    return alice_context == SettingLabel::X ? 0.0 : params.p;
}

}  // namespace detail

/// Draws one hidden variable conditioned on Alice's setting only (the one-sided
/// dependence condition; the uniform baseline ignores the setting entirely).
inline HiddenVar sample_lambda(const ModelDescriptor& model, const Setting& alice_setting,
                               RandomStream& stream) {
    switch (model.kind()) {
        case ModelKind::SingletOnesided: {
            const UnitVec3& x = detail::require_direction(alice_setting, "sample_lambda");
            return HiddenVar::from_direction(sample_cosine_weighted(x, stream));
        }
        case ModelKind::ToyTable: {
            const SettingLabel ctx = detail::require_alice_label(alice_setting, "sample_lambda");
            const double rho1 = detail::toy_rho1(model.toy_params(), ctx);
            return HiddenVar::from_label(stream.next_double() < rho1 ? 1 : 2);
        }
        case ModelKind::UniformBaseline: {
            detail::require_direction(alice_setting, "sample_lambda");
            return HiddenVar::from_direction(sample_uniform_sphere(stream));
        }
    }
    throw std::logic_error("sample_lambda: unreachable");
}

/// Alice's deterministic outcome. Reads only her setting and lambda.
inline Outcome outcome_alice(const ModelDescriptor& model, const Setting& setting,
                             const HiddenVar& lambda) {
    switch (model.kind()) {
        case ModelKind::SingletOnesided: {
            const UnitVec3& x = detail::require_direction(setting, "outcome_alice");
            return Outcome(-sign_pm(dot(x, lambda.direction())));
        }
        case ModelKind::ToyTable: {
            detail::require_alice_label(setting, "outcome_alice");
            const ToyModelParams& t = model.toy_params();
            // Table row lambda_1: X and X' both read -a; row lambda_2: both read b.
            return lambda.label() == 1 ? Outcome(-t.a.value) : t.b;
        }
        case ModelKind::UniformBaseline: {
            const UnitVec3& x = detail::require_direction(setting, "outcome_alice");
            return Outcome(sign_pm(dot(x, lambda.direction())));
        }
    }
    throw std::logic_error("outcome_alice: unreachable");
}

/// Bob's deterministic outcome. Reads only his setting and lambda (parameter
/// independence is enforced by this signature).
inline Outcome outcome_bob(const ModelDescriptor& model, const Setting& setting,
                           const HiddenVar& lambda) {
    switch (model.kind()) {
        case ModelKind::SingletOnesided: {
            const UnitVec3& y = detail::require_direction(setting, "outcome_bob");
            return Outcome(sign_pm(dot(y, lambda.direction())));
        }
        case ModelKind::ToyTable: {
            const SettingLabel ctx = detail::require_bob_label(setting, "outcome_bob");
            const ToyModelParams& t = model.toy_params();
            if (lambda.label() == 1) {
                // Table row lambda_1: Y reads -a, Y' reads a.
                return ctx == SettingLabel::Y ? Outcome(-t.a.value) : t.a;
            }
            return t.b;
        }
        case ModelKind::UniformBaseline: {
            const UnitVec3& y = detail::require_direction(setting, "outcome_bob");
            return Outcome(-sign_pm(dot(y, lambda.direction())));
        }
    }
    throw std::logic_error("outcome_bob: unreachable");
}

/// Closed-form correlator <ab> when the model admits one (all current models do;
/// the empty optional is reserved for future models without a closed form).
inline std::optional<double> analytic_correlator(const ModelDescriptor& model,
                                                 const Setting& alice_setting,
                                                 const Setting& bob_setting) {
    switch (model.kind()) {
        case ModelKind::SingletOnesided: {
            const UnitVec3& x = detail::require_direction(alice_setting, "analytic_correlator");
            const UnitVec3& y = detail::require_direction(bob_setting, "analytic_correlator");
            return -dot(x, y);
        }
        case ModelKind::ToyTable: {
            const SettingLabel a = detail::require_alice_label(alice_setting, "analytic_correlator");
            const SettingLabel b = detail::require_bob_label(bob_setting, "analytic_correlator");
            if (a == SettingLabel::Xprime && b == SettingLabel::Yprime) {
                return 1.0 - 2.0 * model.toy_params().p;
            }
            return 1.0;
        }
        case ModelKind::UniformBaseline: {
            const UnitVec3& x = detail::require_direction(alice_setting, "analytic_correlator");
            const UnitVec3& y = detail::require_direction(bob_setting, "analytic_correlator");
            return -1.0 + 2.0 * angle_between(x, y) / kPi;
        }
    }
    throw std::logic_error("analytic_correlator: unreachable");
}

/// Probability mass (discrete models) or density on the sphere (continuous
/// models) of a hidden variable conditioned on Alice's context.
inline double lambda_mass(const ModelDescriptor& model, const Setting& alice_context,
                          const HiddenVar& lambda) {
    switch (model.kind()) {
        case ModelKind::SingletOnesided: {
            const UnitVec3& x = detail::require_direction(alice_context, "lambda_mass");
            return std::fabs(dot(x, lambda.direction())) / kTwoPi;
        }
        case ModelKind::ToyTable: {
            const SettingLabel ctx = detail::require_alice_label(alice_context, "lambda_mass");
            const double rho1 = detail::toy_rho1(model.toy_params(), ctx);
            const std::size_t l = lambda.label();
            if (l > 2) {
                throw std::invalid_argument("lambda_mass: toy-table labels are 1 or 2");
            }
            return l == 1 ? rho1 : 1.0 - rho1;
        }
        case ModelKind::UniformBaseline: {
            detail::require_direction(alice_context, "lambda_mass");
            lambda.direction();
            return 1.0 / (4.0 * kPi);
        }
    }
    throw std::logic_error("lambda_mass: unreachable");
}

}  // namespace mdbell
