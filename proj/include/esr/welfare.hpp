#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace esr {

/// Smoothing used when SPF stands in for Nash welfare during planning.
inline constexpr double kSpfPlanningLambda = 1e-7;
/// Smoothing used for the discretization ablations.
inline constexpr double kSpfAblationLambda = 1.0;

enum class WelfareKind { Nash, SPF, Egalitarian, CobbDouglas, RDThreshold, Linear };

class WelfareDomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// Raised when no uniform-continuity modulus is known for a welfare function.
class NoGuaranteeError : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

/**
 * Scalarization W : R^d -> R together with the smoothness metadata needed to
 * pick a lattice resolution.
 *
 * Cobb-Douglas and RD-threshold read a 2-vector as (resources, damage).
 */
class WelfareFn {
  public:
    static WelfareFn nash(std::size_t d);
    static WelfareFn spf(std::size_t d, double lambda = kSpfPlanningLambda);
    static WelfareFn egalitarian(std::size_t d);
    static WelfareFn cobb_douglas(double resource_exponent, double damage_exponent);
    static WelfareFn rd_threshold(double threshold);
    static WelfareFn linear(std::vector<double> weights);

    /// Copy with an explicit L1-Lipschitz constant on the nonnegative orthant.
    WelfareFn with_lipschitz(double lipschitz_l1) const;

    double operator()(std::span<const double> r) const;

    WelfareKind kind() const { return kind_; }
    std::size_t arity() const { return arity_; }
    bool monotone() const { return monotone_; }
    std::optional<double> lipschitz_l1() const { return lipschitz_l1_; }
    const std::vector<double>& params() const { return params_; }
    std::string name() const;

  private:
    WelfareFn(WelfareKind kind, std::size_t arity, std::vector<double> params, bool monotone,
              std::optional<double> lipschitz);

    WelfareKind kind_;
    std::size_t arity_;
    std::vector<double> params_;
    bool monotone_;
    std::optional<double> lipschitz_l1_;
};

inline double evaluate(const WelfareFn& w, std::span<const double> r) { return w(r); }

/// delta such that ||x - y||_1 < delta implies |W(x) - W(y)| < eps.
double delta_for_epsilon(const WelfareFn& w, double eps);

/// Inverse of delta_for_epsilon: the welfare error implied by an L1 perturbation.
double epsilon_for_delta(const WelfareFn& w, double delta);

/**
 * Welfare spec in the config dialect, e.g.
 *   {"kind": "spf", "lambda": 1e-7}, {"kind": "linear", "weights": [0.5, 0.5]},
 *   {"kind": "cobb_douglas", "alpha": 0.5, "beta": 0.5}, {"kind": "rd_threshold", "threshold": 3}.
 * `d` supplies the arity for kinds that do not fix it.
 */
WelfareFn welfare_from_json(const nlohmann::json& spec, std::size_t d);
nlohmann::json welfare_to_json(const WelfareFn& w);

}  // namespace esr
