#include "esr/welfare.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace esr {

namespace {

constexpr double kWeightTolerance = 1e-9;

void require_nonnegative(std::span<const double> r, const char* what) {
    for (double x : r) {
        if (!(x >= 0.0)) throw WelfareDomainError(std::string(what) + " requires nonnegative components");
    }
}

}  // namespace

WelfareFn::WelfareFn(WelfareKind kind, std::size_t arity, std::vector<double> params, bool monotone,
                     std::optional<double> lipschitz)
    : kind_(kind), arity_(arity), params_(std::move(params)), monotone_(monotone), lipschitz_l1_(lipschitz) {
    if (arity_ == 0) throw std::invalid_argument("welfare arity must be positive");
}

WelfareFn WelfareFn::nash(std::size_t d) { return {WelfareKind::Nash, d, {}, true, std::nullopt}; }

WelfareFn WelfareFn::spf(std::size_t d, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("SPF smoothing lambda must be positive");
    // d is the published constant for lambda = 1; d(ln(x + lambda))/dx peaks at 1/lambda.
    const double lipschitz = std::max(static_cast<double>(d), 1.0 / lambda);
    return {WelfareKind::SPF, d, {lambda}, true, lipschitz};
}

WelfareFn WelfareFn::egalitarian(std::size_t d) { return {WelfareKind::Egalitarian, d, {}, true, 1.0}; }

WelfareFn WelfareFn::cobb_douglas(double resource_exponent, double damage_exponent) {
    if (!(resource_exponent >= 0.0 && damage_exponent >= 0.0) ||
        std::abs(resource_exponent + damage_exponent - 1.0) > kWeightTolerance)
        throw std::invalid_argument("Cobb-Douglas exponents must be nonnegative and sum to 1");
    return {WelfareKind::CobbDouglas, 2, {resource_exponent, damage_exponent}, false, std::nullopt};
}

WelfareFn WelfareFn::rd_threshold(double threshold) {
    if (!std::isfinite(threshold)) throw std::invalid_argument("RD threshold must be finite");
    return {WelfareKind::RDThreshold, 2, {threshold}, false, std::nullopt};
}

WelfareFn WelfareFn::linear(std::vector<double> weights) {
    if (weights.empty()) throw std::invalid_argument("linear welfare needs at least one weight");
    if (std::any_of(weights.begin(), weights.end(), [](double w) { return !(w >= 0.0); }))
        throw std::invalid_argument("linear weights must be nonnegative");
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (std::abs(total - 1.0) > kWeightTolerance) throw std::invalid_argument("linear weights must sum to 1");
    const double lipschitz = *std::max_element(weights.begin(), weights.end());
    const std::size_t d = weights.size();
    return {WelfareKind::Linear, d, std::move(weights), true, lipschitz};
}

WelfareFn WelfareFn::with_lipschitz(double lipschitz_l1) const {
    if (!(lipschitz_l1 > 0.0)) throw std::invalid_argument("Lipschitz constant must be positive");
    WelfareFn copy = *this;
    copy.lipschitz_l1_ = lipschitz_l1;
    return copy;
}

double WelfareFn::operator()(std::span<const double> r) const {
    if (r.size() != arity_) {
        std::ostringstream os;
        os << name() << " expects a " << arity_ << "-vector, got " << r.size();
        throw WelfareDomainError(os.str());
    }
    switch (kind_) {
        case WelfareKind::Nash: {
            require_nonnegative(r, "Nash welfare");
            double product = 1.0;
            for (double x : r) {
                if (x == 0.0) return 0.0;
                product *= x;
            }
            if (arity_ == 1) return product;
            if (arity_ == 2) return std::sqrt(product);
            return std::pow(product, 1.0 / static_cast<double>(arity_));
        }
        case WelfareKind::SPF: {
            require_nonnegative(r, "SPF welfare");
            double total = 0.0;
            for (double x : r) total += std::log(x + params_[0]);
            return total;
        }
        case WelfareKind::Egalitarian:
            return *std::min_element(r.begin(), r.end());
        case WelfareKind::CobbDouglas: {
            require_nonnegative(r, "Cobb-Douglas welfare");
            return std::pow(r[0], params_[0]) * std::pow(1.0 / (r[1] + 1.0), params_[1]);
        }
        case WelfareKind::RDThreshold: {
            const double excess = r[1] - params_[0];
            return r[0] - std::max(0.0, excess * excess * excess);
        }
        case WelfareKind::Linear: {
            double total = 0.0;
            for (std::size_t i = 0; i < r.size(); ++i) total += params_[i] * r[i];
            return total;
        }
    }
    return 0.0;
}

std::string WelfareFn::name() const {
    switch (kind_) {
        case WelfareKind::Nash: return "nash";
        case WelfareKind::SPF: return "spf";
        case WelfareKind::Egalitarian: return "egalitarian";
        case WelfareKind::CobbDouglas: return "cobb_douglas";
        case WelfareKind::RDThreshold: return "rd_threshold";
        case WelfareKind::Linear: return "linear";
    }
    return "unknown";
}

double delta_for_epsilon(const WelfareFn& w, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    if (!w.lipschitz_l1())
        throw NoGuaranteeError(w.name() +
                               " welfare has no uniform-continuity modulus; choose the lattice resolution empirically");
    return eps / *w.lipschitz_l1();
}

double epsilon_for_delta(const WelfareFn& w, double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
    if (!w.lipschitz_l1())
        throw NoGuaranteeError(w.name() + " welfare has no uniform-continuity modulus");
    return delta * *w.lipschitz_l1();
}

WelfareFn welfare_from_json(const nlohmann::json& spec, std::size_t d) {
    const auto kind = spec.at("kind").get<std::string>();
    if (kind == "nash") return WelfareFn::nash(d);
    if (kind == "spf") return WelfareFn::spf(d, spec.value("lambda", kSpfPlanningLambda));
    if (kind == "egalitarian") return WelfareFn::egalitarian(d);
    if (kind == "cobb_douglas") return WelfareFn::cobb_douglas(spec.value("alpha", 0.5), spec.value("beta", 0.5));
    if (kind == "rd_threshold") return WelfareFn::rd_threshold(spec.at("threshold").get<double>());
    if (kind == "linear") return WelfareFn::linear(spec.at("weights").get<std::vector<double>>());
    throw std::invalid_argument("unknown welfare kind '" + kind + "'");
}

nlohmann::json welfare_to_json(const WelfareFn& w) {
    nlohmann::json out{{"kind", w.name()}};
    switch (w.kind()) {
        case WelfareKind::SPF: out["lambda"] = w.params()[0]; break;
        case WelfareKind::CobbDouglas:
            out["alpha"] = w.params()[0];
            out["beta"] = w.params()[1];
            break;
        case WelfareKind::RDThreshold: out["threshold"] = w.params()[0]; break;
        case WelfareKind::Linear: out["weights"] = w.params(); break;
        default: break;
    }
    return out;
}

}  // namespace esr
