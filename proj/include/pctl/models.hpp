#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>

#include "pctl/errors.hpp"
#include "pctl/kernel.hpp"
#include "pctl/model.hpp"

namespace pctl::models {

// ---------------------------------------------------------------------------
// Single-species fishery recovery
//
//   x' = (1 - nu) x + gamma R(x) - delta C(x),
//   nu ~ N(0.2, 0.1^2), gamma ~ N(1, 0.6^2), delta ~ N(1.1, 0.2^2) independent,
//   R(x) = max{r x (1 - x / 2K), 0}.
//
// For fixed x the next state is a linear combination of independent Gaussians,
// hence Gaussian with the mean and variance composed below.
// ---------------------------------------------------------------------------

namespace fishery {
inline constexpr double carrying = 200.0;  // K: half the biomass limit
inline constexpr double recruitment_rate = 1.0;
inline constexpr double mortality_mean = 0.2;
inline constexpr double mortality_sd = 0.1;
inline constexpr double recruitment_mean = 1.0;
inline constexpr double recruitment_sd = 0.6;
inline constexpr double catch_mean = 1.1;
inline constexpr double catch_sd = 0.2;
inline constexpr double biomass_limit = 2.0 * carrying;

/// Deterministic maximum sustainable yield K (r - mu)^2 / (2 r).
inline constexpr double msy_catch = carrying * (recruitment_rate - mortality_mean) *
                                    (recruitment_rate - mortality_mean) / (2.0 * recruitment_rate);

inline double recruitment(double x) {
    return std::max(recruitment_rate * x * (1.0 - x / (2.0 * carrying)), 0.0);
}
}  // namespace fishery

enum class FisheryStrategy { MSY, HCR, Stop };

inline std::string_view to_string(FisheryStrategy s) {
    switch (s) {
        case FisheryStrategy::MSY: return "msy";
        case FisheryStrategy::HCR: return "hcr";
        case FisheryStrategy::Stop: return "stop";
    }
    return "?";
}

inline FisheryStrategy parse_fishery_strategy(std::string_view name) {
    if (name == "msy") return FisheryStrategy::MSY;
    if (name == "hcr") return FisheryStrategy::HCR;
    if (name == "stop") return FisheryStrategy::Stop;
    throw InvalidArgument("unknown fishery strategy '" + std::string(name) + "' (expected msy, hcr or stop)");
}

/// Target catch C(x) of a recovery strategy.
inline double target_catch(FisheryStrategy s, double x) {
    switch (s) {
        case FisheryStrategy::MSY: return fishery::msy_catch;
        case FisheryStrategy::HCR:
            return x < fishery::carrying ? fishery::msy_catch * x / fishery::carrying : fishery::msy_catch;
        case FisheryStrategy::Stop: return 0.0;
    }
    return 0.0;
}

inline Kernel fishery_kernel(FisheryStrategy s) {
    using namespace fishery;
    auto mean = [s](double x) {
        return (1.0 - mortality_mean) * x + recruitment_mean * recruitment(x) - catch_mean * target_catch(s, x);
    };
    auto sd = [s](double x) {
        double r = recruitment(x), c = target_catch(s, x);
        return std::sqrt(x * x * mortality_sd * mortality_sd + r * r * recruitment_sd * recruitment_sd +
                         c * c * catch_sd * catch_sd);
    };
    return affine_gaussian_kernel(mean, sd);
}

inline Grid fishery_grid(std::size_t cells = 800) { return Grid(0.0, fishery::biomass_limit, cells); }

/// target = [150, 400], safe = (0, 400]. The point 0 carries no mass, so safe
/// is stored as the closed [0, 400].
inline std::map<std::string, Region> fishery_regions() {
    return {{"target", Region({{150.0, fishery::biomass_limit}})}, {"safe", Region({{0.0, fishery::biomass_limit}})}};
}

inline Model fishery_model(FisheryStrategy s, std::size_t cells = 800) {
    return Model(fishery_kernel(s), fishery_grid(cells), fishery_regions());
}

// ---------------------------------------------------------------------------
// Retirement fund
//
//   x' = a x (1 + S) + b x (1 + R) + c x + u,
//   S ~ N(0.03, 0.005^2), R ~ N(0.1, 0.2^2) independent, u = 2500.
// ---------------------------------------------------------------------------

namespace retirement {
inline constexpr double safe_return_mean = 0.03;
inline constexpr double safe_return_sd = 0.005;
inline constexpr double risky_return_mean = 0.10;
inline constexpr double risky_return_sd = 0.2;
inline constexpr double contribution = 2500.0;
inline constexpr double target_fund = 200000.0;
}  // namespace retirement

/// Capital split between the safe asset (a), the risky asset (b) and cash (c).
struct PortfolioStrategy {
    double safe;
    double risky;
    double cash;

    PortfolioStrategy(double a, double b, double c) : safe(a), risky(b), cash(c) {
        for (double v : {a, b, c}) {
            if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("portfolio fractions must lie in [0,1]");
        }
        if (std::abs(a + b + c - 1.0) > 1e-12) throw InvalidArgument("portfolio fractions must sum to 1");
    }

    /// Expected one-year growth multiplier of the invested capital.
    double drift() const {
        using namespace retirement;
        return safe * (1.0 + safe_return_mean) + risky * (1.0 + risky_return_mean) + cash;
    }

    double volatility() const {
        using namespace retirement;
        return std::sqrt(safe * safe * safe_return_sd * safe_return_sd + risky * risky * risky_return_sd * risky_return_sd);
    }
};

inline Kernel retirement_kernel(const PortfolioStrategy& p) {
    double drift = p.drift(), vol = p.volatility();
    return affine_gaussian_kernel([drift](double x) { return drift * x + retirement::contribution; },
                                  [vol](double x) { return std::abs(x) * vol; });
}

inline Grid retirement_grid(std::size_t cells = 2000) { return Grid(0.0, retirement::target_fund, cells); }

/// target = [200000, inf), safe = (0, inf). On the default grid target is
/// exactly the upper tail and ruin is the lower tail.
inline std::map<std::string, Region> retirement_regions() {
    return {{"target", Region({{retirement::target_fund, kInf}})}, {"safe", Region({{0.0, kInf}})}};
}

inline Model retirement_model(const PortfolioStrategy& p, std::size_t cells = 2000) {
    return Model(retirement_kernel(p), retirement_grid(cells), retirement_regions());
}

}  // namespace pctl::models
