#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <random>
#include <thread>
#include <vector>

#include "pctl/errors.hpp"
#include "pctl/kernel.hpp"
#include "pctl/model.hpp"

namespace pctl {

struct MonteCarloEstimate {
    double estimate = 0.0;
    double half_width = 0.0;  // 3 standard errors
    std::size_t samples = 0;
    std::size_t hits = 0;
};

namespace detail {

inline constexpr std::size_t kTrajectoriesPerStream = 1u << 14;

// First-hit outcome of a single trajectory: true when psi is entered at some
// t <= horizon while every earlier state stayed in phi.
template <class Rng>
bool reaches_before_exit(const Model& model, double x, const SatSet& phi, const SatSet& psi, std::size_t horizon,
                         Rng& rng) {
    const Grid& grid = model.grid();
    for (std::size_t t = 0;; ++t) {
        if (psi.contains(grid, x)) return true;
        if (!phi.contains(grid, x) || t == horizon) return false;
        x = sample(model.kernel(), x, rng);
    }
}

}  // namespace detail

/// Monte Carlo estimate of P_x0(phi U<=horizon psi) by forward simulation of the
/// exact kernel. Trajectories are split into fixed-size streams, each seeded from
/// (seed, stream index), so the result does not depend on the thread count.
inline MonteCarloEstimate simulate_until(const Model& model, double x0, const SatSet& phi, const SatSet& psi,
                                         std::size_t horizon, std::size_t n, std::uint64_t seed,
                                         unsigned threads = std::thread::hardware_concurrency()) {
    if (n == 0) throw InvalidArgument("simulation needs at least one trajectory");
    if (phi.size() != model.grid().cells() || psi.size() != model.grid().cells())
        throw InvalidArgument("satisfaction set size does not match the grid");

    const std::size_t streams = (n + detail::kTrajectoriesPerStream - 1) / detail::kTrajectoriesPerStream;
    std::vector<std::size_t> hits(streams, 0);
    std::vector<std::exception_ptr> errors(streams);

    auto run_stream = [&](std::size_t s) {
        try {
            std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                              static_cast<std::uint32_t>(s)};
            std::mt19937_64 rng(seq);
            std::size_t begin = s * detail::kTrajectoriesPerStream;
            std::size_t end = std::min(n, begin + detail::kTrajectoriesPerStream);
            for (std::size_t k = begin; k < end; ++k)
                hits[s] += detail::reaches_before_exit(model, x0, phi, psi, horizon, rng);
        } catch (...) {
            errors[s] = std::current_exception();
        }
    };

    const std::size_t workers = std::clamp<std::size_t>(threads, 1, streams);
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t s = w; s < streams; s += workers) run_stream(s);
            });
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    MonteCarloEstimate out;
    out.samples = n;
    for (std::size_t h : hits) out.hits += h;
    out.estimate = static_cast<double>(out.hits) / static_cast<double>(n);
    out.half_width = 3.0 * std::sqrt(out.estimate * (1.0 - out.estimate) / static_cast<double>(n));
    return out;
}

}  // namespace pctl
