// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pctl/checker.hpp"
#include "pctl/models.hpp"
#include "pctl/simulate.hpp"
#include "test_support.hpp"

using namespace pctl;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
    std::string failed;

    void require(bool ok, const std::string& what) {
        if (ok) return;
        failed += (failed.empty() ? "" : ", ") + what;
        pass = false;
    }
};

int failures = 0;

void report(const char* id, const char* title, const std::function<void(Outcome&)>& body) {
    Outcome o;
    try {
        body(o);
    } catch (const std::exception& e) {
        o.require(false, std::string("exception: ") + e.what());
    }
    if (!o.pass) ++failures;
    std::printf("%s %s %s |%s", o.pass ? "PASS" : "FAIL", id, title, o.detail.str().c_str());
    if (!o.pass) std::printf(" | failed: %s", o.failed.c_str());
    std::printf("\n");
    std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Smallest satisfying cell center below `below`, if any.
std::optional<double> smallest_below(const Grid& g, const SatSet& s, double below) {
    for (std::size_t i = 0; i < g.cells() && g.center(i) < below; ++i) {
        if (s.mask[i]) return g.center(i);
    }
    return std::nullopt;
}

template <class Rng>
Model random_gaussian_model(Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double a = 0.5 + 0.6 * u(rng), shift = 2.0 * u(rng) - 1.0, s0 = 0.05 + 1.5 * u(rng), s1 = 0.2 * u(rng);
    auto k = affine_gaussian_kernel([=](double x) { return 5.0 + a * (x - 5.0) + shift; },
                                    [=](double x) { return s0 + s1 * std::abs(x); });
    Grid g(0.0, 10.0, 40);
    std::uniform_int_distribution<std::size_t> e(0, 40);
    auto region = [&](bool up) {
        std::vector<Interval> ivs;
        for (int p = std::uniform_int_distribution<int>(0, 3)(rng); p > 0; --p) {
            std::size_t lo = e(rng), hi = e(rng);
            if (lo > hi) std::swap(lo, hi);
            ivs.push_back({g.edge(lo), g.edge(hi)});
        }
        if (up) ivs.push_back({g.edge(e(rng)), kInf});
        return Region(ivs);
    };
    return Model(k, g, {{"phi", region(false)}, {"psi", region(u(rng) < 0.5)}});
}

template <class Rng>
ValueFunction random_member(const Model& m, const SatSet& phi, const SatSet& psi, Rng& rng) {
    ValueFunction w = until_indicator(m.dk(), phi, psi);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (phi.mask[i] && !psi.mask[i]) w.values[i] = u(rng);
    }
    return w;
}

}  // namespace

int main() {
    const auto fishery_formula = parse("P>=0.9[ safe U<=5 target ]");
    const auto retirement_formula = parse("P>=0.85[ safe U<=20 target ]");

    report("1", "fishery satisfaction sets (MSY empty below 150, HCR in [55,75], Stop in [35,55])", [&](Outcome& o) {
        struct Case {
            models::FisheryStrategy s;
            std::optional<std::pair<double, double>> window;
        };
        for (Case c : {Case{models::FisheryStrategy::MSY, std::nullopt}, Case{models::FisheryStrategy::HCR, {{55, 75}}},
                       Case{models::FisheryStrategy::Stop, {{35, 55}}}}) {
            std::string name(models::to_string(c.s));
            auto t0 = std::chrono::steady_clock::now();
            Model m = models::fishery_model(c.s, 800);
            SatSet sat = check(m, fishery_formula);
            double elapsed = seconds_since(t0);

            auto first = smallest_below(m.grid(), sat, 150.0);
            o.detail << " " << name << ": smallest<150 = " << (first ? std::to_string(*first) : "none") << ", "
                     << elapsed << " s;";
            if (c.window) {
                o.require(first && *first >= c.window->first && *first <= c.window->second,
                          name + " smallest center outside [" + std::to_string(int(c.window->first)) + "," +
                              std::to_string(int(c.window->second)) + "]");
            } else {
                o.require(!first, name + " has a satisfying cell below 150");
            }
            bool target_ok = true;
            for (std::size_t i = 0; i < 800; ++i) {
                if (m.grid().center(i) >= 150.0) target_ok = target_ok && sat.mask[i];
            }
            o.require(target_ok, name + " misses a cell in [150,400]");
            o.require(elapsed < 1.0, name + " slower than 1 s");
        }
    });

    report("2", "retirement satisfaction sets (70000 / 66500 / 51500 within 5000)", [&](Outcome& o) {
        const models::PortfolioStrategy strategies[] = {{0.4, 0.4, 0.2}, {0.8, 0.2, 0.0}, {0.2, 0.8, 0.0}};
        const double expected[] = {70000, 66500, 51500};
        const char* names[] = {"i", "ii", "iii"};
        for (int k = 0; k < 3; ++k) {
            auto t0 = std::chrono::steady_clock::now();
            Model m = models::retirement_model(strategies[k], 2000);
            SatSet sat = check(m, retirement_formula);
            double elapsed = seconds_since(t0);
            auto first = smallest_below(m.grid(), sat, kInf);
            o.detail << " (" << names[k] << "): " << (first ? std::to_string(*first) : "none") << ", " << elapsed
                     << " s;";
            o.require(first && std::abs(*first - expected[k]) <= 5000.0, std::string("(") + names[k] + ") off target");
            o.require(sat.upper_tail == true, std::string("(") + names[k] + ") upper tail not satisfied");
            o.require(elapsed < 5.0, std::string("(") + names[k] + ") slower than 5 s");
        }
    });

    report("3", "finite chains match path enumeration and the linear solve", [&](Outcome& o) {
        std::mt19937_64 rng(3);
        double worst_bounded = 0.0, worst_unbounded = 0.0;
        for (int trial = 0; trial < 500; ++trial) {
            std::size_t n = std::uniform_int_distribution<std::size_t>(1, 4)(rng);
            auto p = test::random_chain(n, rng);
            auto phi = test::random_mask(n, 0.6, rng), psi = test::random_mask(n, 0.3, rng);
            Model m = test::finite_model(p, {{"phi", test::states_region(phi)}, {"psi", test::states_region(psi)}});
            const SatSet &sphi = m.region_set("phi"), &spsi = m.region_set("psi");
            auto seq = bounded_until(m, sphi, spsi, 6);
            for (std::size_t k = 0; k <= 6; ++k) {
                for (std::size_t s = 0; s < n; ++s)
                    worst_bounded = std::max(worst_bounded,
                                             std::abs(seq[k][s] - test::enumerate_bounded_until(p, phi, psi, s, k)));
            }
            auto sol = unbounded_until(m, sphi, spsi, {1e-14, 10000000});
            auto exact = test::solve_until(p, phi, psi);
            for (std::size_t s = 0; s < n; ++s) worst_unbounded = std::max(worst_unbounded, std::abs(sol.values[s] - exact[s]));
        }
        Model fx = test::fixture_model();
        double v0 = unbounded_until(fx, fx.region_set("phi"), fx.region_set("psi")).values[0];
        o.detail << " max bounded err " << worst_bounded << ", max unbounded err " << worst_unbounded
                 << ", fixture V(0) = " << v0;
        o.require(worst_bounded <= 1e-12, "bounded mismatch");
        o.require(worst_unbounded <= 1e-9, "unbounded mismatch");
        o.require(std::abs(v0 - 0.6) <= 1e-9, "fixture value");
    });

    report("4", "bounded iterates are monotone and stay in the [0,1] member set", [&](Outcome& o) {
        std::mt19937_64 rng(4);
        int models_checked = 0;
        for (int trial = 0; trial < 120; ++trial) {
            Model m = random_gaussian_model(rng);
            const SatSet &phi = m.region_set("phi"), &psi = m.region_set("psi");
            auto seq = bounded_until(m, phi, psi, 25);
            for (std::size_t k = 0; k < seq.size(); ++k) {
                for (std::size_t i = 0; i < m.grid().cells(); ++i) {
                    double v = seq[k][i];
                    bool ok = v >= 0.0 && v <= 1.0 && (!psi.mask[i] || v == 1.0) &&
                              (phi.mask[i] || psi.mask[i] || v == 0.0) && (k == 0 || v >= seq[k - 1][i] - 1e-12);
                    if (!ok) {
                        o.require(false, "trial " + std::to_string(trial) + " cell " + std::to_string(i));
                        return;
                    }
                }
            }
            ++models_checked;
        }
        o.detail << " " << models_checked << " random models";
        o.require(models_checked >= 100, "fewer than 100 models");
    });

    report("5", "residuals and operator differences shrink by alpha", [&](Outcome& o) {
        std::mt19937_64 rng(5);
        int contracting = 0;
        for (int trial = 0; trial < 150; ++trial) {
            Model m = random_gaussian_model(rng);
            const SatSet &phi = m.region_set("phi"), &psi = m.region_set("psi");
            auto sol = unbounded_until(m, phi, psi, {1e-12, 100000});
            double alpha = sol.report.alpha;
            if (!(alpha < 1.0)) continue;
            ++contracting;
            const auto& r = sol.report.residuals;
            for (std::size_t k = 1; k < r.size(); ++k) {
                if (r[k] > alpha * r[k - 1] + 1e-12) o.require(false, "residual ratio, trial " + std::to_string(trial));
            }
            for (int rep = 0; rep < 10; ++rep) {
                auto w1 = random_member(m, phi, psi, rng), w2 = random_member(m, phi, psi, rng);
                double lhs = sup_distance(apply_L(m.dk(), phi, psi, w1), apply_L(m.dk(), phi, psi, w2));
                if (lhs > alpha * sup_distance(w1, w2) + 1e-12)
                    o.require(false, "Lipschitz bound, trial " + std::to_string(trial));
            }
        }
        o.detail << " " << contracting << " models with alpha < 1";
        o.require(contracting > 0, "no contracting models generated");
    });

    report("6", "absorbing chain: iteration picks the least fixed point", [&](Outcome& o) {
        auto k = affine_gaussian_kernel([](double x) { return x; }, [](double) { return 0.0; });
        Model m(k, Grid(0, 20, 20), {{"psi", Region({{0, 10}})}, {"everything", Region::whole()}});
        const SatSet &phi = m.region_set("everything"), &psi = m.region_set("psi");
        auto sol = unbounded_until(m, phi, psi);
        ValueFunction one{std::vector<double>(20, 1.0), std::nullopt, std::nullopt};
        double res_v = sup_distance(apply_L(m.dk(), phi, psi, sol.values), sol.values);
        double res_one = sup_distance(apply_L(m.dk(), phi, psi, one), one);
        double dist = sup_distance(sol.values, until_indicator(m.dk(), phi, psi));
        bool below_one = true;
        for (double v : sol.values.values) below_one = below_one && v <= 1.0;
        o.detail << " residual(V) " << res_v << ", residual(1) " << res_one << ", |V - 1_psi| " << dist
                 << ", alpha " << sol.report.alpha;
        o.require(res_v <= 1e-9, "V is not a fixed point");
        o.require(res_one <= 1e-9, "constant 1 is not a fixed point");
        o.require(dist <= 1e-9, "V differs from the psi indicator");
        o.require(below_one, "V exceeds 1");
    });

    report("7", "sub-solutions lie below V and super-solutions above", [&](Outcome& o) {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        int subs = 0, supers = 0;
        for (int trial = 0; trial < 120; ++trial) {
            Model m = random_gaussian_model(rng);
            const SatSet &phi = m.region_set("phi"), &psi = m.region_set("psi");
            auto sol = unbounded_until(m, phi, psi, {1e-13, 1000000});
            if (!(sol.report.alpha < 1.0)) continue;
            const ValueFunction& v = sol.values;
            for (int rep = 0; rep < 20; ++rep) {
                ValueFunction w = random_member(m, phi, psi, rng);
                for (int s = std::uniform_int_distribution<int>(0, 6)(rng); s > 0; --s) w = apply_L(m.dk(), phi, psi, w);
                double theta = u(rng);
                ValueFunction sub = w, super = w;
                for (std::size_t i = 0; i < w.size(); ++i) {
                    if (phi.mask[i] && !psi.mask[i]) {
                        sub.values[i] = theta * w[i];
                        super.values[i] = 1.0 - theta * (1.0 - w[i]);
                    }
                }
                auto lsub = apply_L(m.dk(), phi, psi, sub), lsuper = apply_L(m.dk(), phi, psi, super);
                bool is_sub = true, is_super = true;
                for (std::size_t i = 0; i < w.size(); ++i) {
                    is_sub = is_sub && sub[i] <= lsub[i];
                    is_super = is_super && super[i] >= lsuper[i];
                }
                for (std::size_t i = 0; i < w.size(); ++i) {
                    if (is_sub && sub[i] > v[i] + 1e-9) o.require(false, "sub-solution above V");
                    if (is_super && super[i] < v[i] - 1e-9) o.require(false, "super-solution below V");
                }
                subs += is_sub;
                supers += is_super;
            }
        }
        o.detail << " " << subs << " sub-solutions, " << supers << " super-solutions";
        o.require(subs > 0 && supers > 0, "no candidates passed the premise");
    });

    report("8", "Monte Carlo agrees with the fixed point and with V_5 on fishery HCR", [&](Outcome& o) {
        Model fx = test::fixture_model();
        auto mc = simulate_until(fx, 0.0, fx.region_set("phi"), fx.region_set("psi"), 50, 100000, 2024);
        o.detail << " fixture " << mc.estimate << " +/- " << mc.half_width;
        o.require(std::abs(mc.estimate - 0.6) <= mc.half_width, "fixture estimate");

        Model m = models::fishery_model(models::FisheryStrategy::HCR, 800);
        const SatSet &safe = m.region_set("safe"), &target = m.region_set("target");
        double dp = bounded_until(m, safe, target, 5).back()[*m.grid().locate(100.0)];
        auto hcr = simulate_until(m, 100.0, safe, target, 5, 100000, 2024);
        o.detail << "; HCR x=100 MC " << hcr.estimate << " +/- " << hcr.half_width << " vs V_5 " << dp;
        o.require(std::abs(hcr.estimate - dp) <= hcr.half_width + 0.02, "fishery estimate");
    });

    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
