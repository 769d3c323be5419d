#include "boostvi/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "boostvi/errors.hpp"
#include "boostvi/parallel.hpp"

namespace bvi {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kDropWeight = 1e-12;

double now_ms() {
    using namespace std::chrono;
    return duration<double, std::milli>(steady_clock::now().time_since_epoch()).count();
}

} // namespace

std::string algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::FwFixed: return "fw_fixed";
        case Algorithm::FwLinesearch: return "fw_linesearch";
        case Algorithm::NormCorrective: return "norm_corrective";
        case Algorithm::FullyCorrective: return "fully_corrective";
    }
    return "unknown";
}

std::optional<Algorithm> algorithm_from_name(const std::string& name) {
    if (name == "fw_fixed") return Algorithm::FwFixed;
    if (name == "fw_linesearch") return Algorithm::FwLinesearch;
    if (name == "norm_corrective") return Algorithm::NormCorrective;
    if (name == "fully_corrective") return Algorithm::FullyCorrective;
    return std::nullopt;
}

MixtureDensity default_init(const AtomFamilyConfig& family) {
    return MixtureDensity(make_atom(family.box.center(), family.sigma_max, family));
}

MixtureDensity fw_step_fixed(const MixtureDensity& q, std::size_t t,
                             const TruncatedGaussianAtom& s) {
    const double gamma = 2.0 / static_cast<double>(t + 2);
    return q.blend(s, gamma);
}

LinesearchStep fw_step_linesearch(const MixtureDensity& q, const TruncatedGaussianAtom& s,
                                  double gap, double curvature) {
    if (!(curvature > 0.0)) throw ArgumentError("line search: curvature must be positive");
    if (!(gap > 0.0)) return LinesearchStep{q, 0.0, true};
    const double gamma = std::clamp(gap / curvature, 0.0, 1.0);
    return LinesearchStep{q.blend(s, gamma), gamma, false};
}

CorrectiveEngine::CorrectiveEngine(const SolverConfig& cfg, const AtomFamilyConfig& family,
                                   const TargetPosterior& target)
    : cfg_(cfg), family_(family), target_(target),
      quadrature_mode_(cfg.use_quadrature && family.dim() <= 2) {}

std::size_t CorrectiveEngine::find_or_add(const TruncatedGaussianAtom& atom) {
    for (std::size_t i = 0; i < registry_.size(); ++i)
        if (registry_[i].same_atom(atom)) return i;
    registry_.push_back(atom);
    atom_draws_.emplace_back();
    atom_log_p_.emplace_back();
    return registry_.size() - 1;
}

const std::vector<Vec>& CorrectiveEngine::draws(std::size_t idx) {
    if (atom_draws_[idx].empty()) {
        Rng rng = Rng::seeded(cfg_.seed, 0xE000 + idx);
        std::vector<Vec> zs;
        zs.reserve(cfg_.inner_mc_samples);
        for (std::size_t k = 0; k < cfg_.inner_mc_samples; ++k)
            zs.push_back(registry_[idx].sample(rng));
        Vec lp(zs.size());
        parallel_for(zs.size(), [&](std::size_t k) { lp[k] = target_.log_target(zs[k]); });
        atom_draws_[idx] = std::move(zs);
        atom_log_p_[idx] = std::move(lp);
    }
    return atom_draws_[idx];
}

double CorrectiveEngine::gram_entry(std::size_t i, std::size_t j) {
    const auto key = std::minmax(i, j);
    const auto it = gram_.find(key);
    if (it != gram_.end()) return it->second;

    double value;
    const TruncatedGaussianAtom& a = registry_[key.first];
    const TruncatedGaussianAtom& b = registry_[key.second];
    if (quadrature_mode_) {
        const Integrand f = [&](std::span<const double> z) { return a.pdf(z) * b.pdf(z); };
        value = integrate_box(f, family_.box, cfg_.quadrature);
    } else if (key.first == key.second) {
        // <s,s> = E_s[s]
        const std::vector<Vec>& zs = draws(key.first);
        Vec vals(zs.size());
        for (std::size_t k = 0; k < zs.size(); ++k) vals[k] = a.pdf(zs[k]);
        value = pairwise_sum(vals) / static_cast<double>(zs.size());
    } else {
        // common-seed importance sampling from the pair mixture (1/2, 1/2)
        Rng rng = Rng::seeded(cfg_.seed, 0xF00F);
        const std::size_t n = cfg_.inner_mc_samples;
        Vec vals(n);
        for (std::size_t k = 0; k < n; ++k) {
            const bool from_a = rng.uniform() < 0.5;
            const Vec z = from_a ? a.sample(rng) : b.sample(rng);
            const double pa = a.pdf(z), pb = b.pdf(z);
            const double m = 0.5 * (pa + pb);
            vals[k] = m > 0.0 ? pa * pb / m : 0.0;
        }
        value = pairwise_sum(vals) / static_cast<double>(n);
    }
    gram_.emplace(key, value);
    return value;
}

double CorrectiveEngine::expectation_g_idx(std::size_t idx, const MixtureDensity& q) {
    if (quadrature_mode_) {
        const TruncatedGaussianAtom& s = registry_[idx];
        const Integrand f = [&](std::span<const double> z) {
            const double sv = s.pdf(z);
            if (sv == 0.0) return 0.0;
            return sv * (q.log_pdf(z) - target_.log_target(z));
        };
        return integrate_box(f, family_.box, cfg_.quadrature);
    }
    const std::vector<Vec>& zs = draws(idx);
    const Vec& lp = atom_log_p_[idx];
    Vec vals(zs.size());
    parallel_for(zs.size(), [&](std::size_t k) { vals[k] = q.log_pdf(zs[k]) - lp[k]; });
    return pairwise_sum(vals) / static_cast<double>(zs.size());
}

double CorrectiveEngine::atom_expectation_g(const TruncatedGaussianAtom& atom,
                                            const MixtureDensity& q) {
    return expectation_g_idx(find_or_add(atom), q);
}

MixtureDensity CorrectiveEngine::norm_corrective_step(
    const MixtureDensity& q, const TruncatedGaussianAtom& s, double l_surrogate,
    const std::vector<TruncatedGaussianAtom>& active_set, bool& fell_back,
    double fallback_curvature) {
    if (!(l_surrogate > 0.0)) throw ArgumentError("norm corrective: L must be positive");
    fell_back = false;

    std::vector<std::size_t> idx;
    for (const auto& a : active_set) {
        const std::size_t i = find_or_add(a);
        if (std::find(idx.begin(), idx.end(), i) == idx.end()) idx.push_back(i);
    }
    const std::size_t s_reg = find_or_add(s);
    if (std::find(idx.begin(), idx.end(), s_reg) == idx.end()) idx.push_back(s_reg);
    const std::size_t n = idx.size();

    // weights of q over the active set
    Eigen::VectorXd wq = Eigen::VectorXd::Zero(n);
    for (std::size_t a = 0; a < q.size(); ++a) {
        const std::size_t reg = find_or_add(q.atoms()[a]);
        const auto pos = std::find(idx.begin(), idx.end(), reg);
        if (pos == idx.end())
            throw ArgumentError("norm corrective: active set must contain the iterate's atoms");
        wq[static_cast<Eigen::Index>(pos - idx.begin())] += q.weights()[a];
    }

    Eigen::MatrixXd gram(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) gram(i, j) = gram(j, i) = gram_entry(idx[i], idx[j]);

    Eigen::VectorXd e(n);
    for (std::size_t i = 0; i < n; ++i) e[i] = expectation_g_idx(idx[i], q);

    // c_i = <s_i, q> - (1/L) E_{s_i}[g]
    const Eigen::VectorXd c = gram * wq - e / l_surrogate;

    const QpSolution sol = solve_simplex_qp({gram, c, 0.0}, cfg_.inner_tol, cfg_.inner_max_iter);
    if (!sol.converged) {
        fell_back = true;
        const double gap = wq.dot(e) - e[static_cast<Eigen::Index>(
                                         std::find(idx.begin(), idx.end(), s_reg) - idx.begin())];
        return fw_step_linesearch(q, s, gap, fallback_curvature).next;
    }

    std::vector<TruncatedGaussianAtom> atoms;
    atoms.reserve(n);
    for (std::size_t i = 0; i < n; ++i) atoms.push_back(registry_[idx[i]]);
    return MixtureDensity::from_weighted_atoms(std::move(atoms), sol.weights, kDropWeight);
}

MixtureDensity CorrectiveEngine::fully_corrective_step(
    const std::vector<TruncatedGaussianAtom>& active_set, const MixtureDensity& warm_start,
    bool& budget_hit) {
    budget_hit = false;
    std::vector<std::size_t> idx;
    for (const auto& a : active_set) {
        const std::size_t i = find_or_add(a);
        if (std::find(idx.begin(), idx.end(), i) == idx.end()) idx.push_back(i);
    }
    const std::size_t n = idx.size();
    std::vector<TruncatedGaussianAtom> atoms;
    atoms.reserve(n);
    for (std::size_t i = 0; i < n; ++i) atoms.push_back(registry_[idx[i]]);
    if (n == 1) return MixtureDensity(atoms.front());

    // warm start from the current iterate where possible
    Vec w(n, 0.0);
    double matched = 0.0;
    for (std::size_t a = 0; a < warm_start.size(); ++a) {
        for (std::size_t i = 0; i < n; ++i) {
            if (atoms[i].same_atom(warm_start.atoms()[a])) {
                w[i] += warm_start.weights()[a];
                matched += warm_start.weights()[a];
                break;
            }
        }
    }
    if (matched <= 0.0) {
        std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(n));
    } else {
        for (double& v : w) v /= matched;
    }

    // gradient of the sampled objective in the weights:
    //   d/dw_i E_{q_w}[log q_w - log p] = E_{s_i}[log q_w - log p] + 1
    // (the +1 is uniform and immaterial on the simplex); the objective value
    // is the weight-weighted sum of the same expectations.
    const auto grad_and_value = [&](const Vec& weights, Vec& grad) {
        MixtureDensity qw(atoms, weights);
        double value = 0.0;
        grad.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            grad[i] = expectation_g_idx(idx[i], qw);
            value += weights[i] * grad[i];
        }
        return value;
    };

    Vec grad_w(n), grad_y(n);
    double f_w = grad_and_value(w, grad_w);
    Vec y = w;
    grad_y = grad_w;
    double f_y = f_w;
    double theta = 1.0;
    double step = 1.0;
    bool done = false;
    double window_f = f_w;

    for (std::size_t it = 0; it < cfg_.inner_max_iter && !done; ++it) {
        // stop when a whole window of iterations moved the objective by less
        // than anything the outer loop can see
        if (it > 0 && it % 32 == 0) {
            if (window_f - f_w <= std::max(1e-12, 1e-11 * std::fabs(f_w))) {
                done = true;
                break;
            }
            window_f = f_w;
        }

        // backtracked proximal step from y
        Vec w_next;
        double f_next = 0.0;
        Vec grad_next;
        bool backtracked = false;
        for (int bt = 0; bt < 60; ++bt) {
            Vec cand(n);
            for (std::size_t i = 0; i < n; ++i) cand[i] = y[i] - step * grad_y[i];
            w_next = project_to_simplex(cand);
            f_next = grad_and_value(w_next, grad_next);
            double lin = 0.0, sq = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double dlt = w_next[i] - y[i];
                lin += grad_y[i] * dlt;
                sq += dlt * dlt;
            }
            if (f_next <= f_y + lin + 0.5 * sq / step + 1e-12) break;
            step *= 0.5;
            backtracked = true;
        }

        if (f_next > f_w + 1e-15) {
            // momentum overshoot: restart from the best point
            y = w;
            grad_y = grad_w;
            f_y = f_w;
            theta = 1.0;
            continue;
        }

        const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
        Vec w_old = w;
        w = w_next;
        double move = 0.0;
        y.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = w[i] + ((theta - 1.0) / theta_next) * (w[i] - w_old[i]);
            move = std::max(move, std::fabs(w[i] - w_old[i]));
        }
        // keep y feasible for the mixture evaluation
        y = project_to_simplex(y);
        theta = theta_next;
        grad_w = grad_next;
        f_w = f_next;
        f_y = grad_and_value(y, grad_y);
        if (!backtracked) step = std::min(step * 1.05, 1e3);

        // KKT residual on the current iterate
        double mu = std::numeric_limits<double>::infinity();
        for (double gi : grad_w) mu = std::min(mu, gi);
        double resid = 0.0, scale = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            scale = std::max(scale, std::fabs(grad_w[i]));
            if (w[i] > kDropWeight) resid = std::max(resid, grad_w[i] - mu);
        }
        if (resid / scale <= cfg_.inner_tol || move < 1e-14) done = true;
    }
    if (!done) budget_hit = true;
    return MixtureDensity::from_weighted_atoms(std::move(atoms), w, kDropWeight);
}

ConvergenceTrace run(const SolverConfig& cfg, const AtomFamilyConfig& family,
                     const TargetPosterior& target) {
    if (cfg.iterations < 1) throw ArgumentError("solver: T must be >= 1");
    if (target.dim() != family.dim())
        throw ArgumentError("solver: target and family dimensions differ");
    if (cfg.lmo.use_grid && family.dim() > 2)
        throw ArgumentError("solver: grid LMO is limited to d <= 2");

    const bool quad = cfg.use_quadrature && family.dim() <= 2;
    double curvature = cfg.curvature;
    if (!(curvature > 0.0)) curvature = compute_constants(family).curvature_bound;
    if (cfg.algorithm == Algorithm::FwLinesearch &&
        !(std::isfinite(curvature) && curvature > 0.0))
        throw ArgumentError(
            "solver: line search needs a finite positive curvature; set solver.curvature");

    MixtureDensity q = cfg.init ? *cfg.init : default_init(family);
    if (q.dim() != family.dim()) throw ArgumentError("solver: init dimension mismatch");

    CorrectiveEngine engine(cfg, family, target);
    ConvergenceTrace trace;
    trace.objective_metric =
        (target.kind() == TargetPosterior::Kind::BayesianJoint || !target.normalized())
            ? "neg_elbo"
            : "kl";

    const auto objective_of = [&](const MixtureDensity& m,
                                  std::uint64_t stream) -> std::pair<double, double> {
        if (quad) return {kl_quadrature(m, target, cfg.quadrature), 0.0};
        const McEstimate e = kl_mc(m, target, {cfg.mc_samples, derive_seed(cfg.seed, stream)});
        return {e.value, e.stderr_};
    };

    {
        const double tic = now_ms();
        const auto [obj, se] = objective_of(q, 0xB000);
        trace.rows.push_back(TraceRow{0, obj, se, 0.0, kNaN, kNaN, kNaN, q.active_count(),
                                      q.weights(), now_ms() - tic});
    }

    std::size_t consecutive_converged = 0;
    try {
    for (std::size_t t = 0; t < cfg.iterations; ++t) {
        const double tic = now_ms();

        LmoResult res = [&] {
            if (cfg.lmo.use_grid)
                return grid_lmo(q, target, family, cfg.lmo.grid, cfg.quadrature);
            LmoConfig lc = cfg.lmo.stochastic;
            lc.seed = derive_seed(cfg.seed, 0xA000 + t);
            return stochastic_lmo(q, target, lc, family);
        }();

        const GapEstimate gap =
            quad ? duality_gap_quadrature(q, res.atom, target, cfg.quadrature)
                 : duality_gap_mc(q, res.atom, target,
                                  {cfg.mc_samples, derive_seed(cfg.seed, 0xC000 + t)});

        double gamma = kNaN;
        switch (cfg.algorithm) {
            case Algorithm::FwFixed:
                gamma = 2.0 / static_cast<double>(t + 2);
                q = fw_step_fixed(q, t, res.atom);
                break;
            case Algorithm::FwLinesearch: {
                const LinesearchStep st = fw_step_linesearch(q, res.atom, gap.value, curvature);
                if (st.stalled) ++trace.stall_events;
                gamma = st.gamma;
                q = st.next;
                break;
            }
            case Algorithm::NormCorrective: {
                std::vector<TruncatedGaussianAtom> active = q.atoms();
                active.push_back(res.atom);
                bool fell_back = false;
                q = engine.norm_corrective_step(q, res.atom, cfg.l_surrogate, active, fell_back,
                                                curvature);
                if (fell_back) ++trace.qp_fallbacks;
                break;
            }
            case Algorithm::FullyCorrective: {
                std::vector<TruncatedGaussianAtom> active = q.atoms();
                active.push_back(res.atom);
                bool budget_hit = false;
                q = engine.fully_corrective_step(active, q, budget_hit);
                if (budget_hit) trace.inner_budget_hit = true;
                break;
            }
        }

        if (cfg.atom_correction) {
            const MixtureDensity frozen = q;
            const PointFn g = [&frozen, &target](std::span<const double> z) {
                return frozen.log_pdf(z) - target.log_target(z);
            };
            std::vector<TruncatedGaussianAtom> atoms = q.atoms();
            const Vec w = q.weights();
            for (std::size_t k = 0; k < atoms.size(); ++k) {
                LmoConfig lc = cfg.lmo.stochastic;
                lc.seed = derive_seed(cfg.seed, 0xD000 + (t << 12) + k);
                atoms[k] = refine_atom(atoms[k], g, lc, family);
            }
            q = MixtureDensity::from_weighted_atoms(std::move(atoms), w, 1e-15);
        }

        const auto [obj, se] = objective_of(q, 0xB001 + t);
        trace.rows.push_back(TraceRow{t + 1, obj, se, gamma, gap.value, gap.stderr_,
                                      res.linear_value.value, q.active_count(), q.weights(),
                                      now_ms() - tic});

        if (cfg.early_stop) {
            if (gap.value <= 3.0 * gap.stderr_ + 1e-10) {
                if (++consecutive_converged >= 3) {
                    trace.converged = true;
                    break;
                }
            } else {
                consecutive_converged = 0;
            }
        }
    }
    } catch (const ArgumentError&) {
        throw;
    } catch (const std::exception& e) {
        trace.final_mixture = std::move(q);
        throw SolverFailure(std::string("solver: iteration ") +
                                std::to_string(trace.rows.size()) + " failed: " + e.what(),
                            std::move(trace));
    }

    trace.final_mixture = std::move(q);
    return trace;
}

} // namespace bvi
