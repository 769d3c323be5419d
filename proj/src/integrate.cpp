#include "boostvi/integrate.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "boostvi/errors.hpp"
#include "boostvi/parallel.hpp"

namespace bvi {

namespace {

// QUADPACK dqk15 nodes and weights. Even-indexed abscissae are the Kronrod
// extension points; odd-indexed ones (plus the center) carry the embedded
// 7-point Gauss rule.
constexpr double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
constexpr double kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
constexpr double kWg[4] = {0.129484966168870, 0.279705391489277, 0.381830050505119,
                           0.417959183673469};

struct PanelResult {
    double kronrod;
    double err;
};

double guarded(const Integrand& f, std::span<const double> z) {
    const double v = f(z);
    return std::isfinite(v) ? v : 0.0;
}

PanelResult panel_1d(const Integrand& f, double a, double b) {
    const double hlf = 0.5 * (b - a);
    const double ctr = 0.5 * (a + b);
    double zbuf[1] = {ctr};
    const double fc = guarded(f, zbuf);
    double k = kWgk[7] * fc;
    double g = kWg[3] * fc;
    for (int j = 0; j < 7; ++j) {
        const double dx = hlf * kXgk[j];
        zbuf[0] = ctr - dx;
        const double f1 = guarded(f, zbuf);
        zbuf[0] = ctr + dx;
        const double f2 = guarded(f, zbuf);
        k += kWgk[j] * (f1 + f2);
        if (j % 2 == 1) g += kWg[j / 2] * (f1 + f2);
    }
    return PanelResult{k * hlf, std::fabs((k - g) * hlf)};
}

PanelResult panel_2d(const Integrand& f, double ax, double bx, double ay, double by) {
    const double hx = 0.5 * (bx - ax), cx = 0.5 * (ax + bx);
    const double hy = 0.5 * (by - ay), cy = 0.5 * (ay + by);
    double node[15], wk[15];
    double wg_of[15];
    for (int j = 0; j < 7; ++j) {
        node[j] = -kXgk[j];
        node[14 - j] = kXgk[j];
        wk[j] = wk[14 - j] = kWgk[j];
        wg_of[j] = wg_of[14 - j] = (j % 2 == 1) ? kWg[j / 2] : 0.0;
    }
    node[7] = 0.0;
    wk[7] = kWgk[7];
    wg_of[7] = kWg[3];

    double k2 = 0.0, g2 = 0.0;
    double zbuf[2];
    for (int i = 0; i < 15; ++i) {
        zbuf[0] = cx + hx * node[i];
        double krow = 0.0, grow = 0.0;
        for (int j = 0; j < 15; ++j) {
            zbuf[1] = cy + hy * node[j];
            const double v = guarded(f, zbuf);
            krow += wk[j] * v;
            grow += wg_of[j] * v;
        }
        k2 += wk[i] * krow;
        g2 += wg_of[i] * grow;
    }
    const double scale = hx * hy;
    return PanelResult{k2 * scale, std::fabs((k2 - g2) * scale)};
}

struct Panel {
    double ax, bx, ay, by;
    double tol;
};

} // namespace

double integrate_box(const Integrand& f, const SupportBox& box, const QuadratureSpec& spec) {
    if (!(spec.abs_tol > 0.0) || !(spec.rel_tol > 0.0) || spec.max_subdivisions < 1)
        throw ArgumentError("quadrature: tolerances must be positive, budget >= 1");
    const std::size_t d = box.dim();
    if (d > 2)
        throw ArgumentError("quadrature: only supported up to two dimensions; use Monte Carlo");

    std::vector<Panel> stack;
    if (d == 1) {
        stack.push_back({box.lower()[0], box.upper()[0], 0.0, 0.0, spec.abs_tol});
    } else {
        stack.push_back(
            {box.lower()[0], box.upper()[0], box.lower()[1], box.upper()[1], spec.abs_tol});
    }

    double accum = 0.0;
    std::size_t splits = 0;
    while (!stack.empty()) {
        const Panel p = stack.back();
        stack.pop_back();
        const PanelResult r = (d == 1) ? panel_1d(f, p.ax, p.bx)
                                       : panel_2d(f, p.ax, p.bx, p.ay, p.by);
        if (r.err <= std::max(p.tol, spec.rel_tol * std::fabs(r.kronrod))) {
            accum += r.kronrod;
            continue;
        }
        if (splits >= spec.max_subdivisions) {
            double best = accum + r.kronrod;
            while (!stack.empty()) {
                const Panel q = stack.back();
                stack.pop_back();
                best += (d == 1) ? panel_1d(f, q.ax, q.bx).kronrod
                                 : panel_2d(f, q.ax, q.bx, q.ay, q.by).kronrod;
            }
            std::ostringstream msg;
            msg << "quadrature: subdivision budget " << spec.max_subdivisions
                << " exhausted (best estimate " << best << ")";
            throw ConvergenceError(msg.str(), best);
        }
        ++splits;
        if (d == 1) {
            const double mid = 0.5 * (p.ax + p.bx);
            // pushed right-then-left so the left half is processed first
            stack.push_back({mid, p.bx, 0.0, 0.0, 0.5 * p.tol});
            stack.push_back({p.ax, mid, 0.0, 0.0, 0.5 * p.tol});
        } else {
            const double mx = 0.5 * (p.ax + p.bx);
            const double my = 0.5 * (p.ay + p.by);
            const double t = 0.25 * p.tol;
            stack.push_back({mx, p.bx, my, p.by, t});
            stack.push_back({p.ax, mx, my, p.by, t});
            stack.push_back({mx, p.bx, p.ay, my, t});
            stack.push_back({p.ax, mx, p.ay, my, t});
        }
    }
    return accum;
}

McEstimate expectation_mc(const Integrand& f, const SampleFn& draw, const McSpec& spec) {
    if (spec.n_samples < 2)
        throw ArgumentError("monte carlo: needs at least two samples for a stderr");

    Rng rng(spec.seed);
    std::vector<Vec> samples;
    samples.reserve(spec.n_samples);
    for (std::size_t i = 0; i < spec.n_samples; ++i) samples.push_back(draw(rng));

    std::vector<double> values(spec.n_samples);
    parallel_for(spec.n_samples, [&](std::size_t i) { values[i] = f(samples[i]); });

    for (std::size_t i = 0; i < spec.n_samples; ++i) {
        if (!std::isfinite(values[i])) {
            std::ostringstream msg;
            msg << "monte carlo: non-finite integrand value at sample " << i << " = (";
            for (std::size_t j = 0; j < samples[i].size(); ++j)
                msg << (j ? ", " : "") << samples[i][j];
            msg << ")";
            throw NumericError(msg.str());
        }
    }

    const double n = static_cast<double>(spec.n_samples);
    const double mean = pairwise_sum(values) / n;
    std::vector<double> sq(spec.n_samples);
    for (std::size_t i = 0; i < spec.n_samples; ++i) {
        const double dlt = values[i] - mean;
        sq[i] = dlt * dlt;
    }
    const double var = pairwise_sum(sq) / (n - 1.0);
    return McEstimate{mean, std::sqrt(var / n), spec.n_samples};
}

} // namespace bvi
