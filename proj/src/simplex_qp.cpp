#include "boostvi/simplex_qp.hpp"

#include <algorithm>
#include <cmath>

#include "boostvi/errors.hpp"

namespace bvi {

Vec project_to_simplex(std::span<const double> v) {
    const std::size_t n = v.size();
    if (n == 0) throw ArgumentError("simplex projection: empty vector");
    Vec u(v.begin(), v.end());
    std::sort(u.begin(), u.end(), std::greater<double>());
    double css = 0.0, tau = 0.0;
    std::size_t rho = 0;
    double cum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cum += u[i];
        const double t = (cum - 1.0) / static_cast<double>(i + 1);
        if (u[i] - t > 0.0) {
            rho = i + 1;
            css = cum;
        }
    }
    tau = (css - 1.0) / static_cast<double>(rho);
    Vec out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = std::max(v[i] - tau, 0.0);
    return out;
}

namespace {

double kkt_residual(const Eigen::VectorXd& grad, const Eigen::VectorXd& w) {
    // stationarity: active coordinates share the minimal gradient value
    const double mu = grad.minCoeff();
    double resid = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i)
        if (w[i] > 1e-12) resid = std::max(resid, grad[i] - mu);
    const double scale = std::max(1.0, grad.cwiseAbs().maxCoeff());
    return resid / scale;
}

} // namespace

QpSolution solve_simplex_qp(const SimplexQpProblem& problem, double tol, std::size_t max_iter) {
    const Eigen::Index n = problem.gram.rows();
    if (n == 0 || problem.gram.cols() != n || problem.linear.size() != n)
        throw ArgumentError("simplex qp: inconsistent problem dimensions");
    if (n == 1) return QpSolution{{1.0}, true, 0.0, 0};

    // symmetrize and clip to PSD
    Eigen::MatrixXd g = 0.5 * (problem.gram + problem.gram.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g);
    Eigen::VectorXd evals = eig.eigenvalues();
    double lmax = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (evals[i] < 0.0) evals[i] = 0.0;
        lmax = std::max(lmax, evals[i]);
    }
    g = eig.eigenvectors() * evals.asDiagonal() * eig.eigenvectors().transpose();

    const auto objective = [&](const Eigen::VectorXd& w) {
        return w.dot(g * w) - 2.0 * problem.linear.dot(w) + problem.constant;
    };
    const auto gradient = [&](const Eigen::VectorXd& w) -> Eigen::VectorXd {
        return 2.0 * (g * w - problem.linear);
    };
    const auto proj = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
        const Vec p = project_to_simplex(std::span<const double>(v.data(), v.size()));
        return Eigen::Map<const Eigen::VectorXd>(p.data(), p.size());
    };

    const double lips = std::max(2.0 * lmax, 1e-30);
    const double step = 1.0 / lips;

    Eigen::VectorXd w = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    Eigen::VectorXd y = w;
    double theta = 1.0;
    double f_prev = objective(w);

    QpSolution out;
    for (std::size_t it = 0; it < max_iter; ++it) {
        const Eigen::VectorXd w_next = proj(y - step * gradient(y));
        const double f_next = objective(w_next);
        if (f_next > f_prev) {
            // restart the momentum from the last monotone point
            y = w;
            theta = 1.0;
            const Eigen::VectorXd w_re = proj(y - step * gradient(y));
            const double f_re = objective(w_re);
            w = w_re;
            f_prev = f_re;
        } else {
            const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
            const Eigen::VectorXd w_old = w;
            w = w_next;
            y = w + ((theta - 1.0) / theta_next) * (w - w_old);
            theta = theta_next;
            f_prev = f_next;
        }
        const double resid = kkt_residual(gradient(w), w);
        if (resid <= tol) {
            out.weights.assign(w.data(), w.data() + n);
            out.converged = true;
            out.kkt_residual = resid;
            out.iterations = it + 1;
            return out;
        }
    }
    out.weights.assign(w.data(), w.data() + n);
    out.converged = false;
    out.kkt_residual = kkt_residual(gradient(w), w);
    out.iterations = max_iter;
    return out;
}

} // namespace bvi
