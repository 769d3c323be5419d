#pragma once

#include <Eigen/Dense>

#include "boostvi/support_box.hpp"

namespace bvi {

/// Exact Euclidean projection onto the probability simplex (sort-based).
Vec project_to_simplex(std::span<const double> v);

/// minimize  w' G w - 2 c' w + constant   over the simplex.
/// G holds the L2 inner products of the active atoms; it is symmetrized and
/// eigenvalue-clipped to PSD (estimation noise can leave eigenvalues
/// slightly negative, down to about -1e-9).
struct SimplexQpProblem {
    Eigen::MatrixXd gram;
    Eigen::VectorXd linear;
    double constant = 0.0;
};

struct QpSolution {
    Vec weights;
    bool converged = false;
    double kkt_residual = 0.0;
    std::size_t iterations = 0;
};

/// Accelerated projected gradient with function restarts. Deterministic.
/// `tol` bounds the relative KKT residual; on budget exhaustion the best
/// iterate is returned flagged non-converged.
QpSolution solve_simplex_qp(const SimplexQpProblem& problem, double tol = 1e-10,
                            std::size_t max_iter = 20000);

} // namespace bvi
