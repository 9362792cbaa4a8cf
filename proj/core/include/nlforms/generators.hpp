#pragma once

#include <Eigen/Dense>

#include "nlforms/forms.hpp"

namespace nlforms {

/// Finite-state generator in the e^{-At} sign convention: diagonal entries
/// are the (nonnegative) jump rates, off-diagonals are -2 K(x,y) mu(y), rows
/// sum to zero, and A is symmetric in the mu-weighted inner product.
struct GeneratorMatrix {
    Eigen::MatrixXd a;
    DiscreteStateSpace space;
};

/// Generator realizing the pairing (A u, v)_mu == discrete_form_exact(u, v):
/// (A u)(x) = 2 sum_{y != x} K(x, y) mu(y) (u(x) - u(y)).
GeneratorMatrix build_generator(const DiscreteStateSpace& space, const FormConfig& cfg);

/// mu-weighted inner product sum_x mu(x) a(x) b(x).
double weighted_inner(const DiscreteStateSpace& space, const Eigen::VectorXd& a,
                      const Eigen::VectorXd& b);

/// M_t = exp(-A t) through the symmetric eigendecomposition of
/// D^(1/2) A D^(-1/2) (D = diag mu); unconditionally stable, rows sum to 1.
Eigen::MatrixXd semigroup(const GeneratorMatrix& gen, double t);

/// max_y |(mu M)(y) - mu(y)|. Throws if M is not row-stochastic within 1e-9.
double check_invariance(const Eigen::VectorXd& mu, const Eigen::MatrixXd& m);

/// Two-state reference model on {+1/2, -1/2} with mu = (p, 1-p):
/// A = 2 [[1-p, p-1], [-p, p]] and the closed-form semigroup
/// M_t = [[p, 1-p], [p, 1-p]] + e^(-2t) [[1-p, p-1], [-p, p]].
struct ToyModel {
    Eigen::Matrix2d a;
    Eigen::Matrix2d mt_closed;
    Eigen::Matrix2d mt_numeric;
};
ToyModel toy_model(double p, double t);

/// Metropolis answer to "find a Markovian M with mu M = mu":
/// M(x,y) = proposal(x,y) min(1, mu(y)/mu(x)) off the diagonal, remainder on
/// the diagonal. Exactly mu-reversible, hence mu-invariant. The proposal
/// must be symmetric and row-stochastic.
Eigen::MatrixXd metropolis_quantize(const Eigen::VectorXd& mu, const Eigen::MatrixXd& proposal);

}  // namespace nlforms
