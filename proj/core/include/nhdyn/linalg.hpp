#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace nhdyn {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// Every numerical threshold used by the library, in one place.
struct Tolerances {
    double unitary = 1e-10;
    double triangular = 1e-10;
    double recon = 1e-10;
    double deflation = 1e-12;   // relative to ||H||_F
    int max_iter_factor = 30;   // QR sweeps allowed = factor * n^2
    double gap = 1e-8;          // relative to max |lambda|
    double swap_zero = 1e-12;   // relative to ||A||_F
    double gauge = 1e-6;
    double series = 1e-3;
    int series_terms = 4;
    int max_picard = 50;
    double picard_tol = 1e-10;
    double multiplier_cond = 1e8;
    double transition_weight = 0.9;
    double transition_window = 0.05;  // fraction of s_max
    double ratio = 1e-12;
    double step_bound = 0.1;    // T * ds * ||H|| per exact step
};

const Tolerances& default_tolerances();

// Override one field by name (e.g. "series", "max_picard"); throws on unknown names.
void set_tolerance(Tolerances& t, const std::string& name, double value);
std::vector<std::string> tolerance_names();

class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NonConvergence : public NumericalError {
public:
    NonConvergence(const std::string& what, double residual)
        : NumericalError(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

// Two eigenvalues too close for the ordered-Schur machinery (exceptional point vicinity).
class NearDegenerate : public NumericalError {
public:
    NearDegenerate(const std::string& what, int i, int j, double s = 0.0)
        : NumericalError(what), i_(i), j_(j), s_(s) {}
    int first() const { return i_; }
    int second() const { return j_; }
    double s() const { return s_; }

private:
    int i_, j_;
    double s_;
};

struct SchurDecomposition {
    CMatrix unitary;
    CMatrix triangular;
    std::vector<cplx> eigenvalues;
};

// H = U A U^dagger with A upper triangular. Hessenberg reduction followed by
// Wilkinson-shifted complex QR. `tol` bounds the post-check on the invariants.
SchurDecomposition schur_decompose(const CMatrix& H, double tol = 1e-10,
                                   const Tolerances& tols = default_tolerances());

double eig_residual(const CMatrix& H, cplx lambda, const CVector& v);

// Principal root: Re(w) >= 0, and Im(w) >= 0 when Re(w) == 0.
cplx complex_sqrt_principal(cplx z);

// ||U^dagger U - I||_F
double unitarity_error(const CMatrix& U);
// max_{i>j} |A_ij| / ||A||_F
double lower_triangle_ratio(const CMatrix& A);

}  // namespace nhdyn
