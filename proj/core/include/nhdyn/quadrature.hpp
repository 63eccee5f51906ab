#pragma once

#include <complex>
#include <vector>

namespace nhdyn {

// Cumulative integral on a uniform grid, out[0] = 0. Composite Simpson on even indices;
// odd indices close with a 3/8 panel (index 1 uses the quadratic through points 0..2).
template <class T>
std::vector<T> cumulative_simpson(const std::vector<T>& f, double h);

// Central differences inside, second-order one-sided at the ends.
template <class T>
std::vector<T> derivative(const std::vector<T>& f, double h);

extern template std::vector<double> cumulative_simpson(const std::vector<double>&, double);
extern template std::vector<std::complex<double>> cumulative_simpson(
    const std::vector<std::complex<double>>&, double);
extern template std::vector<std::complex<long double>> cumulative_simpson(
    const std::vector<std::complex<long double>>&, double);
extern template std::vector<double> derivative(const std::vector<double>&, double);
extern template std::vector<std::complex<double>> derivative(const std::vector<std::complex<double>>&,
                                                             double);

}  // namespace nhdyn
