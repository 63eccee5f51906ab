#include "nhdyn/quadrature.hpp"

#include "nhdyn/linalg.hpp"

#include <type_traits>

namespace nhdyn {

template <class T>
std::vector<T> cumulative_simpson(const std::vector<T>& f, double hd) {
    using R = std::conditional_t<std::is_same_v<T, std::complex<long double>>, long double, double>;
    const R h = static_cast<R>(hd);
    const std::size_t n = f.size();
    std::vector<T> out(n, T{});
    if (n < 2) return out;
    if (n == 2) {
        out[1] = h * (f[0] + f[1]) / R(2);
        return out;
    }
    out[1] = h * (R(5) * f[0] + R(8) * f[1] - f[2]) / R(12);
    T even{};  // Simpson sum up to the latest even index
    for (std::size_t k = 2; k < n; ++k) {
        if (k % 2 == 0) {
            even += h * (f[k - 2] + R(4) * f[k - 1] + f[k]) / R(3);
            out[k] = even;
        } else {
            // Simpson up to k-3, then 3/8 rule on [k-3, k]
            const T base = (k >= 3) ? out[k - 3] : T{};
            out[k] = base + R(3) * h * (f[k - 3] + R(3) * f[k - 2] + R(3) * f[k - 1] + f[k]) / R(8);
        }
    }
    return out;
}

template <class T>
std::vector<T> derivative(const std::vector<T>& f, double h) {
    const std::size_t n = f.size();
    if (n < 3) throw ValidationError("derivative: need at least 3 samples");
    std::vector<T> d(n);
    for (std::size_t k = 1; k + 1 < n; ++k) d[k] = (f[k + 1] - f[k - 1]) / (2.0 * h);
    // difference form keeps constants exact
    d[0] = (4.0 * (f[1] - f[0]) - (f[2] - f[0])) / (2.0 * h);
    d[n - 1] = (3.0 * (f[n - 1] - f[n - 2]) - (f[n - 2] - f[n - 3])) / (2.0 * h);
    return d;
}

template std::vector<double> cumulative_simpson(const std::vector<double>&, double);
template std::vector<std::complex<double>> cumulative_simpson(const std::vector<std::complex<double>>&,
                                                              double);
template std::vector<std::complex<long double>> cumulative_simpson(
    const std::vector<std::complex<long double>>&, double);
template std::vector<double> derivative(const std::vector<double>&, double);
template std::vector<std::complex<double>> derivative(const std::vector<std::complex<double>>&, double);

}  // namespace nhdyn
