#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <vector>

namespace surfchaos {

using cplx = std::complex<double>;

// Node-major table of Fourier coefficients k = -M..M on a 1-D grid.
class ModeTable {
public:
    ModeTable() = default;
    ModeTable(std::size_t nodes, int modes) : n_(nodes), M_(modes), data_(nodes * (2 * modes + 1)) {}

    std::size_t nodes() const { return n_; }
    int modes() const { return M_; }
    int width() const { return 2 * M_ + 1; }

    cplx& at(std::size_t j, int k) { return data_[j * width() + (k + M_)]; }
    const cplx& at(std::size_t j, int k) const { return data_[j * width() + (k + M_)]; }
    cplx* row(std::size_t j) { return data_.data() + j * width(); }
    const cplx* row(std::size_t j) const { return data_.data() + j * width(); }

    void fill(cplx v) { std::fill(data_.begin(), data_.end(), v); }

private:
    std::size_t n_ = 0;
    int M_ = 0;
    std::vector<cplx> data_;
};

// out_k = sum_j a_j b_{k-j}, truncated to |k| <= M (arrays indexed k + M).
void convolve(const cplx* a, const cplx* b, int M, cplx* out);

// sum_k c_k e^{ik theta} for a row of 2M+1 coefficients.
cplx fourier_eval(const cplx* c, int M, double theta);
cplx fourier_eval(const cplx* c, int M, cplx theta);

// Solves phi' + i omega phi = F on x_j = x_0 + j h with phi(x_0) given. The source is
// interpolated by 6-point Lagrange stencils and the Duhamel integral of each cell is exact
// for that interpolant.
class ExpIntegrator {
public:
    ExpIntegrator(double h, double omega);

    // F and phi are strided views (stride in elements).
    void solve(const cplx* F, std::size_t stride, std::size_t n, cplx phi0, cplx* phi) const;

    double step() const { return h_; }
    double omega() const { return omega_; }

private:
    double h_;
    double omega_;
    cplx decay_;                                // e^{-i omega h}
    std::array<std::array<cplx, 6>, 5> weights_{};  // stencil starting at offset -s, s = 0..4
};

// Sixth-order Lagrange interpolation weights on a uniform grid; returns the first node index.
std::size_t lagrange6(double x, double x0, double h, std::size_t n, std::array<double, 6>& w);

// Least-squares trigonometric fit of real samples at arbitrary angles; returns 2M+1
// coefficients (k = -M..M). Exact interpolation when samples = 2M+1.
std::vector<cplx> trig_fit(const std::vector<double>& theta, const std::vector<double>& values, int M);

}  // namespace surfchaos
