// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace qfl {

// Dense statevector over n qubits. Little-endian indexing: bit j of a basis
// index is the state of qubit j.
class Statevector {
 public:
  using Complex = std::complex<double>;

  explicit Statevector(int num_qubits) : n_(num_qubits) {
    if (num_qubits < 1 || num_qubits > 28)
      throw std::invalid_argument("Statevector: qubit count out of range");
    amp_.assign(std::size_t{1} << n_, Complex{0.0, 0.0});
    amp_[0] = Complex{1.0, 0.0};
  }

  int num_qubits() const { return n_; }
  std::size_t dim() const { return amp_.size(); }
  const std::vector<Complex>& amplitudes() const { return amp_; }

  void reset() {
    std::fill(amp_.begin(), amp_.end(), Complex{0.0, 0.0});
    amp_[0] = Complex{1.0, 0.0};
  }

  void apply_ry(int q, double theta) {
    apply_ry_cs(q, std::cos(0.5 * theta), std::sin(0.5 * theta));
  }

  void apply_ry_cs(int q, double c, double s) {
    const std::size_t step = std::size_t{1} << q;
    for (std::size_t hi = 0; hi < amp_.size(); hi += 2 * step) {
      for (std::size_t lo = hi; lo < hi + step; ++lo) {
        const Complex a0 = amp_[lo];
        const Complex a1 = amp_[lo + step];
        amp_[lo] = c * a0 - s * a1;
        amp_[lo + step] = s * a0 + c * a1;
      }
    }
  }

  void apply_rz(int q, double theta) {
    apply_rz_phases(q, std::polar(1.0, -0.5 * theta), std::polar(1.0, +0.5 * theta));
  }

  void apply_rz_phases(int q, Complex e0, Complex e1) {
    const std::size_t step = std::size_t{1} << q;
    for (std::size_t hi = 0; hi < amp_.size(); hi += 2 * step) {
      for (std::size_t lo = hi; lo < hi + step; ++lo) {
        amp_[lo] *= e0;
        amp_[lo + step] *= e1;
      }
    }
  }

  void apply_cx(int control, int target) {
    const std::size_t cbit = std::size_t{1} << control;
    const std::size_t tbit = std::size_t{1} << target;
    for (std::size_t i = 0; i < amp_.size(); ++i) {
      if ((i & cbit) && !(i & tbit)) std::swap(amp_[i], amp_[i | tbit]);
    }
  }

  void apply_x(int q) {
    const std::size_t step = std::size_t{1} << q;
    for (std::size_t hi = 0; hi < amp_.size(); hi += 2 * step) {
      for (std::size_t lo = hi; lo < hi + step; ++lo) std::swap(amp_[lo], amp_[lo + step]);
    }
  }

  void apply_y(int q) {
    const Complex i{0.0, 1.0};
    const std::size_t step = std::size_t{1} << q;
    for (std::size_t hi = 0; hi < amp_.size(); hi += 2 * step) {
      for (std::size_t lo = hi; lo < hi + step; ++lo) {
        const Complex a0 = amp_[lo];
        const Complex a1 = amp_[lo + step];
        amp_[lo] = -i * a1;
        amp_[lo + step] = i * a0;
      }
    }
  }

  void apply_z(int q) {
    const std::size_t step = std::size_t{1} << q;
    for (std::size_t hi = 0; hi < amp_.size(); hi += 2 * step) {
      for (std::size_t lo = hi; lo < hi + step; ++lo) amp_[lo + step] = -amp_[lo + step];
    }
  }

  double norm_sq() const {
    double s = 0.0;
    for (const auto& a : amp_) s += std::norm(a);
    return s;
  }

  std::vector<double> probabilities() const {
    std::vector<double> p(amp_.size());
    for (std::size_t i = 0; i < amp_.size(); ++i) p[i] = std::norm(amp_[i]);
    return p;
  }

  // Samples a basis index by CDF inversion of |amp|^2 at quantile u in [0,1).
  std::size_t sample(double u) const {
    double cum = 0.0;
    for (std::size_t i = 0; i + 1 < amp_.size(); ++i) {
      cum += std::norm(amp_[i]);
      if (u < cum) return i;
    }
    return amp_.size() - 1;
  }

 private:
  int n_;
  std::vector<Complex> amp_;
};

}  // namespace qfl
