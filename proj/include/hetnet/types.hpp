#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hetnet {

enum class BsKind { macro, pico };

/// Per-band user/BS time-fraction matrices. Band n holds a row-major K x L
/// block; entry (n, k, l) is the share of band-n time user k gets from BS l.
class Association {
 public:
  Association() = default;
  Association(std::size_t bands, std::size_t users, std::size_t bs, double fill = 0.0)
      : bands_(bands), users_(users), bs_(bs), x_(bands * users * bs, fill) {}

  std::size_t bands() const { return bands_; }
  std::size_t users() const { return users_; }
  std::size_t bs() const { return bs_; }

  double& operator()(std::size_t n, std::size_t k, std::size_t l) {
    return x_[(n * users_ + k) * bs_ + l];
  }
  double operator()(std::size_t n, std::size_t k, std::size_t l) const {
    return x_[(n * users_ + k) * bs_ + l];
  }

  std::span<double> band(std::size_t n) {
    return {x_.data() + n * users_ * bs_, users_ * bs_};
  }
  std::span<const double> band(std::size_t n) const {
    return {x_.data() + n * users_ * bs_, users_ * bs_};
  }

  std::span<double> data() { return x_; }
  std::span<const double> data() const { return x_; }

  friend bool operator==(const Association&, const Association&) = default;

 private:
  std::size_t bands_ = 0, users_ = 0, bs_ = 0;
  std::vector<double> x_;
};

/// Transmit powers in watts, N x L row-major: row n holds band n across BSs,
/// column l is the per-band power vector of BS l.
class PowerMatrix {
 public:
  PowerMatrix() = default;
  PowerMatrix(std::size_t bands, std::size_t bs, double fill = 0.0)
      : bands_(bands), bs_(bs), p_(bands * bs, fill) {}

  std::size_t bands() const { return bands_; }
  std::size_t bs() const { return bs_; }

  double& operator()(std::size_t n, std::size_t l) { return p_[n * bs_ + l]; }
  double operator()(std::size_t n, std::size_t l) const { return p_[n * bs_ + l]; }

  std::span<double> band(std::size_t n) { return {p_.data() + n * bs_, bs_}; }
  std::span<const double> band(std::size_t n) const { return {p_.data() + n * bs_, bs_}; }

  std::vector<double> column(std::size_t l) const {
    std::vector<double> c(bands_);
    for (std::size_t n = 0; n < bands_; ++n) c[n] = (*this)(n, l);
    return c;
  }
  void set_column(std::size_t l, std::span<const double> c) {
    for (std::size_t n = 0; n < bands_; ++n) (*this)(n, l) = c[n];
  }

  std::span<double> data() { return p_; }
  std::span<const double> data() const { return p_; }

  friend bool operator==(const PowerMatrix&, const PowerMatrix&) = default;

 private:
  std::size_t bands_ = 0, bs_ = 0;
  std::vector<double> p_;
};

/// Nonpositive multipliers of the row (y, length K) and column (z, length L)
/// constraints of one band's projection problem.
struct DualPoint {
  std::vector<double> y;
  std::vector<double> z;
};

}  // namespace hetnet
