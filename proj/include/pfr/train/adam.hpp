#pragma once

#include "../net/tensor.hpp"

#include <cmath>
#include <vector>

namespace pfr {

/// Adam with bias correction. Moment buffers are allocated lazily on the
/// first step and follow the parameter list order.
template <typename T>
class Adam
{
public:
  explicit Adam(double lr = 5e-4, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps)
  {
  }

  void set_learning_rate(double lr) { lr_ = lr; }
  double learning_rate() const { return lr_; }
  long steps() const { return t_; }

  void step(net::ParamList<T> const &params)
  {
    if (m_.empty()) {
      for (auto const *p : params) {
        m_.push_back(net::Mat<double>::Zero(p->value.rows(), p->value.cols()));
        v_.push_back(net::Mat<double>::Zero(p->value.rows(), p->value.cols()));
      }
    }
    ++t_;
    // lr = 0 must leave parameters bit-identical.
    if (lr_ == 0.0) { return; }
    double const c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    double const c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto &p = *params[i];
      auto &m = m_[i];
      auto &v = v_[i];
      for (Eigen::Index j = 0; j < p.value.size(); ++j) {
        double const g = static_cast<double>(p.grad.data()[j]);
        m.data()[j] = beta1_ * m.data()[j] + (1.0 - beta1_) * g;
        v.data()[j] = beta2_ * v.data()[j] + (1.0 - beta2_) * g * g;
        double const mh = m.data()[j] / c1;
        double const vh = v.data()[j] / c2;
        p.value.data()[j] = static_cast<T>(static_cast<double>(p.value.data()[j]) - lr_ * mh / (std::sqrt(vh) + eps_));
      }
    }
  }

private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<net::Mat<double>> m_, v_;
};

} // namespace pfr
