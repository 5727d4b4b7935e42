#pragma once

#include "convgru.hpp"
#include "resnet.hpp"

#include "../core/types.hpp"

#include <complex>
#include <random>
#include <variant>

namespace pfr::net {

enum class Strategy
{
  recurrent,
  weight_shared,
  cascaded
};

std::string to_string(Strategy s);
Strategy parse_strategy(std::string const &s);

struct NetworkConfig
{
  Strategy strategy = Strategy::recurrent;
  int iterations = 5; // K
  int depth = 10;     // G: ConvGRU cells, or residual blocks
  int features = 32;  // F
  Aggregation aggregation = Aggregation::max;
  double lambda = 0.0;

  /// The published recurrent configuration (K = 5, G = 10, F = 32).
  static NetworkConfig drpf(Aggregation a = Aggregation::max);
  /// The ResNet baselines (G = 6, F = 64, max aggregation).
  static NetworkConfig resnet(Strategy s);
};

/// Exact number of scalar trainable parameters for a configuration.
Index count_params(NetworkConfig const &cfg);

/// PF measurements of a repetition set converted to the network precision.
template <typename T>
struct Measurements
{
  Shape shape;
  Index acquired = 0;
  std::vector<std::vector<std::complex<T>>> samples; // per repetition, row-major

  static Measurements from(KSpaceSet const &set);
  Index batch() const { return static_cast<Index>(samples.size()); }
};

/// Unrolled proximal splitting: x_0 = A* y, then K times
///   z_k = R(x_{k-1}),   x_k = DC(z_k, y, lambda).
/// Images travel as 2-channel (real, imaginary) feature maps.
template <typename T>
class UnrolledNetwork
{
public:
  explicit UnrolledNetwork(NetworkConfig cfg);

  NetworkConfig const &config() const { return cfg_; }

  /// Returns x_K for every repetition. With `record` the activations are kept
  /// for a following backward(). `pre_dc`, when given, receives z_k per
  /// iteration ([k-1][rep]).
  std::vector<Mat<T>> forward(Measurements<T> const &y, bool record = false,
                              std::vector<std::vector<Mat<T>>> *pre_dc = nullptr);

  /// Accumulates parameter gradients given dL/dx_K per repetition.
  void backward(std::vector<Mat<T>> const &dout);

  /// Double-precision convenience wrapper returning complex images.
  ImageSet reconstruct(KSpaceSet const &y);

  ParamList<T> parameters();
  ConstParamList<T> parameters() const;
  Index parameter_count() const;

  /// Which piece of the piecewise-smooth network the last recorded forward
  /// ran on (ReLU signs, max-pool winners). Two evaluations with equal
  /// patterns lie on the same smooth piece.
  std::vector<std::int32_t> activation_pattern() const;
  /// Evaluates later forwards on the piece given by `pattern` (the smooth
  /// extension of that piece); an empty pattern restores normal evaluation.
  /// Used for finite-difference checks across ReLU and max kinks.
  void freeze_activation_pattern(std::vector<std::int32_t> pattern);
  void zero_grad();

  /// He-normal kernels (std = sqrt(2 / fan_in)), zero biases.
  void initialize_he(std::mt19937_64 &rng);
  void set_zero();

  /// Copies parameter values between networks of other precision or layout by
  /// name. Throws if a name is missing or shapes differ.
  template <typename U>
  void load_values(ConstParamList<U> const &src);

  using Regularizer = std::variant<RecurrentRegularizer<T>, ResNetRegularizer<T>>;
  Regularizer &regularizer() { return reg_; }
  Regularizer const &regularizer() const { return reg_; }

private:
  NetworkConfig cfg_;
  Regularizer reg_;
  Measurements<T> const *y_ = nullptr;
  std::vector<std::int32_t> frozen_;
  int recorded_ = 0;
};

/// Applies the data-consistency step to a 2-channel image in place.
template <typename T>
void data_consistency_step(Mat<T> &img, std::vector<std::complex<T>> const &y, Shape s, Index acquired, double lambda);
/// Adjoint (equal to itself) of the data-consistency step's linear part.
template <typename T>
void data_consistency_adjoint(Mat<T> &grad, Shape s, Index acquired, double lambda);

template <typename T>
Mat<T> to_channels(CGrid const &img);
template <typename T>
CGrid from_channels(Mat<T> const &img, Shape s);

} // namespace pfr::net
