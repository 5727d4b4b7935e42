#pragma once

#include "../dataset.hpp"
#include "../net/unrolled.hpp"
#include "loss.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <string>

namespace pfr {

struct TrainConfig
{
  PfFactor pff{5, 8};
  net::NetworkConfig network = net::NetworkConfig::drpf();
  int epochs = 200;
  double learning_rate = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double loss_perceptual_weight = 0.5;
  double repetition_fraction = 1.0 / 3.0;
  double flip_probability = 0.5;
  std::uint64_t seed = 1;
  // Slices at the end of the training set held out for model selection when
  // no separate validation set is passed.
  int validation_slices = 0;
  // Optional warm start, e.g. a one-iteration base for the two-stage schedule.
  std::string init_checkpoint;

  void validate() const;
  static TrainConfig from_json(nlohmann::json const &j);
  nlohmann::json to_json() const;
  static TrainConfig load(std::filesystem::path const &path);
};

struct LogRecord
{
  int epoch = 0;
  long step = 0;
  double l1 = 0;
  double perceptual = 0;
  double total = 0;
  double val_psnr = 0; // NaN when no validation set exists
};

std::string to_json_line(LogRecord const &r);

struct TrainResult
{
  net::UnrolledNetwork<float> network;
  std::vector<LogRecord> log;
  double best_val_psnr = 0;
  int best_epoch = 0;
};

using LogSink = std::function<void(LogRecord const &)>;

/// Supervised training on image-domain ground truth. Every step takes one
/// slice: repetition subset, normalization, readout flip, PF sampling, forward,
/// magnitude-average loss, backward, Adam update. One record per epoch holds
/// the epoch's mean training losses and the validation PSNR. The returned
/// network is the epoch with the best validation PSNR (the last one without a
/// validation set).
TrainResult train(Dataset const &data, TrainConfig const &cfg, Dataset const *validation = nullptr,
                  net::UnrolledNetwork<float> const *init = nullptr, LogSink const &sink = {});

/// Mean PSNR of the magnitude averages of every validation slice, each slice
/// normalized and PF-sampled with all its repetitions.
double validation_psnr(net::UnrolledNetwork<float> &net, Dataset const &data, PfFactor pff);

/// Normalized, PF-sampled version of one ground-truth slice.
struct PreparedSlice
{
  ImageSet truth;
  KSpaceSet measured;
};
PreparedSlice prepare_slice(ImageSet const &reps, PfFactor pff);

/// Copies a one-iteration base regularizer into every iteration of `target`
/// (weight-shared or cascaded ResNet, or the recurrent stack).
void replicate_base(net::UnrolledNetwork<float> const &base, net::UnrolledNetwork<float> &target);

} // namespace pfr
