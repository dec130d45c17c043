#pragma once

// Binary C-SVC with an RBF kernel, trained by a simplified SMO.
//
// Labels are +1 (attack, the positive class) and -1 (legit). Features are
// standardized by a Scaler fitted on the training rows; support vectors are
// stored already scaled.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rapidlearn/error.hpp"

namespace rapidlearn {

struct Sample {
  std::vector<double> x;
  int y = -1;
};

struct Dataset {
  std::vector<Sample> rows;

  std::size_t size() const { return rows.size(); }
  bool empty() const { return rows.empty(); }
  std::size_t dims() const { return rows.empty() ? 0 : rows.front().x.size(); }
};

class Scaler {
 public:
  Scaler() = default;
  Scaler(std::vector<double> mean, std::vector<double> stdev);

  // Population mean / stdev per feature; a constant feature gets stdev 1.
  static Scaler fit(const Dataset& data);

  std::size_t dims() const { return mean_.size(); }
  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& stdev() const { return stdev_; }

  std::vector<double> transform(std::span<const double> x) const;
  std::vector<double> inverse_transform(std::span<const double> z) const;

  bool operator==(const Scaler&) const = default;

 private:
  std::vector<double> mean_;
  std::vector<double> stdev_;
};

struct SvcModel {
  double gamma = 0.5;
  double C = 10.0;
  double bias = 0.0;
  std::vector<std::vector<double>> support_vectors;  // scaled
  std::vector<double> coeffs;                        // alpha_i * y_i
  Scaler scaler;

  std::size_t dims() const { return scaler.dims(); }
};

struct FitOptions {
  double C = 10.0;
  double gamma = 0.5;
  double tol = 1e-3;
  int max_passes = 20;
  std::uint64_t seed = 0;
};

// exp(-gamma * |x - y|^2)
double kernel_rbf(std::span<const double> x, std::span<const double> y, double gamma);

SvcModel fit(const Dataset& train, const FitOptions& options = {});

// Decision value for an unscaled feature vector.
double decision_value(const SvcModel& model, std::span<const double> x);

// Exactly zero is legit.
inline bool predict_attack(const SvcModel& model, std::span<const double> x) { return decision_value(model, x) > 0.0; }

struct EvalReport {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + fp + tn + fn; }
  std::optional<double> precision() const;
  std::optional<double> recall() const;
  std::optional<double> accuracy() const;
};

EvalReport evaluate(const SvcModel& model, const Dataset& test);

void write_model(std::ostream& out, const SvcModel& model);
SvcModel read_model(std::istream& in, const std::string& source = "<stream>");
void save_model(const SvcModel& model, const std::filesystem::path& path);
SvcModel load_model(const std::filesystem::path& path);

}  // namespace rapidlearn
