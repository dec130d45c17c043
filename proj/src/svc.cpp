#include "rapidlearn/svc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "rapidlearn/error.hpp"
#include "rapidlearn/text.hpp"

namespace rapidlearn {

// ---------------------------------------------------------------------------
// Scaler

Scaler::Scaler(std::vector<double> mean, std::vector<double> stdev) : mean_(std::move(mean)), stdev_(std::move(stdev)) {
  if (mean_.size() != stdev_.size()) throw Error(ErrorCode::DimensionMismatch, "scaler mean/stdev lengths differ");
}

Scaler Scaler::fit(const Dataset& data) {
  const std::size_t d = data.dims();
  std::vector<double> mean(d, 0.0), stdev(d, 0.0);
  if (data.empty()) return Scaler(mean, std::vector<double>(d, 1.0));
  const double n = static_cast<double>(data.size());
  for (const auto& row : data.rows)
    for (std::size_t k = 0; k < d; ++k) mean[k] += row.x[k];
  for (auto& m : mean) m /= n;
  for (const auto& row : data.rows)
    for (std::size_t k = 0; k < d; ++k) stdev[k] += (row.x[k] - mean[k]) * (row.x[k] - mean[k]);
  for (auto& s : stdev) {
    s = std::sqrt(s / n);
    if (!(s > 0.0)) s = 1.0;
  }
  return Scaler(std::move(mean), std::move(stdev));
}

std::vector<double> Scaler::transform(std::span<const double> x) const {
  if (x.size() != mean_.size())
    throw Error(ErrorCode::DimensionMismatch,
                "expected " + std::to_string(mean_.size()) + " features, got " + std::to_string(x.size()));
  std::vector<double> z(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) z[k] = (x[k] - mean_[k]) / stdev_[k];
  return z;
}

std::vector<double> Scaler::inverse_transform(std::span<const double> z) const {
  if (z.size() != mean_.size()) throw Error(ErrorCode::DimensionMismatch, "inverse_transform dimension");
  std::vector<double> x(z.size());
  for (std::size_t k = 0; k < z.size(); ++k) x[k] = z[k] * stdev_[k] + mean_[k];
  return x;
}

// ---------------------------------------------------------------------------
// Kernel and decision function

double kernel_rbf(std::span<const double> x, std::span<const double> y, double gamma) {
  if (x.size() != y.size())
    throw Error(ErrorCode::DimensionMismatch,
                "kernel arguments have " + std::to_string(x.size()) + " and " + std::to_string(y.size()) + " features");
  double sq = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    double diff = x[k] - y[k];
    sq += diff * diff;
  }
  double v = std::exp(-gamma * sq);
  return v > 0.0 ? v : std::numeric_limits<double>::denorm_min();
}

double decision_value(const SvcModel& model, std::span<const double> x) {
  auto z = model.scaler.transform(x);
  double sum = model.bias;
  for (std::size_t i = 0; i < model.support_vectors.size(); ++i)
    sum += model.coeffs[i] * kernel_rbf(model.support_vectors[i], z, model.gamma);
  return sum;
}

// ---------------------------------------------------------------------------
// Training

namespace {

void validate_training_set(const Dataset& data) {
  if (data.empty()) throw Error(ErrorCode::DegenerateDataset, "empty training set");
  const std::size_t d = data.dims();
  if (d == 0) throw Error(ErrorCode::DimensionMismatch, "rows have no features");
  bool pos = false, neg = false;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& row = data.rows[i];
    if (row.x.size() != d)
      throw Error(ErrorCode::DimensionMismatch, "row " + std::to_string(i) + " has " + std::to_string(row.x.size()) +
                                                    " features, expected " + std::to_string(d));
    for (double v : row.x)
      if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteFeature, "row " + std::to_string(i));
    if (row.y == 1) pos = true;
    else if (row.y == -1) neg = true;
    else throw Error(ErrorCode::DegenerateDataset, "row " + std::to_string(i) + " label must be +1 or -1");
  }
  if (!pos || !neg) throw Error(ErrorCode::DegenerateDataset, "training set needs both classes");
}

class SmoSolver {
 public:
  SmoSolver(std::vector<std::vector<double>> x, std::vector<int> y, const FitOptions& opt)
      : x_(std::move(x)), y_(std::move(y)), opt_(opt), n_(x_.size()), alpha_(n_, 0.0), f_(n_, 0.0), rng_(opt.seed) {}

  void solve() {
    const std::size_t max_sweeps = 20000;
    int clean_passes = 0;
    for (std::size_t sweep = 0; sweep < max_sweeps && clean_passes < opt_.max_passes; ++sweep) {
      std::size_t changed = 0;
      for (std::size_t i = 0; i < n_; ++i) {
        if (!violates_kkt(i)) continue;
        // Random first candidate, then the rest in index order from there.
        std::size_t start = static_cast<std::size_t>(rng_() % n_);
        for (std::size_t k = 0; k < n_; ++k) {
          std::size_t j = (start + k) % n_;
          if (take_step(i, j)) {
            ++changed;
            break;
          }
        }
      }
      clean_passes = changed == 0 ? clean_passes + 1 : 0;
    }
  }

  const std::vector<double>& alpha() const { return alpha_; }

  // Bias from the KKT conditions: mean over free vectors, else the
  // midpoint of the feasible interval.
  double final_bias() const {
    const double eps = 1e-8 * opt_.C;
    double sum = 0.0;
    std::size_t free_count = 0;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n_; ++i) {
      double g = f_[i] - b_;  // sum_j alpha_j y_j K_ij
      double target = y_[i] - g;
      if (alpha_[i] > eps && alpha_[i] < opt_.C - eps) {
        sum += target;
        ++free_count;
      } else if ((alpha_[i] <= eps) == (y_[i] > 0)) {
        lo = std::max(lo, target);  // y f >= 1 at alpha=0 (y=+1), or y f <= 1 at alpha=C (y=-1)
      } else {
        hi = std::min(hi, target);
      }
    }
    if (free_count > 0) return sum / static_cast<double>(free_count);
    if (std::isfinite(lo) && std::isfinite(hi)) return 0.5 * (lo + hi);
    return std::isfinite(lo) ? lo : (std::isfinite(hi) ? hi : 0.0);
  }

 private:
  double kernel(std::size_t i, std::size_t j) const { return kernel_rbf(x_[i], x_[j], opt_.gamma); }

  bool violates_kkt(std::size_t i) const {
    double r = y_[i] * (f_[i] - y_[i]);
    return (r < -opt_.tol && alpha_[i] < opt_.C) || (r > opt_.tol && alpha_[i] > 0.0);
  }

  bool take_step(std::size_t i, std::size_t j) {
    if (i == j) return false;
    const double C = opt_.C;
    const double ai = alpha_[i], aj = alpha_[j];
    const double yi = y_[i], yj = y_[j];
    const double ei = f_[i] - yi, ej = f_[j] - yj;
    double lo, hi;
    if (y_[i] != y_[j]) {
      lo = std::max(0.0, aj - ai);
      hi = std::min(C, C + aj - ai);
    } else {
      lo = std::max(0.0, ai + aj - C);
      hi = std::min(C, ai + aj);
    }
    if (hi - lo < 1e-12) return false;
    const double kii = 1.0, kjj = 1.0;  // RBF self-similarity
    const double kij = kernel(i, j);
    const double eta = 2.0 * kij - kii - kjj;
    if (eta >= -1e-12) return false;
    double aj_new = std::clamp(aj - yj * (ei - ej) / eta, lo, hi);
    if (std::abs(aj_new - aj) < 1e-12 * (1.0 + aj + aj_new)) return false;
    double ai_new = std::clamp(ai + yi * yj * (aj - aj_new), 0.0, C);

    const double dai = ai_new - ai, daj = aj_new - aj;
    double b1 = b_ - ei - yi * dai * kii - yj * daj * kij;
    double b2 = b_ - ej - yi * dai * kij - yj * daj * kjj;
    double b_new;
    if (ai_new > 0.0 && ai_new < C) b_new = b1;
    else if (aj_new > 0.0 && aj_new < C) b_new = b2;
    else b_new = 0.5 * (b1 + b2);

    const double db = b_new - b_;
    for (std::size_t k = 0; k < n_; ++k) {
      double delta = db;
      if (dai != 0.0) delta += yi * dai * (k == i ? kii : kernel(i, k));
      if (daj != 0.0) delta += yj * daj * (k == j ? kjj : kernel(j, k));
      f_[k] += delta;
    }
    alpha_[i] = ai_new;
    alpha_[j] = aj_new;
    b_ = b_new;
    return true;
  }

  std::vector<std::vector<double>> x_;
  std::vector<int> y_;
  FitOptions opt_;
  std::size_t n_;
  std::vector<double> alpha_;
  std::vector<double> f_;  // cached decision values on the training rows
  double b_ = 0.0;
  std::mt19937_64 rng_;
};

}  // namespace

SvcModel fit(const Dataset& train, const FitOptions& options) {
  if (!(options.C > 0.0)) throw Error(ErrorCode::InvalidSpec, "C must be positive");
  if (!(options.gamma > 0.0)) throw Error(ErrorCode::InvalidSpec, "gamma must be positive");
  if (!(options.tol > 0.0) || options.max_passes < 1) throw Error(ErrorCode::InvalidSpec, "bad tol/max_passes");
  validate_training_set(train);

  SvcModel model;
  model.gamma = options.gamma;
  model.C = options.C;
  model.scaler = Scaler::fit(train);

  std::vector<std::vector<double>> xs;
  std::vector<int> ys;
  xs.reserve(train.size());
  for (const auto& row : train.rows) {
    xs.push_back(model.scaler.transform(row.x));
    ys.push_back(row.y);
  }
  SmoSolver solver(xs, ys, options);
  solver.solve();
  model.bias = solver.final_bias();
  const auto& alpha = solver.alpha();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (alpha[i] <= 0.0) continue;
    model.support_vectors.push_back(xs[i]);
    model.coeffs.push_back(alpha[i] * ys[i]);
  }
  return model;
}

// ---------------------------------------------------------------------------
// Evaluation

std::optional<double> EvalReport::precision() const {
  if (tp + fp == 0) return std::nullopt;
  return static_cast<double>(tp) / static_cast<double>(tp + fp);
}

std::optional<double> EvalReport::recall() const {
  if (tp + fn == 0) return std::nullopt;
  return static_cast<double>(tp) / static_cast<double>(tp + fn);
}

std::optional<double> EvalReport::accuracy() const {
  if (total() == 0) return std::nullopt;
  return static_cast<double>(tp + tn) / static_cast<double>(total());
}

EvalReport evaluate(const SvcModel& model, const Dataset& test) {
  EvalReport r;
  for (const auto& row : test.rows) {
    bool predicted = predict_attack(model, row.x);
    bool actual = row.y > 0;
    if (predicted && actual) ++r.tp;
    else if (predicted) ++r.fp;
    else if (actual) ++r.fn;
    else ++r.tn;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

constexpr std::string_view kModelMagic = "rapidlearn-svc";
constexpr int kModelVersion = 1;

void write_row(std::ostream& out, std::string_view key, const std::vector<double>& values) {
  out << key;
  for (double v : values) out << ' ' << text::format_double17(v);
  out << '\n';
}

class ModelReader {
 public:
  ModelReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  std::vector<std::string_view> next_line() {
    if (!std::getline(in_, line_)) fail("unexpected end of file");
    ++line_no_;
    std::vector<std::string_view> tokens;
    for (auto tok : text::split(text::trim(line_), ' '))
      if (!tok.empty()) tokens.push_back(tok);
    if (tokens.empty()) fail("empty line");
    return tokens;
  }

  std::vector<std::string_view> keyed(std::string_view key, std::size_t values) {
    auto tokens = next_line();
    if (tokens.front() != key) fail("expected '" + std::string(key) + "'");
    if (tokens.size() != values + 1)
      fail("'" + std::string(key) + "' needs " + std::to_string(values) + " value(s)");
    return {tokens.begin() + 1, tokens.end()};
  }

  double number(std::string_view tok, std::string_view field) {
    auto v = text::parse_double(tok);
    if (!v || !std::isfinite(*v)) fail("field '" + std::string(field) + "': not a finite number");
    return *v;
  }

  std::uint64_t count(std::string_view tok, std::string_view field) {
    auto v = text::parse_uint(tok);
    if (!v) fail("field '" + std::string(field) + "': not a count");
    return *v;
  }

  [[noreturn]] void fail(const std::string& why) const {
    throw Error(ErrorCode::MalformedModelFile, source_ + ":" + std::to_string(line_no_) + ": " + why);
  }

 private:
  std::istream& in_;
  std::string source_;
  std::string line_;
  std::size_t line_no_ = 0;
};

}  // namespace

void write_model(std::ostream& out, const SvcModel& model) {
  out << kModelMagic << ' ' << kModelVersion << '\n';
  out << "gamma " << text::format_double17(model.gamma) << '\n';
  out << "C " << text::format_double17(model.C) << '\n';
  out << "bias " << text::format_double17(model.bias) << '\n';
  out << "n_features " << model.dims() << '\n';
  out << "n_sv " << model.support_vectors.size() << '\n';
  write_row(out, "scaler_mean", model.scaler.mean());
  write_row(out, "scaler_stdev", model.scaler.stdev());
  for (std::size_t i = 0; i < model.support_vectors.size(); ++i) {
    out << text::format_double17(model.coeffs[i]);
    for (double v : model.support_vectors[i]) out << ' ' << text::format_double17(v);
    out << '\n';
  }
}

SvcModel read_model(std::istream& in, const std::string& source) {
  ModelReader r(in, source);
  auto header = r.next_line();
  if (header.size() != 2 || header[0] != kModelMagic) r.fail("not a model file");
  if (r.count(header[1], "version") != kModelVersion) r.fail("unsupported version");

  SvcModel model;
  model.gamma = r.number(r.keyed("gamma", 1)[0], "gamma");
  model.C = r.number(r.keyed("C", 1)[0], "C");
  model.bias = r.number(r.keyed("bias", 1)[0], "bias");
  if (!(model.gamma > 0.0)) r.fail("field 'gamma' must be positive");
  if (!(model.C > 0.0)) r.fail("field 'C' must be positive");
  std::size_t d = r.count(r.keyed("n_features", 1)[0], "n_features");
  std::size_t n_sv = r.count(r.keyed("n_sv", 1)[0], "n_sv");
  if (d == 0) r.fail("field 'n_features' must be positive");

  std::vector<double> mean, stdev;
  for (auto tok : r.keyed("scaler_mean", d)) mean.push_back(r.number(tok, "scaler_mean"));
  for (auto tok : r.keyed("scaler_stdev", d)) {
    stdev.push_back(r.number(tok, "scaler_stdev"));
    if (!(stdev.back() > 0.0)) r.fail("field 'scaler_stdev' must be positive");
  }
  model.scaler = Scaler(std::move(mean), std::move(stdev));

  double coeff_sum = 0.0;
  for (std::size_t i = 0; i < n_sv; ++i) {
    auto tokens = r.next_line();
    if (tokens.size() != d + 1) r.fail("support vector needs coefficient and " + std::to_string(d) + " features");
    double coeff = r.number(tokens[0], "coeff");
    if (std::abs(coeff) > model.C) r.fail("field 'coeff': |alpha| exceeds C");
    coeff_sum += coeff;
    std::vector<double> sv;
    for (std::size_t k = 1; k < tokens.size(); ++k) sv.push_back(r.number(tokens[k], "feature"));
    model.coeffs.push_back(coeff);
    model.support_vectors.push_back(std::move(sv));
  }
  if (std::abs(coeff_sum) > 1e-6) r.fail("coefficients violate sum(alpha*y) = 0");
  std::string rest;
  while (std::getline(in, rest))
    if (!text::trim(rest).empty()) r.fail("trailing content after support vectors");
  return model;
}

void save_model(const SvcModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  write_model(out, model);
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

SvcModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open model " + path.string());
  return read_model(in, path.string());
}

}  // namespace rapidlearn
