#include <algorithm>
#include <cmath>
#include <numeric>

#include "ft/calib.hpp"
#include "ft/rng.hpp"

namespace ft::calib {

namespace {

constexpr int n_in = 6, n_hidden = 12, n_out = 6;

// forward pass for one standardized sample; h and yhat are scratch
void forward(const MlpParams& p, const double* x, double* h, double* yhat) {
  for (int i = 0; i < n_hidden; ++i) {
    double a = p.b1[i];
    for (int j = 0; j < n_in; ++j) a += p.w1(i, j) * x[j];
    h[i] = std::tanh(a);
  }
  for (int i = 0; i < n_out; ++i) {
    double a = p.b2[i];
    for (int j = 0; j < n_hidden; ++j) a += p.w2(i, j) * h[j];
    yhat[i] = a;
  }
}

void check_shapes(const MlpParams& p, const la::Mat& x, const la::Mat& y) {
  if (p.w1.rows != n_hidden || p.w1.cols != n_in || int(p.b1.size()) != n_hidden ||
      p.w2.rows != n_out || p.w2.cols != n_hidden || int(p.b2.size()) != n_out)
    raise(errc::length_mismatch, "mlp: parameter shapes are not 6-12-6");
  if (x.cols != n_in || y.cols != n_out || x.rows != y.rows || x.rows == 0)
    raise(errc::length_mismatch, "mlp: sample matrices must be n x 6");
}

struct Standardizer {
  std::array<double, 6> mean{}, std{};
};

template <class Get>
Standardizer fit_standardizer(std::size_t n, Get get) {
  Standardizer s;
  for (std::size_t i = 0; i < n; ++i)
    for (int j = 0; j < 6; ++j) s.mean[j] += get(i, j);
  for (int j = 0; j < 6; ++j) s.mean[j] /= double(n);
  for (std::size_t i = 0; i < n; ++i)
    for (int j = 0; j < 6; ++j) {
      double d = get(i, j) - s.mean[j];
      s.std[j] += d * d;
    }
  for (int j = 0; j < 6; ++j) {
    s.std[j] = std::sqrt(s.std[j] / double(n));
    if (s.std[j] < 1e-12) s.std[j] = 1.0;  // constant channel maps to zero
  }
  return s;
}

}  // namespace

double mlp_loss(const MlpParams& p, const la::Mat& x, const la::Mat& y) {
  check_shapes(p, x, y);
  double h[n_hidden], yhat[n_out];
  double acc = 0.0;
  for (int i = 0; i < x.rows; ++i) {
    forward(p, x.row(i), h, yhat);
    for (int j = 0; j < n_out; ++j) {
      double e = yhat[j] - y(i, j);
      acc += e * e;
    }
  }
  return acc / (double(x.rows) * n_out);
}

MlpParams mlp_gradient(const MlpParams& p, const la::Mat& x, const la::Mat& y) {
  check_shapes(p, x, y);
  MlpParams g;
  g.w1 = la::Mat(n_hidden, n_in);
  g.b1.assign(n_hidden, 0.0);
  g.w2 = la::Mat(n_out, n_hidden);
  g.b2.assign(n_out, 0.0);
  const double scale = 2.0 / (double(x.rows) * n_out);
  double h[n_hidden], yhat[n_out], eo[n_out], eh[n_hidden];
  for (int i = 0; i < x.rows; ++i) {
    const double* xi = x.row(i);
    forward(p, xi, h, yhat);
    for (int j = 0; j < n_out; ++j) eo[j] = scale * (yhat[j] - y(i, j));
    for (int j = 0; j < n_out; ++j) {
      g.b2[j] += eo[j];
      for (int k = 0; k < n_hidden; ++k) g.w2(j, k) += eo[j] * h[k];
    }
    for (int k = 0; k < n_hidden; ++k) {
      double back = 0.0;
      for (int j = 0; j < n_out; ++j) back += p.w2(j, k) * eo[j];
      eh[k] = back * (1.0 - h[k] * h[k]);
    }
    for (int k = 0; k < n_hidden; ++k) {
      g.b1[k] += eh[k];
      for (int j = 0; j < n_in; ++j) g.w1(k, j) += eh[k] * xi[j];
    }
  }
  return g;
}

MlpCalibrator make_mlp(const model::Dataset& data, uint64_t seed) {
  const std::size_t n = data.size();
  if (n == 0) raise(errc::invalid_argument, "mlp: empty dataset");
  if (data.wrench.size() != n)
    raise(errc::length_mismatch, "mlp: wrench/frame count mismatch");

  MlpCalibrator m;
  m.repr = data.representation();
  Standardizer in = fit_standardizer(n, [&](std::size_t i, int j) {
    return data.frames[i].s[j];
  });
  Standardizer out = fit_standardizer(n, [&](std::size_t i, int j) {
    return data.wrench[i][j];
  });
  m.in_mean = in.mean;
  m.in_std = in.std;
  m.out_mean = out.mean;
  m.out_std = out.std;

  Rng rng = Rng::substream(seed, "mlp-init");
  double a1 = std::sqrt(6.0 / (n_in + n_hidden));
  for (double& v : m.params.w1.a) v = rng.uniform(-a1, a1);
  double a2 = std::sqrt(6.0 / (n_hidden + n_out));
  for (double& v : m.params.w2.a) v = rng.uniform(-a2, a2);
  return m;
}

MlpCalibrator train_mlp(const model::Dataset& data, int epochs,
                        double learning_rate, uint64_t seed) {
  if (epochs < 0) raise(errc::invalid_argument, "mlp: epochs must be >= 0");
  if (!(learning_rate > 0.0))
    raise(errc::invalid_argument, "mlp: learning rate must be > 0");
  const std::size_t n = data.size();
  if (n < 5) raise(errc::invalid_argument, "mlp: 80/20 split needs at least 5 frames");

  MlpCalibrator m = make_mlp(data, seed);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle = Rng::substream(seed, "shuffle");
  for (std::size_t i = n - 1; i > 0; --i)
    std::swap(order[i], order[shuffle.next_u64() % (i + 1)]);

  const std::size_t n_val = n / 5;
  const std::size_t n_tr = n - n_val;
  auto fill = [&](la::Mat& x, la::Mat& y, std::size_t lo, std::size_t hi) {
    x = la::Mat(int(hi - lo), 6);
    y = la::Mat(int(hi - lo), 6);
    for (std::size_t r = lo; r < hi; ++r) {
      std::size_t i = order[r];
      for (int j = 0; j < 6; ++j) {
        x(int(r - lo), j) = (data.frames[i].s[j] - m.in_mean[j]) / m.in_std[j];
        y(int(r - lo), j) = (data.wrench[i][j] - m.out_mean[j]) / m.out_std[j];
      }
    }
  };
  la::Mat xtr, ytr, xval, yval;
  fill(xtr, ytr, 0, n_tr);
  fill(xval, yval, n_tr, n);

  auto losses = [&](const MlpParams& p) {
    double tr = mlp_loss(p, xtr, ytr);
    double va = mlp_loss(p, xval, yval);
    if (!std::isfinite(tr) || !std::isfinite(va))
      raise(errc::diverged, "mlp: loss became non-finite");
    m.train_loss.push_back(tr);
    m.val_loss.push_back(va);
    return va;
  };

  MlpParams best = m.params;
  double best_val = losses(m.params);  // epoch 0 = untrained
  for (int e = 0; e < epochs; ++e) {
    MlpParams g = mlp_gradient(m.params, xtr, ytr);
    for (std::size_t i = 0; i < m.params.w1.a.size(); ++i)
      m.params.w1.a[i] -= learning_rate * g.w1.a[i];
    for (int i = 0; i < n_hidden; ++i) m.params.b1[i] -= learning_rate * g.b1[i];
    for (std::size_t i = 0; i < m.params.w2.a.size(); ++i)
      m.params.w2.a[i] -= learning_rate * g.w2.a[i];
    for (int i = 0; i < n_out; ++i) m.params.b2[i] -= learning_rate * g.b2[i];
    double va = losses(m.params);
    if (va < best_val) {
      best_val = va;
      best = m.params;
    }
  }
  m.params = best;
  return m;
}

Wrench apply(const MlpCalibrator& c, const model::SensorFrame& f) {
  if (f.repr != c.repr)
    raise(errc::representation_mismatch,
          std::string("frame is in ") + model::representation_name(f.repr) +
              ", calibrator expects " + model::representation_name(c.repr));
  double x[n_in], h[n_hidden], yhat[n_out];
  for (int j = 0; j < n_in; ++j) x[j] = (f.s[j] - c.in_mean[j]) / c.in_std[j];
  forward(c.params, x, h, yhat);
  Wrench w;
  for (int j = 0; j < n_out; ++j) w[j] = yhat[j] * c.out_std[j] + c.out_mean[j];
  return w;
}

}  // namespace ft::calib
