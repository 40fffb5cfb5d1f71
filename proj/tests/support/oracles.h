// Straight-loop reference implementations used to check the library.
#ifndef UKIT_TESTS_SUPPORT_ORACLES_H_
#define UKIT_TESTS_SUPPORT_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <span>
#include <variant>
#include <vector>

#include "ukit/nn/model.h"

namespace ukit::oracle {

using Matrix = std::vector<std::vector<double>>;

inline Matrix to_matrix(const nn::Tensor& t) {
  Matrix m(t.rows(), std::vector<double>(t.cols()));
  for (std::size_t r = 0; r < t.rows(); ++r)
    for (std::size_t c = 0; c < t.cols(); ++c) m[r][c] = t.values()[r * t.cols() + c];
  return m;
}

struct Forward {
  Matrix logits;
  Matrix features;
};

// Reads weights straight out of the flat parameter vector.
inline Forward forward(const nn::Model& model, const Matrix& x) {
  const auto p = model.params();
  Matrix h = x;
  Forward out;
  const auto linear_ids = model.linear_layer_indices();
  for (std::size_t li = 0; li < model.layers().size(); ++li) {
    const auto& layer = model.layers()[li];
    if (li == linear_ids.back()) out.features = h;
    if (const auto* act = std::get_if<nn::ActivationLayer>(&layer)) {
      for (auto& row : h)
        for (double& v : row) {
          if (act->kind == nn::Activation::kRelu) v = std::max(0.0, v);
          if (act->kind == nn::Activation::kTanh) v = std::tanh(v);
        }
      continue;
    }
    const auto& lin = std::get<nn::LinearLayer>(layer);
    Matrix w(lin.out, std::vector<double>(lin.in));
    for (std::size_t o = 0; o < lin.out; ++o)
      for (std::size_t i = 0; i < lin.in; ++i) w[o][i] = p[lin.offset + o * lin.in + i];
    for (const auto& a : model.adapters()) {
      if (a.target_layer != li) continue;
      for (std::size_t o = 0; o < lin.out; ++o)
        for (std::size_t i = 0; i < lin.in; ++i)
          for (std::size_t k = 0; k < a.rank; ++k) {
            const double down = p[a.offset + k * lin.in + i];
            const double up = p[a.offset + a.rank * lin.in + o * a.rank + k];
            w[o][i] += a.scale * up * down;
          }
    }
    Matrix next(h.size(), std::vector<double>(lin.out));
    for (std::size_t r = 0; r < h.size(); ++r)
      for (std::size_t o = 0; o < lin.out; ++o) {
        double acc = p[lin.offset + lin.in * lin.out + o];
        for (std::size_t i = 0; i < lin.in; ++i) acc += w[o][i] * h[r][i];
        next[r][o] = acc;
      }
    h = std::move(next);
  }
  out.logits = h;
  return out;
}

inline std::vector<double> softmax(const std::vector<double>& z, double temperature = 1.0) {
  double mx = -INFINITY;
  for (double v : z) mx = std::max(mx, v / temperature);
  std::vector<double> out(z.size());
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) total += out[i] = std::exp(z[i] / temperature - mx);
  for (double& v : out) v /= total;
  return out;
}

inline double clamp_prob(double p) { return std::clamp(p, 1e-12, 1.0); }

inline std::vector<double> cross_entropy(const Matrix& logits, std::span<const int> labels) {
  std::vector<double> out;
  for (std::size_t r = 0; r < logits.size(); ++r) {
    out.push_back(-std::log(clamp_prob(softmax(logits[r])[labels[r]])));
  }
  return out;
}

// KL(teacher || student) per row, by direct summation over the clamped
// probabilities.
inline std::vector<double> kl(const Matrix& student, const Matrix& teacher, double t) {
  std::vector<double> out;
  for (std::size_t r = 0; r < student.size(); ++r) {
    const auto p = softmax(teacher[r], t);
    const auto q = softmax(student[r], t);
    double acc = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
      acc += p[k] * (std::log(clamp_prob(p[k])) - std::log(clamp_prob(q[k])));
    }
    out.push_back(acc);
  }
  return out;
}

inline std::vector<double> sq_distance(const Matrix& a, const Matrix& b) {
  std::vector<double> out;
  for (std::size_t r = 0; r < a.size(); ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < a[r].size(); ++c) acc += (a[r][c] - b[r][c]) * (a[r][c] - b[r][c]);
    out.push_back(acc);
  }
  return out;
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline std::vector<int> argmax(const Matrix& logits) {
  std::vector<int> out;
  for (const auto& row : logits) {
    int best = 0;
    for (std::size_t k = 1; k < row.size(); ++k)
      if (row[k] > row[best]) best = static_cast<int>(k);
    out.push_back(best);
  }
  return out;
}

// Principal-branch Lambert W by bisection on w * e^w = x, independent of the
// library's Halley iteration.
inline double lambert_w0_bisect(double x) {
  double lo = -1.0, hi = std::max(1.0, std::log1p(x) + 1.0);
  for (int i = 0; i < 400; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid * std::exp(mid) < x) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Deletion capacity by trying every candidate ratio: the largest ratio r
// such that every sweep point up to and including r is within tolerance.
struct SweepPoint {
  int ratio;
  double acc;
};
inline int deletion_capacity_scan(const std::vector<SweepPoint>& sweep, double baseline,
                                  double tolerance) {
  int best = 0;
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    bool ok = true;
    for (std::size_t j = 0; j <= i; ++j) ok = ok && sweep[j].acc >= baseline - tolerance;
    if (ok) best = std::max(best, sweep[i].ratio);
  }
  return best;
}

}  // namespace ukit::oracle

#endif  // UKIT_TESTS_SUPPORT_ORACLES_H_
