#include "ukit/nn/ops.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "ukit/errors.h"

namespace ukit::nn {

namespace {

Tape& tape_of(Var v) {
  if (!v.valid()) throw StateError("unbound Var passed to an op");
  return *v.tape();
}

void require_rank2(const Tensor& t, const char* what) {
  if (t.rank() != 2) {
    throw ShapeError(std::string(what) + " expects a rank-2 tensor, got " +
                     shape_string(t.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(what) + ": shape mismatch " + shape_string(a.shape()) +
                     " vs " + shape_string(b.shape()));
  }
}

void require_finite(const Tensor& t, const char* what) {
  if (!t.all_finite()) throw NumericError(std::string(what) + ": non-finite logits");
}

}  // namespace

Var linear(Var x, Var weight, Var bias) {
  const Tensor& xv = x.value();
  const Tensor& wv = weight.value();
  require_rank2(xv, "linear input");
  require_rank2(wv, "linear weight");
  const std::size_t n = xv.rows(), in = xv.cols(), out = wv.rows();
  if (wv.cols() != in) {
    throw ShapeError("linear: input width " + std::to_string(in) +
                     " does not match weight " + shape_string(wv.shape()));
  }
  const bool has_bias = bias.valid();
  if (has_bias && bias.value().size() != out) throw ShapeError("linear: bias length mismatch");

  Tensor y({n, out});
  for (std::size_t r = 0; r < n; ++r) {
    auto xr = xv.row(r);
    for (std::size_t o = 0; o < out; ++o) {
      auto wr = wv.row(o);
      double acc = has_bias ? bias.value()[o] : 0.0;
      for (std::size_t i = 0; i < in; ++i) acc += xr[i] * wr[i];
      y.at(r, o) = acc;
    }
  }
  std::vector<Var> inputs{x, weight};
  if (has_bias) inputs.push_back(bias);
  return tape_of(x).record(
      std::move(y), std::move(inputs),
      [xv, wv, n, in, out, has_bias](const Tensor& g, std::span<Tensor* const> grads) {
        if (Tensor* gx = grads[0]) {
          for (std::size_t r = 0; r < n; ++r) {
            auto gxr = gx->row(r);
            for (std::size_t o = 0; o < out; ++o) {
              const double go = g.at(r, o);
              if (go == 0.0) continue;
              auto wr = wv.row(o);
              for (std::size_t i = 0; i < in; ++i) gxr[i] += go * wr[i];
            }
          }
        }
        if (Tensor* gw = grads[1]) {
          for (std::size_t r = 0; r < n; ++r) {
            auto xr = xv.row(r);
            for (std::size_t o = 0; o < out; ++o) {
              const double go = g.at(r, o);
              if (go == 0.0) continue;
              auto gwr = gw->row(o);
              for (std::size_t i = 0; i < in; ++i) gwr[i] += go * xr[i];
            }
          }
        }
        if (has_bias) {
          if (Tensor* gb = grads[2]) {
            for (std::size_t r = 0; r < n; ++r) {
              for (std::size_t o = 0; o < out; ++o) (*gb)[o] += g.at(r, o);
            }
          }
        }
      });
}

Var matmul(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_rank2(av, "matmul lhs");
  require_rank2(bv, "matmul rhs");
  const std::size_t n = av.rows(), k = av.cols(), m = bv.cols();
  if (bv.rows() != k) {
    throw ShapeError("matmul: " + shape_string(av.shape()) + " x " + shape_string(bv.shape()));
  }
  Tensor y({n, m});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = av.at(i, p);
      for (std::size_t j = 0; j < m; ++j) y.at(i, j) += aip * bv.at(p, j);
    }
  }
  return tape_of(a).record(
      std::move(y), {a, b},
      [av, bv, n, k, m](const Tensor& g, std::span<Tensor* const> grads) {
        if (Tensor* ga = grads[0]) {
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t p = 0; p < k; ++p) {
              double acc = 0.0;
              for (std::size_t j = 0; j < m; ++j) acc += g.at(i, j) * bv.at(p, j);
              ga->at(i, p) += acc;
            }
        }
        if (Tensor* gb = grads[1]) {
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t p = 0; p < k; ++p) {
              const double aip = av.at(i, p);
              for (std::size_t j = 0; j < m; ++j) gb->at(p, j) += aip * g.at(i, j);
            }
        }
      });
}

Var add(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "add");
  Tensor y = a.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += b.value()[i];
  return tape_of(a).record(std::move(y), {a, b},
                           [](const Tensor& g, std::span<Tensor* const> grads) {
                             for (Tensor* gi : grads) {
                               if (!gi) continue;
                               for (std::size_t i = 0; i < g.size(); ++i) (*gi)[i] += g[i];
                             }
                           });
}

Var sub(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "sub");
  Tensor y = a.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] -= b.value()[i];
  return tape_of(a).record(std::move(y), {a, b},
                           [](const Tensor& g, std::span<Tensor* const> grads) {
                             if (Tensor* ga = grads[0])
                               for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i];
                             if (Tensor* gb = grads[1])
                               for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] -= g[i];
                           });
}

Var mul(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "mul");
  const Tensor av = a.value();
  const Tensor bv = b.value();
  Tensor y = av;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= bv[i];
  return tape_of(a).record(std::move(y), {a, b},
                           [av, bv](const Tensor& g, std::span<Tensor* const> grads) {
                             if (Tensor* ga = grads[0])
                               for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * bv[i];
                             if (Tensor* gb = grads[1])
                               for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] += g[i] * av[i];
                           });
}

Var scale(Var a, double factor) {
  Tensor y = a.value();
  for (double& v : y.values()) v *= factor;
  return tape_of(a).record(std::move(y), {a},
                           [factor](const Tensor& g, std::span<Tensor* const> grads) {
                             if (Tensor* ga = grads[0])
                               for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += factor * g[i];
                           });
}

Var activate(Var x, Activation kind) {
  if (kind == Activation::kIdentity) return x;
  Tensor y = x.value();
  if (kind == Activation::kRelu) {
    for (double& v : y.values()) v = v > 0.0 ? v : 0.0;
  } else {
    for (double& v : y.values()) v = std::tanh(v);
  }
  const Tensor yv = y;
  return tape_of(x).record(std::move(y), {x},
                           [yv, kind](const Tensor& g, std::span<Tensor* const> grads) {
                             Tensor* gx = grads[0];
                             if (!gx) return;
                             for (std::size_t i = 0; i < g.size(); ++i) {
                               const double d = kind == Activation::kRelu
                                                    ? (yv[i] > 0.0 ? 1.0 : 0.0)
                                                    : 1.0 - yv[i] * yv[i];
                               (*gx)[i] += g[i] * d;
                             }
                           });
}

Var sum(Var x) {
  double total = 0.0;
  for (double v : x.value().values()) total += v;
  return tape_of(x).record(Tensor::scalar(total), {x},
                           [](const Tensor& g, std::span<Tensor* const> grads) {
                             if (Tensor* gx = grads[0])
                               for (double& v : gx->values()) v += g[0];
                           });
}

Var mean(Var x) {
  const double n = static_cast<double>(x.value().size());
  return scale(sum(x), 1.0 / n);
}

Var concat(Var a, Var b) {
  if (a.value().rank() != 1 || b.value().rank() != 1) throw ShapeError("concat expects rank-1 inputs");
  std::vector<double> values(a.value().raw());
  values.insert(values.end(), b.value().raw().begin(), b.value().raw().end());
  const std::size_t na = a.value().size();
  return tape_of(a).record(Tensor::vector(std::move(values)), {a, b},
                           [na](const Tensor& g, std::span<Tensor* const> grads) {
                             if (Tensor* ga = grads[0])
                               for (std::size_t i = 0; i < na; ++i) (*ga)[i] += g[i];
                             if (Tensor* gb = grads[1])
                               for (std::size_t i = 0; i < gb->size(); ++i) (*gb)[i] += g[na + i];
                           });
}

Var weighted_sum(Var x, std::span<const double> weights) {
  if (x.value().size() != weights.size()) throw ShapeError("weighted_sum: weight count mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) total += weights[i] * x.value()[i];
  std::vector<double> w(weights.begin(), weights.end());
  return tape_of(x).record(Tensor::scalar(total), {x},
                           [w](const Tensor& g, std::span<Tensor* const> grads) {
                             if (Tensor* gx = grads[0])
                               for (std::size_t i = 0; i < w.size(); ++i) (*gx)[i] += g[0] * w[i];
                           });
}

Var slice_rows(Var x, std::size_t begin, std::size_t count) {
  const Tensor& xv = x.value();
  if (count == 0 || begin + count > xv.rows()) throw ShapeError("slice_rows out of range");
  const std::size_t c = xv.cols();
  Shape shape = xv.shape();
  shape[0] = count;
  std::vector<double> values(xv.raw().begin() + begin * c,
                             xv.raw().begin() + (begin + count) * c);
  return tape_of(x).record(Tensor(std::move(shape), std::move(values)), {x},
                           [begin, c](const Tensor& g, std::span<Tensor* const> grads) {
                             if (Tensor* gx = grads[0])
                               for (std::size_t i = 0; i < g.size(); ++i) (*gx)[begin * c + i] += g[i];
                           });
}

Var cross_entropy_per_sample(Var logits, std::span<const int> labels) {
  const Tensor& z = logits.value();
  require_rank2(z, "cross_entropy");
  if (labels.size() != z.rows()) throw ShapeError("cross_entropy: label count mismatch");
  const std::size_t c = z.cols();
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= c) throw ShapeError("cross_entropy: label out of range");
  }
  Tensor p = softmax_rows(z);
  Tensor out({z.rows()});
  for (std::size_t r = 0; r < z.rows(); ++r) {
    out[r] = -std::log(std::max(p.at(r, labels[r]), kProbFloor));
  }
  std::vector<int> y(labels.begin(), labels.end());
  return tape_of(logits).record(
      std::move(out), {logits}, [p, y, c](const Tensor& g, std::span<Tensor* const> grads) {
        Tensor* gz = grads[0];
        if (!gz) return;
        for (std::size_t r = 0; r < y.size(); ++r) {
          // Inside the clamp the loss is flat.
          if (p.at(r, y[r]) < kProbFloor) continue;
          for (std::size_t j = 0; j < c; ++j) {
            const double target = static_cast<int>(j) == y[r] ? 1.0 : 0.0;
            gz->at(r, j) += g[r] * (p.at(r, j) - target);
          }
        }
      });
}

Var cross_entropy(Var logits, std::span<const int> labels) {
  return mean(cross_entropy_per_sample(logits, labels));
}

namespace {

std::vector<double> kl_rows(const Tensor& p, const Tensor& q) {
  std::vector<double> out(p.rows(), 0.0);
  for (std::size_t r = 0; r < p.rows(); ++r) {
    double acc = 0.0;
    for (std::size_t j = 0; j < p.cols(); ++j) {
      const double pj = p.at(r, j);
      if (pj == 0.0) continue;
      acc += pj * (std::log(std::max(pj, kProbFloor)) - std::log(std::max(q.at(r, j), kProbFloor)));
    }
    out[r] = acc;
  }
  return out;
}

}  // namespace

Var kl_per_sample(Var student_logits, const Tensor& teacher_logits, double temperature) {
  const Tensor& z = student_logits.value();
  require_rank2(z, "kl");
  require_same_shape(z, teacher_logits, "kl");
  if (!(temperature > 0.0)) throw ConfigError("kl temperature must be positive");
  require_finite(z, "kl student");
  require_finite(teacher_logits, "kl teacher");
  Tensor p = softmax_rows(teacher_logits, temperature);
  Tensor q = softmax_rows(z, temperature);
  Tensor out = Tensor::vector(kl_rows(p, q));
  const std::size_t c = z.cols();
  return tape_of(student_logits).record(
      std::move(out), {student_logits},
      [p, q, c, temperature](const Tensor& g, std::span<Tensor* const> grads) {
        Tensor* gz = grads[0];
        if (!gz) return;
        for (std::size_t r = 0; r < p.rows(); ++r) {
          // d/dz_k of -sum_{j unclamped} p_j log q_j.
          double p_unclamped = 0.0;
          for (std::size_t j = 0; j < c; ++j) {
            if (q.at(r, j) >= kProbFloor) p_unclamped += p.at(r, j);
          }
          for (std::size_t k = 0; k < c; ++k) {
            const double own = q.at(r, k) >= kProbFloor ? p.at(r, k) : 0.0;
            gz->at(r, k) += g[r] * (q.at(r, k) * p_unclamped - own) / temperature;
          }
        }
      });
}

Var sq_distance_per_sample(Var features, const Tensor& target) {
  const Tensor& a = features.value();
  require_rank2(a, "sq_distance");
  require_same_shape(a, target, "sq_distance");
  Tensor out({a.rows()});
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const double d = a.at(r, j) - target.at(r, j);
      acc += d * d;
    }
    out[r] = acc;
  }
  const Tensor av = a;
  return tape_of(features).record(
      std::move(out), {features}, [av, target](const Tensor& g, std::span<Tensor* const> grads) {
        Tensor* ga = grads[0];
        if (!ga) return;
        for (std::size_t r = 0; r < av.rows(); ++r)
          for (std::size_t j = 0; j < av.cols(); ++j)
            ga->at(r, j) += g[r] * 2.0 * (av.at(r, j) - target.at(r, j));
      });
}

double kl_loss(const Tensor& student_logits, const Tensor& teacher_logits, double temperature) {
  require_rank2(student_logits, "kl_loss");
  require_same_shape(student_logits, teacher_logits, "kl_loss");
  if (!(temperature > 0.0)) throw ConfigError("kl temperature must be positive");
  require_finite(student_logits, "kl_loss student");
  require_finite(teacher_logits, "kl_loss teacher");
  const auto rows = kl_rows(softmax_rows(teacher_logits, temperature),
                            softmax_rows(student_logits, temperature));
  double total = 0.0;
  for (double v : rows) total += v;
  return total / static_cast<double>(rows.size());
}

double representation_distance(const Tensor& a, const Tensor& b) {
  require_rank2(a, "representation_distance");
  require_same_shape(a, b, "representation_distance");
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) total += (a[i] - b[i]) * (a[i] - b[i]);
  return total / static_cast<double>(a.rows());
}

std::vector<double> cross_entropy_values(const Tensor& logits, std::span<const int> labels) {
  if (labels.size() != logits.rows()) throw ShapeError("cross_entropy: label count mismatch");
  Tensor p = softmax_rows(logits);
  std::vector<double> out(labels.size());
  for (std::size_t r = 0; r < labels.size(); ++r) {
    out[r] = -std::log(std::max(p.at(r, labels[r]), kProbFloor));
  }
  return out;
}

}  // namespace ukit::nn
