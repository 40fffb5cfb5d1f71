#ifndef UKIT_NN_OPS_H_
#define UKIT_NN_OPS_H_

#include <cstddef>
#include <span>

#include "ukit/nn/tape.h"
#include "ukit/nn/tensor.h"

namespace ukit::nn {

// Probabilities are clamped into [kProbFloor, 1] before any log.
inline constexpr double kProbFloor = 1e-12;

enum class Activation { kIdentity, kRelu, kTanh };

// x:[n,in], weight:[out,in], bias:[out] (may be an unbound Var) -> [n,out].
Var linear(Var x, Var weight, Var bias);
// a:[n,k], b:[k,m] -> [n,m].
Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
Var activate(Var x, Activation kind);

Var sum(Var x);
Var mean(Var x);
// Concatenates two rank-1 nodes.
Var concat(Var a, Var b);
// Sum of w_i * x_i with constant weights; x is rank-1.
Var weighted_sum(Var x, std::span<const double> weights);
Var slice_rows(Var x, std::size_t begin, std::size_t count);

// Per-sample cross entropy, -log(clamp(softmax(logits)[y])). Shape [n].
Var cross_entropy_per_sample(Var logits, std::span<const int> labels);
// Per-sample KL(teacher || student) on temperature-scaled softmax outputs.
// The teacher is a constant. Shape [n].
Var kl_per_sample(Var student_logits, const Tensor& teacher_logits,
                  double temperature = 1.0);
// Per-sample squared Euclidean distance to a constant target. Shape [n].
Var sq_distance_per_sample(Var features, const Tensor& target);

Var cross_entropy(Var logits, std::span<const int> labels);

// Mean over rows of KL(softmax(teacher/T) || softmax(student/T)) with the
// probability clamp. Throws NumericError on non-finite logits.
double kl_loss(const Tensor& student_logits, const Tensor& teacher_logits,
               double temperature = 1.0);

// Mean over rows of the squared distance between two feature matrices.
double representation_distance(const Tensor& a, const Tensor& b);

std::vector<double> cross_entropy_values(const Tensor& logits,
                                         std::span<const int> labels);

}  // namespace ukit::nn

#endif  // UKIT_NN_OPS_H_
