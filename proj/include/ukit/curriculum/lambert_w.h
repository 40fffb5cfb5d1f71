#ifndef UKIT_CURRICULUM_LAMBERT_W_H_
#define UKIT_CURRICULUM_LAMBERT_W_H_

namespace ukit::curriculum {

// Principal branch W0 of the Lambert W function: the w >= -1 solving
// w * exp(w) = x. Defined for x >= -1/e; throws DomainError below that.
// Halley iteration from a piecewise initial guess, at most 50 iterations.
double lambert_w0(double x);

}  // namespace ukit::curriculum

#endif  // UKIT_CURRICULUM_LAMBERT_W_H_
