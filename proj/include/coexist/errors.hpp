#ifndef COEXIST_ERRORS_HPP
#define COEXIST_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace coexist {

// Bad arguments or malformed input data (grids too small, inconsistent sizes, ...).
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Text that fails to parse: problem files, expressions, fixture files.
struct ParseError : InputError {
  using InputError::InputError;
};

// The linear periodic problem admits a nontrivial periodic solution,
// so no periodic kernel exists (monodromy trace too close to 2).
struct ResonanceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Kernel entries of both signs beyond tolerance, or a nonlinearity whose
// declared sign is incompatible with its kernel.
struct MixedSignError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Evaluation outside an operator's certified domain.
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An expression produced a non-finite value, or a fractional power of a
// negative base was requested.
struct EvaluationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A configuration failed its admissibility checks at construction time.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// No certified radii in the search range.
struct NotFoundError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Iteration budget exhausted before reaching tolerance.
struct NoConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A degree computation met a (near-)zero on the contour it walks.
struct BoundaryFixedPointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A degree computation saw an angular step too large to trust at the
// requested sampling density.
struct RefinementError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An index-laboratory run disagrees with its expected table.
struct MismatchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace coexist

#endif
