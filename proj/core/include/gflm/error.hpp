#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gflm {

/// Failure categories raised by the library. The CLI maps these onto its
/// stable exit codes (data, config, convergence).
enum class ErrorKind {
  kAlignment,      // curve / weight / grid lengths disagree
  kInvalidInput,   // value violates a type invariant
  kPrecondition,   // operation called on data it does not accept
  kRange,          // index or order out of range
  kResolution,     // grid too coarse for the request
  kParse,          // malformed file
  kConfig,         // inconsistent configuration
  kNumeric,        // non-finite intermediate
  kRankDeficient,  // singular weighted normal equations
  kSeparation,     // complete separation under a binary link
  kConvergence,    // iteration cap reached
  kSmoothing,      // local fit impossible even after bandwidth inflation
  kDegenerateLink, // estimated link collapsed to a constant
  kConditioning,   // near-singular matrix in inference
  kSelection,      // every candidate order failed
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace gflm
