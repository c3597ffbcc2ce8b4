#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace btm {

enum class ErrorKind {
  missing_file,
  payload_size_mismatch,
  unknown_topic_id,
  zero_vector,
  duplicate_doc_id,
  dimension_mismatch,
  invalid_bundle,
  io,
  empty_corpus,
  outlier_unavailable,
  no_native_topics,
  domain_mismatch,
  degenerate_kappa,
  invalid_config,
  instance_too_large,
  invariant_violation,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::missing_file: return "missing file";
    case ErrorKind::payload_size_mismatch: return "payload size mismatch";
    case ErrorKind::unknown_topic_id: return "unknown topic id";
    case ErrorKind::zero_vector: return "zero vector";
    case ErrorKind::duplicate_doc_id: return "duplicate doc_id";
    case ErrorKind::dimension_mismatch: return "dimension mismatch";
    case ErrorKind::invalid_bundle: return "invalid bundle";
    case ErrorKind::io: return "io error";
    case ErrorKind::empty_corpus: return "empty corpus";
    case ErrorKind::outlier_unavailable: return "outlier embedding unavailable";
    case ErrorKind::no_native_topics: return "no native topics";
    case ErrorKind::domain_mismatch: return "label domain mismatch";
    case ErrorKind::degenerate_kappa: return "degenerate kappa";
    case ErrorKind::invalid_config: return "invalid config";
    case ErrorKind::instance_too_large: return "instance too large";
    case ErrorKind::invariant_violation: return "invariant violation";
  }
  return "unknown error";
}

/// Every failure raised by the library carries a kind so callers (and the
/// CLI exit-code mapping) can dispatch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace btm
