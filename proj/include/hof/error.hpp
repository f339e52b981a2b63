#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hof {

enum class ErrorCode {
  // corpus
  MissingColumn,
  MalformedRow,
  InvalidEncoding,
  DuplicateId,
  InvalidLabel,
  MixedLabeling,
  UnlabeledPost,
  InsufficientClassCount,
  // encoder
  UnknownBackbone,
  CheckpointUnavailable,
  FreezeOutOfRange,
  SequenceTooLong,
  // train
  EmptyCorpus,
  NonFiniteLoss,
  IoFailure,
  ChecksumMismatch,
  SpecMismatch,
  // eval
  LengthMismatch,
  InvalidLabelValue,
  EmptyInput,
  // cli
  ConfigInvalid,
  IncompletePredictions,
  RegistryLocked,
};

std::string_view error_name(ErrorCode code);

// Every failure raised by the library carries one of the codes above so
// callers (and the CLI exit-code mapping) can dispatch without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hof
