#include "hof/error.hpp"

namespace hof {

std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::InvalidEncoding: return "InvalidEncoding";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::InvalidLabel: return "InvalidLabel";
    case ErrorCode::MixedLabeling: return "MixedLabeling";
    case ErrorCode::UnlabeledPost: return "UnlabeledPost";
    case ErrorCode::InsufficientClassCount: return "InsufficientClassCount";
    case ErrorCode::UnknownBackbone: return "UnknownBackbone";
    case ErrorCode::CheckpointUnavailable: return "CheckpointUnavailable";
    case ErrorCode::FreezeOutOfRange: return "FreezeOutOfRange";
    case ErrorCode::SequenceTooLong: return "SequenceTooLong";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::SpecMismatch: return "SpecMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InvalidLabelValue: return "InvalidLabelValue";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::IncompletePredictions: return "IncompletePredictions";
    case ErrorCode::RegistryLocked: return "RegistryLocked";
  }
  return "Unknown";
}

}  // namespace hof
