#include "neurocost/error.hpp"

namespace neurocost {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::DanglingReference: return "DanglingReference";
    case ErrorCode::EmptyGraph: return "EmptyGraph";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::InvalidGraph: return "InvalidGraph";
    case ErrorCode::StitchingMismatch: return "StitchingMismatch";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::NoRuleForOpKind: return "NoRuleForOpKind";
    case ErrorCode::FanInExceedsRule: return "FanInExceedsRule";
    case ErrorCode::InconsistentAssembly: return "InconsistentAssembly";
    case ErrorCode::InvalidNeuralGraph: return "InvalidNeuralGraph";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::FiringRateOutOfRange: return "FiringRateOutOfRange";
    case ErrorCode::UnknownInputNeuron: return "UnknownInputNeuron";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::WindowTooLarge: return "WindowTooLarge";
    case ErrorCode::MismatchDetected: return "MismatchDetected";
    case ErrorCode::FragmentTooLarge: return "FragmentTooLarge";
    case ErrorCode::GraphTooLargeForOracle: return "GraphTooLargeForOracle";
    case ErrorCode::DegenerateMesh: return "DegenerateMesh";
    case ErrorCode::NonStochasticMatrix: return "NonStochasticMatrix";
    case ErrorCode::ZeroWidth: return "ZeroWidth";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::UnknownKey: return "UnknownKey";
    case ErrorCode::NegativeConstant: return "NegativeConstant";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

void fail(ErrorCode code, const std::string& message) {
  throw Error(code, std::string(to_string(code)) + ": " + message);
}

}  // namespace neurocost
