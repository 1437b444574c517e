#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace neurocost {

enum class ErrorCode {
  // graph-core
  CycleDetected,
  DanglingReference,
  EmptyGraph,
  DuplicateId,
  InvalidGraph,
  StitchingMismatch,
  // neural-ir
  NonFiniteInput,
  NoRuleForOpKind,
  FanInExceedsRule,
  InconsistentAssembly,
  InvalidNeuralGraph,
  // cost-analytic
  InvalidArgument,
  FiringRateOutOfRange,
  // sim-engine
  UnknownInputNeuron,
  NonFiniteState,
  WindowTooLarge,
  MismatchDetected,
  // simd-threads
  FragmentTooLarge,
  GraphTooLargeForOracle,
  // workloads
  DegenerateMesh,
  NonStochasticMatrix,
  ZeroWidth,
  // cli-report
  SyntaxError,
  SchemaError,
  UnknownKey,
  NegativeConstant,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so the
/// CLI can map it onto an exit status without string matching.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace neurocost
