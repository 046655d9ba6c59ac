#ifndef STORMCLASS_ERROR_HPP
#define STORMCLASS_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace stormclass {

enum class ErrorKind {
  InvalidMapping,
  Config,
  DegenerateInput,
  UndefinedScore,
  InsufficientClusters,
  MissingScience,
  DegenerateModel,
  InsufficientData,
  NumericOverflow,
  DivergedTraining,
  InvalidPlan,
  InfeasibleFolds,
  MissingLabel,
  InvalidSpec,
  EmptyInput,
  Parse,
  Schema,
  BandOrder,
  Io,
};

std::string_view error_kind_name(ErrorKind kind);

/// Every failure raised by the library carries a machine-checkable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace stormclass

#endif  // STORMCLASS_ERROR_HPP
