#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace specforge {

/// Base of every error the pipeline raises. `kind()` is the stable
/// machine-readable name used in CLI output and stage labels.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define SPECFORGE_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                          \
   public:                                                             \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  };

SPECFORGE_DEFINE_ERROR(ValidationError)
SPECFORGE_DEFINE_ERROR(FormalizationFailed)
SPECFORGE_DEFINE_ERROR(BackendUnavailable)
SPECFORGE_DEFINE_ERROR(CyclicDependency)
SPECFORGE_DEFINE_ERROR(EmitError)
SPECFORGE_DEFINE_ERROR(PathExplosion)
SPECFORGE_DEFINE_ERROR(TemplateError)
SPECFORGE_DEFINE_ERROR(CompileRejected)
SPECFORGE_DEFINE_ERROR(AlreadyNegated)
SPECFORGE_DEFINE_ERROR(ToolchainMissing)
SPECFORGE_DEFINE_ERROR(ReplayMiss)
SPECFORGE_DEFINE_ERROR(NoErrors)
SPECFORGE_DEFINE_ERROR(IoError)
SPECFORGE_DEFINE_ERROR(InconsistentState)
SPECFORGE_DEFINE_ERROR(UnknownFixture)
SPECFORGE_DEFINE_ERROR(UnknownVariant)
SPECFORGE_DEFINE_ERROR(EvalError)
SPECFORGE_DEFINE_ERROR(ConfigError)

#undef SPECFORGE_DEFINE_ERROR

/// Malformed bundle file. `line` is 1-based, 0 when no position is known.
class ParseError : public Error {
 public:
  ParseError(std::string file, int line, const std::string& detail)
      : Error("ParseError", format(file, line, detail)),
        file_(std::move(file)),
        line_(line) {}

  const std::string& file() const noexcept { return file_; }
  int line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& file, int line, const std::string& detail) {
    return line > 0 ? file + ":" + std::to_string(line) + ": " + detail : file + ": " + detail;
  }

  std::string file_;
  int line_;
};

/// A pipeline stage failed; wraps the underlying error with the stage name.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause)
      : Error(cause.kind(), "[" + stage + "] " + cause.what()), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace specforge
