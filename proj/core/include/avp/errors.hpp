#pragma once

#include <stdexcept>
#include <string>

namespace avp {

// Base of every error thrown by the library. The module tag is prefixed to
// the message ("seqio: ...") so command-line output is self-locating.
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& message)
      : std::runtime_error(module + ": " + message), module_(std::move(module)) {}

  const std::string& module() const noexcept { return module_; }

  // Process exit code the CLI reports for this error: 1 for validation
  // failures, 2 for IO / format failures.
  virtual int exit_code() const noexcept { return 1; }

 private:
  std::string module_;
};

#define AVP_DECLARE_ERROR(Name, Code)                                  \
  class Name : public Error {                                          \
   public:                                                             \
    using Error::Error;                                                \
    int exit_code() const noexcept override { return Code; }           \
  }

AVP_DECLARE_ERROR(LengthError, 1);
AVP_DECLARE_ERROR(DuplicateIdError, 1);
AVP_DECLARE_ERROR(StratifyError, 1);
AVP_DECLARE_ERROR(LabelError, 1);
AVP_DECLARE_ERROR(ConfigError, 1);
AVP_DECLARE_ERROR(ShapeError, 1);
AVP_DECLARE_ERROR(EmptyError, 1);
AVP_DECLARE_ERROR(SingleClassError, 1);
AVP_DECLARE_ERROR(VarianceError, 1);
AVP_DECLARE_ERROR(ZeroVectorError, 1);
AVP_DECLARE_ERROR(EmptyQueueError, 1);
AVP_DECLARE_ERROR(DomainError, 1);
AVP_DECLARE_ERROR(FormatError, 2);
AVP_DECLARE_ERROR(IoError, 2);
AVP_DECLARE_ERROR(VersionError, 2);
AVP_DECLARE_ERROR(CorruptionError, 2);

#undef AVP_DECLARE_ERROR

// A residue outside the 20-letter alphabet. Carries the record id and the
// offending character so callers (the HTTP service) can report both.
class ValidationError : public Error {
 public:
  ValidationError(std::string module, std::string record, char offending)
      : Error(std::move(module), "record '" + record + "' contains invalid residue '" +
                                     std::string(1, offending) + "'"),
        record_(std::move(record)),
        offending_(offending) {}

  const std::string& record() const noexcept { return record_; }
  char offending() const noexcept { return offending_; }

 private:
  std::string record_;
  char offending_;
};

}  // namespace avp
