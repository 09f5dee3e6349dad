#pragma once

#include <cstddef>
#include <exception>
#include <string>

namespace edm {

// Root of every error the library throws. `kind()` is a stable tag that the
// CLI maps onto exit codes and that tests can match without parsing text.
class Error : public std::exception {
 public:
  Error(std::string kind, const std::string& what)
      : kind_(std::move(kind)), message_(kind_ + ": " + what) {}

  const char* what() const noexcept override { return message_.c_str(); }
  const std::string& kind() const noexcept { return kind_; }

  /// Adds context after the kind tag, e.g. "InvalidParam: timestamp 6: ...".
  void add_context(const std::string& context) {
    message_.insert(kind_.size() + 2, context + ": ");
  }

 private:
  std::string kind_;
  std::string message_;
};

#define EDM_DEFINE_ERROR(Name)                                        \
  class Name : public Error {                                         \
   public:                                                            \
    explicit Name(const std::string& what) : Error(#Name, what) {}    \
  }

// cost_model
EDM_DEFINE_ERROR(InvalidSpec);
EDM_DEFINE_ERROR(IndexOutOfRange);

// data_io
EDM_DEFINE_ERROR(EmptyFile);
EDM_DEFINE_ERROR(RaggedLengths);
EDM_DEFINE_ERROR(InvalidParam);
EDM_DEFINE_ERROR(TooFewPerClass);
EDM_DEFINE_ERROR(IoError);
EDM_DEFINE_ERROR(UnknownLabel);

// classifiers
EDM_DEFINE_ERROR(EmptyTrainingSet);
EDM_DEFINE_ERROR(DegenerateLabels);
EDM_DEFINE_ERROR(PrefixTooShort);
EDM_DEFINE_ERROR(FormatError);

// triggers / pipeline / eval
EDM_DEFINE_ERROR(EmptyCube);
EDM_DEFINE_ERROR(TimestampMismatch);
EDM_DEFINE_ERROR(MissingCalibrationCube);
EDM_DEFINE_ERROR(LengthMismatch);
EDM_DEFINE_ERROR(EmptyInput);

#undef EDM_DEFINE_ERROR

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("ParseError", "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace edm
