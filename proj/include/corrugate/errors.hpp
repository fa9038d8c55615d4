#pragma once

#include <stdexcept>
#include <string>

namespace corrugate {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define CORRUGATE_DEFINE_ERROR(Name)          \
  class Name : public Error {                 \
   public:                                    \
    using Error::Error;                       \
  };

CORRUGATE_DEFINE_ERROR(DimensionError)
CORRUGATE_DEFINE_ERROR(DirectionError)
CORRUGATE_DEFINE_ERROR(ResolutionError)
CORRUGATE_DEFINE_ERROR(DomainTooSmall)
CORRUGATE_DEFINE_ERROR(AlignmentError)
CORRUGATE_DEFINE_ERROR(IndexError)
CORRUGATE_DEFINE_ERROR(MeanError)
CORRUGATE_DEFINE_ERROR(NearH0Violation)
CORRUGATE_DEFINE_ERROR(NegativeCoefficient)
CORRUGATE_DEFINE_ERROR(NonImmersion)
CORRUGATE_DEFINE_ERROR(ParamError)
CORRUGATE_DEFINE_ERROR(DeficitTooLarge)
CORRUGATE_DEFINE_ERROR(NegativeAmplitude)
CORRUGATE_DEFINE_ERROR(UnknownPreset)
CORRUGATE_DEFINE_ERROR(IOError)
CORRUGATE_DEFINE_ERROR(ConfigError)

#undef CORRUGATE_DEFINE_ERROR

/// Wraps an error raised while running stage `stage` of a multi-stage run.
class StageError : public Error {
 public:
  StageError(int stage, const std::string& what)
      : Error("stage " + std::to_string(stage) + ": " + what), stage_(stage) {}
  int stage() const { return stage_; }

 private:
  int stage_;
};

}  // namespace corrugate
