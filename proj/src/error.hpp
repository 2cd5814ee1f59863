#pragma once

#include <stdexcept>
#include <string>

namespace sere {

// Every failure mode the library can raise. The C API maps these 1:1 onto
// negative status codes; keep the order stable.
enum class Errc {
  Ok = 0,
  OutOfSegment,
  DimensionMismatch,
  NegativeVariance,
  AnchorCoincidesWithPosition,
  SingularGeometry,
  InsufficientInitData,
  StaleMeasurement,
  SingularInnovation,
  UnsortedStream,
  ScheduleOutOfRange,
  LengthMismatch,
  SingularCovariance,
  ConfigParse,
  IoError,
  SchemaViolation,
  InvalidArgument,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::Ok: return "Ok";
    case Errc::OutOfSegment: return "OutOfSegment";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::NegativeVariance: return "NegativeVariance";
    case Errc::AnchorCoincidesWithPosition: return "AnchorCoincidesWithPosition";
    case Errc::SingularGeometry: return "SingularGeometry";
    case Errc::InsufficientInitData: return "InsufficientInitData";
    case Errc::StaleMeasurement: return "StaleMeasurement";
    case Errc::SingularInnovation: return "SingularInnovation";
    case Errc::UnsortedStream: return "UnsortedStream";
    case Errc::ScheduleOutOfRange: return "ScheduleOutOfRange";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::SingularCovariance: return "SingularCovariance";
    case Errc::ConfigParse: return "ConfigParse";
    case Errc::IoError: return "IoError";
    case Errc::SchemaViolation: return "SchemaViolation";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace sere
