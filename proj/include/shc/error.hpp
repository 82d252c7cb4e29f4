#pragma once

#include <stdexcept>

// Error hierarchy shared by all shc modules. Every failure mode surfaced by
// the library derives from shc::Error so callers can catch one type.

namespace shc {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidData : Error { using Error::Error; };
struct TooFewObservations : Error { using Error::Error; };
struct InvalidK : Error { using Error::Error; };
struct NotInternal : Error { using Error::Error; };
struct DegenerateData : Error { using Error::Error; };
struct KindMismatch : Error { using Error::Error; };
struct InvalidConfig : Error { using Error::Error; };
struct InvalidDesign : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct DegenerateSample : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

}  // namespace shc
