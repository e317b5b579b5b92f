#pragma once

#include <stdexcept>
#include <string>

namespace advseq {

// Root of every error the library throws. Callers that only need to report
// a failure can catch this; the CLI maps the subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConstructionError : public Error { using Error::Error; };
class ShapeError : public Error { using Error::Error; };
class DomainError : public Error { using Error::Error; };
class EmptySequenceError : public Error { using Error::Error; };
class InfeasibleError : public Error { using Error::Error; };
class DegenerateGameError : public Error { using Error::Error; };
class StateError : public Error { using Error::Error; };
class StreamExhaustedError : public Error { using Error::Error; };
class ResourceError : public Error { using Error::Error; };
class EmptyDataError : public Error { using Error::Error; };
class FormatError : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };
class IoError : public Error { using Error::Error; };

}  // namespace advseq
