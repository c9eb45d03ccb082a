#pragma once

#include <stdexcept>

namespace biot {

/// Base class of every exception thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParamError : Error { using Error::Error; };           // invalid physical or numeric parameter
struct ShapeError : Error { using Error::Error; };           // dimension mismatch between operands
struct ConfigError : Error { using Error::Error; };          // inconsistent or incomplete configuration
struct AssemblyError : Error { using Error::Error; };        // defective mesh entity during assembly
struct ClassificationError : Error { using Error::Error; };  // boundary facet matches no box face
struct DefinitenessError : Error { using Error::Error; };    // operator required to be SPD is not
struct InnerSolveError : Error { using Error::Error; };      // inner block solve failed to converge
struct ConvergenceError : Error { using Error::Error; };     // outer solve missed its tolerance
struct SizeError : Error { using Error::Error; };            // problem exceeds a configured budget
struct IoError : Error { using Error::Error; };              // file read or write failure

}  // namespace biot
