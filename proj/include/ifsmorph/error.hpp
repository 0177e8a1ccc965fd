#pragma once

#include <stdexcept>
#include <string>

namespace ifsmorph {

// Base of every error thrown by the library. The CLI maps subclasses to exit
// codes (2 input, 3 certification, 4 shape).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define IFSMORPH_ERROR(Name)                  \
  class Name : public Error {                 \
   public:                                    \
    explicit Name(const std::string& what)    \
        : Error(#Name ": " + what) {}         \
  };

IFSMORPH_ERROR(SingularSystem)
IFSMORPH_ERROR(DimensionMismatch)
IFSMORPH_ERROR(EmptyCloud)
IFSMORPH_ERROR(NotContraction)
IFSMORPH_ERROR(UncertifiedBound)
IFSMORPH_ERROR(FNotEvaluable)
IFSMORPH_ERROR(ShapeMismatch)
IFSMORPH_ERROR(NotComposable)
IFSMORPH_ERROR(BadParams)
IFSMORPH_ERROR(NotOneDimensional)
IFSMORPH_ERROR(NoSample)
IFSMORPH_ERROR(ParseError)

#undef IFSMORPH_ERROR

}  // namespace ifsmorph
