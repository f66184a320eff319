#pragma once

#include <stdexcept>
#include <string>

namespace magnifier {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define MAGNIFIER_DEFINE_ERROR(Name)            \
  struct Name : Error {                         \
    explicit Name(const std::string& msg)       \
        : Error(std::string(#Name ": ") + msg) {} \
  }

MAGNIFIER_DEFINE_ERROR(NonDivisibleGrid);
MAGNIFIER_DEFINE_ERROR(ShapeMismatch);
MAGNIFIER_DEFINE_ERROR(MissingPatch);
MAGNIFIER_DEFINE_ERROR(DuplicatePosition);
MAGNIFIER_DEFINE_ERROR(IncompatibleShapes);
MAGNIFIER_DEFINE_ERROR(NonBinaryInput);
MAGNIFIER_DEFINE_ERROR(MissingBand);
MAGNIFIER_DEFINE_ERROR(ConstantRaster);
MAGNIFIER_DEFINE_ERROR(MissingFile);
MAGNIFIER_DEFINE_ERROR(BadManifest);
MAGNIFIER_DEFINE_ERROR(TooFewSamples);
MAGNIFIER_DEFINE_ERROR(UnsupportedLayer);
MAGNIFIER_DEFINE_ERROR(DivergenceDetected);
MAGNIFIER_DEFINE_ERROR(IncompatibleProfile);

#undef MAGNIFIER_DEFINE_ERROR

}  // namespace magnifier
