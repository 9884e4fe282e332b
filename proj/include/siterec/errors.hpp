#pragma once

#include <stdexcept>
#include <string>

namespace siterec {

// Base for all domain errors thrown by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define SITEREC_DEFINE_ERROR(Name)                              \
  class Name : public Error {                                   \
   public:                                                      \
    explicit Name(const std::string& msg) : Error(msg) {}       \
  }

// catalog
SITEREC_DEFINE_ERROR(MalformedRow);
SITEREC_DEFINE_ERROR(CoordinateOutOfRange);
SITEREC_DEFINE_ERROR(DuplicateSiteId);
SITEREC_DEFINE_ERROR(DimensionMismatch);
SITEREC_DEFINE_ERROR(NotNormalized);
SITEREC_DEFINE_ERROR(UnknownSiteId);

// geo
SITEREC_DEFINE_ERROR(UndefinedBearing);
SITEREC_DEFINE_ERROR(InvalidTilingParams);
SITEREC_DEFINE_ERROR(OutOfCoverage);

// purify
SITEREC_DEFINE_ERROR(EmptyClass);
SITEREC_DEFINE_ERROR(UnsupportedAtom);

// classifier
SITEREC_DEFINE_ERROR(IndexOutOfRange);
SITEREC_DEFINE_ERROR(TooFewClasses);
SITEREC_DEFINE_ERROR(EmptyTrainingSet);
SITEREC_DEFINE_ERROR(EmptyTestSet);
SITEREC_DEFINE_ERROR(CorruptModel);

// context
SITEREC_DEFINE_ERROR(NoCandidateInContext);

// registry
SITEREC_DEFINE_ERROR(RegionUnknown);
SITEREC_DEFINE_ERROR(VersionUnknown);
SITEREC_DEFINE_ERROR(NoModelPublished);
SITEREC_DEFINE_ERROR(ProtocolError);

// harness
SITEREC_DEFINE_ERROR(InvalidConfig);
SITEREC_DEFINE_ERROR(ClassTooSmall);

#undef SITEREC_DEFINE_ERROR

}  // namespace siterec
