#pragma once

#include <stdexcept>
#include <string>

namespace mdsllt {

// Base of every error raised by the library. Subclasses carry no extra
// state; the type is the error kind.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define MDSLLT_DEFINE_ERROR(Name) \
  class Name : public Error {     \
   public:                        \
    using Error::Error;           \
  }

MDSLLT_DEFINE_ERROR(MassSumError);
MDSLLT_DEFINE_ERROR(PeriodicityError);
MDSLLT_DEFINE_ERROR(InvalidState);
MDSLLT_DEFINE_ERROR(WindowTooLarge);
MDSLLT_DEFINE_ERROR(ScheduleInfeasible);
MDSLLT_DEFINE_ERROR(BadConstants);
MDSLLT_DEFINE_ERROR(VariantMismatch);
MDSLLT_DEFINE_ERROR(DegenerateModel);
MDSLLT_DEFINE_ERROR(BudgetExceeded);
MDSLLT_DEFINE_ERROR(EvenIndex);
MDSLLT_DEFINE_ERROR(LatticeMismatch);
MDSLLT_DEFINE_ERROR(ConfigError);
MDSLLT_DEFINE_ERROR(ParseError);
MDSLLT_DEFINE_ERROR(BoundMismatch);

#undef MDSLLT_DEFINE_ERROR

}  // namespace mdsllt
