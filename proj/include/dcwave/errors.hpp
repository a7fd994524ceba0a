#pragma once

#include <stdexcept>
#include <string>

namespace dcwave {

// Base of every library error. The CLI maps ConfigError to exit 2 and the rest to exit 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define DCWAVE_ERROR(Name)                         \
    class Name : public Error {                    \
    public:                                        \
        explicit Name(const std::string& what)     \
            : Error(#Name ": " + what) {}          \
    }

DCWAVE_ERROR(GuardExceeded);
DCWAVE_ERROR(ArityMismatch);
DCWAVE_ERROR(BudgetExhausted);
DCWAVE_ERROR(FitFailed);
DCWAVE_ERROR(QuadratureTooCoarse);
DCWAVE_ERROR(OutOfDomain);
DCWAVE_ERROR(Undersampled);
DCWAVE_ERROR(NoCone);
DCWAVE_ERROR(TrustBoxExceeded);
DCWAVE_ERROR(Characteristic);
DCWAVE_ERROR(SingularJacobian);
DCWAVE_ERROR(Uncertified);
DCWAVE_ERROR(ConfigError);
DCWAVE_ERROR(IoError);

#undef DCWAVE_ERROR

}  // namespace dcwave
