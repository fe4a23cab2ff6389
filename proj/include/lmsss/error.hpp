#ifndef LMSSS_ERROR_HPP
#define LMSSS_ERROR_HPP

#include <stdexcept>
#include <string>

namespace lmsss {

// Every precondition or input failure raised by the library is an Error.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace lmsss

#endif
