#ifndef QTC_ERROR_H_
#define QTC_ERROR_H_

#include <stdexcept>
#include <string>

namespace qtc {

// Error categories. These map one-to-one onto the qtc_status codes of the
// C API, so keep the two lists in sync.
enum class ErrorCode {
  kInvalidArgument,
  kParse,
  kDuplicate,
  kNotFound,
  kIo,
  kNetwork,
  kConflict,
  kUnsupported,
  kEmpty,
  kInternal,
};

const char *error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace qtc

#endif  // QTC_ERROR_H_
