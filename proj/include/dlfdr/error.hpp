#ifndef DLFDR_ERROR_HPP
#define DLFDR_ERROR_HPP

#include <stdexcept>
#include <string>

namespace dlfdr {

/// Broad failure classes. The CLI maps `input` to exit code 2 and
/// `degenerate` to exit code 3; `domain` is a caller bug (bad parameters).
enum class ErrorKind { input, domain, degenerate };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline Error input_error(const std::string& what) { return {ErrorKind::input, what}; }
inline Error domain_error(const std::string& what) { return {ErrorKind::domain, what}; }
inline Error degenerate_error(const std::string& what) { return {ErrorKind::degenerate, what}; }

} // namespace dlfdr

#endif // DLFDR_ERROR_HPP
