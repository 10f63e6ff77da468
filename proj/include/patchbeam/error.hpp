#pragma once

#include <stdexcept>
#include <string>

namespace patchbeam {

// Every failure raised by the library derives from Error; the category
// tells a driver which exit code to use without parsing messages.
enum class ErrorKind {
    parameter,
    dimension,
    coupling_contract,
    geometry,
    periodicity,
    stencil,
    nonhomogeneous,
    numerical_breakdown,
    pairing_failure,
    divergence,
    config,
    io,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

#define PATCHBEAM_REQUIRE(cond, kind, msg)                                  \
    do {                                                                    \
        if (!(cond)) throw ::patchbeam::Error(::patchbeam::ErrorKind::kind, \
                                              (msg));                       \
    } while (0)

}  // namespace patchbeam
