#ifndef BNLS_ERRORS_HPP
#define BNLS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace bnls {

struct error : std::runtime_error {
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// malformed inputs: grid/value size mismatch, invalid construction parameters
struct structural_error : error {
    using error::error;
};

// numerical-consistency violations (e.g. negative seminorm radicand beyond roundoff)
struct consistency_error : error {
    using error::error;
};

// operation outside its supported parameter regime (e.g. p*gamma_p <= 2)
struct regime_error : error {
    using error::error;
};

// fibering projection requested but the map has no critical points;
// carries max f~(s~_u) so callers can see how far from the root regime they are
struct projection_error : error {
    double f_tilde_max;
    projection_error(const std::string& msg, double fmax)
        : error(msg), f_tilde_max(fmax) {}
};

struct convergence_error : error {
    using error::error;
};

struct io_error : error {
    using error::error;
};

}  // namespace bnls

#endif
