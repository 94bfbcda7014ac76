#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace fsd {

enum class Errc {
    ok = 0,
    argument,    // malformed or inconsistent inputs
    range,       // a data value outside [0, d] or a plaintext outside Z_n
    capacity,    // packed aggregate would not fit the bound modulus
    randomness,  // supplied encryption randomness is not a unit mod n
    ciphertext,  // ciphertext is not a unit mod n^2
    keygen,      // prime/parameter generation gave up after bounded retries
    verify,      // signature or timestamp check failed
    replay,      // stale or duplicated message
    tamper,      // signatures passed but the decoded aggregate is structurally corrupt
    parse,       // JSON/CSV/serialized-value parse failure
    io,          // file access failure
    training,    // threshold training could not meet the target rate
    internal,
};

const char* errc_name(Errc e);

class Error : public std::runtime_error {
public:
    Error(Errc code, std::string msg)
        : std::runtime_error(std::move(msg)), code_(code) {}
    Errc code() const { return code_; }

private:
    Errc code_;
};

// Capacity failures report the largest sample count that would still fit,
// so callers can suggest a workable N.
class CapacityError : public Error {
public:
    CapacityError(std::string msg, uint32_t max_feasible_n)
        : Error(Errc::capacity, std::move(msg)), max_feasible_n_(max_feasible_n) {}
    uint32_t max_feasible_n() const { return max_feasible_n_; }

private:
    uint32_t max_feasible_n_;
};

}  // namespace fsd
