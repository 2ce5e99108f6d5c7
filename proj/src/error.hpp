#pragma once

#include <stdexcept>
#include <string>

namespace fsd {

// Error categories. Values match the fsd_status codes in the public C header.
enum class Errc : int {
    invalid_argument = 1,  // bad boxes, bad weights, bad numeric inputs
    io = 2,                // unreadable/unwritable files, undecodable media
    schema = 3,            // malformed records, unknown classes/keys
    config = 4,            // inconsistent configuration, shape mismatches
    protocol = 5,          // misuse of an operation contract (mixed ids, bad counts)
    numeric = 6,           // NaN/Inf surfaced from computation
};

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Errc code() const { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& what) { throw Error(code, what); }

} // namespace fsd
