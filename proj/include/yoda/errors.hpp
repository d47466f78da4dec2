#pragma once

#include <stdexcept>
#include <string>

namespace yoda {

// Error taxonomy shared by the library and the CLI exit-code mapping:
// usage -> 1, data/format -> 2, numeric -> 3.
enum class errc {
    usage,
    missing_file,
    bad_magic,
    truncated,
    value_range,
    bad_format,
    bad_config,
    empty_dataset,
    shape_mismatch,
    numeric,
};

class Error : public std::runtime_error {
public:
    Error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    errc code() const { return code_; }

    int exit_code() const {
        switch (code_) {
        case errc::usage: return 1;
        case errc::numeric: return 3;
        default: return 2;
        }
    }

private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw Error(code, what); }

} // namespace yoda
