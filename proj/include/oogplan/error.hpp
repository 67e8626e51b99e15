#pragma once

#include <stdexcept>
#include <string>

namespace oogplan {

enum class Errc {
    insufficient_points,
    degenerate_geometry,
    empty_input,
    too_few_points,
    signal_too_short,
    empty_track_set,
    missing_object,
    no_relation_change,
    schema_violation,
    no_consensus,
    unrecognized_state,
    ambiguous_target,
    no_reference,
    missing_grasp_data,
    placement_failure,
    invalid_argument,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& msg)
        : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}

    Errc code() const { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

} // namespace oogplan
