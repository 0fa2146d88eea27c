#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace govi {

enum class Errc {
    // container / telemetry input
    NotMp4,
    TruncatedFile,
    MalformedBox,
    NoTelemetryTrack,
    InconsistentSampleTable,
    AlignmentError,
    IoError,
    TruncatedKlv,
    MalformedKlv,
    BadTypeCode,
    StreamNotFound,
    ScaleMismatch,
    // sync
    NonMonotonicPayloads,
    ZeroCount,
    MissingStream,
    CountMismatch,
    InvalidExposure,
    // allan
    SeriesTooShort,
    NonPositiveTau,
    FitRegionEmpty,
    // global map
    DuplicateKeyframe,
    UnknownKeyframe,
    UnknownLandmark,
    InvalidQuality,
    InvalidPose,
    MalformedEvent,
    // trajectory evaluation
    NoMatches,
    DegenerateConfiguration,
    EmptyPairs,
    InsufficientDetections,
    MalformedTrajectory,
    // registration
    EmptyCloud,
    TooFewPoints,
    ConsensusFailure,
    NoOverlap,
    MalformedPly,
    InvalidArgument,
};

std::string_view errc_name(Errc code) noexcept;

/// True for codes caused by bad or unreadable input (CLI exit code 2);
/// everything else is a computational failure (exit code 1).
bool is_input_error(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

} // namespace govi
