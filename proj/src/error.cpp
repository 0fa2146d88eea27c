#include "govi/error.hpp"

namespace govi {

std::string_view errc_name(Errc code) noexcept
{
    switch (code) {
    case Errc::NotMp4: return "NotMp4";
    case Errc::TruncatedFile: return "TruncatedFile";
    case Errc::MalformedBox: return "MalformedBox";
    case Errc::NoTelemetryTrack: return "NoTelemetryTrack";
    case Errc::InconsistentSampleTable: return "InconsistentSampleTable";
    case Errc::AlignmentError: return "AlignmentError";
    case Errc::IoError: return "IoError";
    case Errc::TruncatedKlv: return "TruncatedKlv";
    case Errc::MalformedKlv: return "MalformedKlv";
    case Errc::BadTypeCode: return "BadTypeCode";
    case Errc::StreamNotFound: return "StreamNotFound";
    case Errc::ScaleMismatch: return "ScaleMismatch";
    case Errc::NonMonotonicPayloads: return "NonMonotonicPayloads";
    case Errc::ZeroCount: return "ZeroCount";
    case Errc::MissingStream: return "MissingStream";
    case Errc::CountMismatch: return "CountMismatch";
    case Errc::InvalidExposure: return "InvalidExposure";
    case Errc::SeriesTooShort: return "SeriesTooShort";
    case Errc::NonPositiveTau: return "NonPositiveTau";
    case Errc::FitRegionEmpty: return "FitRegionEmpty";
    case Errc::DuplicateKeyframe: return "DuplicateKeyframe";
    case Errc::UnknownKeyframe: return "UnknownKeyframe";
    case Errc::UnknownLandmark: return "UnknownLandmark";
    case Errc::InvalidQuality: return "InvalidQuality";
    case Errc::InvalidPose: return "InvalidPose";
    case Errc::MalformedEvent: return "MalformedEvent";
    case Errc::NoMatches: return "NoMatches";
    case Errc::DegenerateConfiguration: return "DegenerateConfiguration";
    case Errc::EmptyPairs: return "EmptyPairs";
    case Errc::InsufficientDetections: return "InsufficientDetections";
    case Errc::MalformedTrajectory: return "MalformedTrajectory";
    case Errc::EmptyCloud: return "EmptyCloud";
    case Errc::TooFewPoints: return "TooFewPoints";
    case Errc::ConsensusFailure: return "ConsensusFailure";
    case Errc::NoOverlap: return "NoOverlap";
    case Errc::MalformedPly: return "MalformedPly";
    case Errc::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

bool is_input_error(Errc code) noexcept
{
    switch (code) {
    case Errc::NotMp4:
    case Errc::TruncatedFile:
    case Errc::MalformedBox:
    case Errc::NoTelemetryTrack:
    case Errc::InconsistentSampleTable:
    case Errc::AlignmentError:
    case Errc::IoError:
    case Errc::TruncatedKlv:
    case Errc::MalformedKlv:
    case Errc::BadTypeCode:
    case Errc::StreamNotFound:
    case Errc::ScaleMismatch:
    case Errc::MissingStream:
    case Errc::MalformedEvent:
    case Errc::MalformedTrajectory:
    case Errc::MalformedPly:
    case Errc::InvalidArgument:
    case Errc::SeriesTooShort:
    case Errc::NonMonotonicPayloads:
        return true;
    default:
        return false;
    }
}

} // namespace govi
