#pragma once

// Per-payload telemetry to one timestamped visual-inertial dataset.
//
// Samples inside a payload are spread uniformly over the payload's time span;
// frames are stamped with the interpolated SHUT sample times. The clock origin
// is the first payload start.

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "govi/gpmf.hpp"
#include "govi/mp4_demux.hpp"

namespace govi::sync {

struct ImuSample {
    double t = 0.0;
    std::array<double, 3> accel{}; // m/s^2
    std::array<double, 3> gyro{};  // rad/s

    bool operator==(const ImuSample&) const = default;
};

struct FrameStamp {
    std::size_t index = 0;
    double t = 0.0;
    double exposure = 0.0;

    bool operator==(const FrameStamp&) const = default;
};

struct DatasetMeta {
    std::string recording_id;
    std::size_t payload_count = 0;
    double duration = 0.0;
    double accel_rate = 0.0;
    double gyro_rate = 0.0;
    double frame_rate = 0.0;
    std::string axis_convention;
};

struct SyncedDataset {
    std::vector<ImuSample> imu;
    std::vector<FrameStamp> frames;
    DatasetMeta meta;
    std::vector<std::string> warnings; // dropped payloads and similar, non-fatal
};

/// Sample j of payload i with n samples lands at T_i + j (T_{i+1} - T_i) / n.
/// With counts.size() == starts.size() - 1 the last start closes the final
/// span; with equal sizes the final span is [T_K, T_K + last_duration).
std::vector<double> interpolate_sample_times(std::span<const double> payload_starts,
                                             std::span<const std::size_t> counts,
                                             std::optional<double> last_duration = std::nullopt);

/// Sensor streams of one payload; absent streams stay empty.
struct PayloadStreams {
    double start = 0.0;
    double duration = 0.0;
    std::optional<gpmf::SensorStream> accel;
    std::optional<gpmf::SensorStream> gyro;
    std::optional<gpmf::SensorStream> shutter;
};

PayloadStreams decode_payload(const mp4::RawPayload& payload);

/// Accelerometer time base is the master clock. Gyroscope samples are
/// linearly interpolated onto it (exact copy when timelines coincide).
SyncedDataset build_dataset(std::span<const PayloadStreams> payloads, std::string recording_id = {});

void export_imu_csv(const SyncedDataset& dataset, const std::filesystem::path& path);
void export_frames_csv(const SyncedDataset& dataset, const std::filesystem::path& path);
std::string format_manifest(const SyncedDataset& dataset, std::string_view imu_file, std::string_view frames_file);

std::vector<ImuSample> read_imu_csv(const std::filesystem::path& path);
std::vector<FrameStamp> read_frames_csv(const std::filesystem::path& path);

} // namespace govi::sync
