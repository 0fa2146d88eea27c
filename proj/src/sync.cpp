#include "govi/sync.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "govi/error.hpp"
#include "govi/text.hpp"

namespace govi::sync {

namespace {

void append_span(std::vector<double>& out, double begin, double end, std::size_t n)
{
    const double step = (end - begin) / double(n);
    for (std::size_t j = 0; j < n; ++j)
        out.push_back(begin + double(j) * step);
}

struct Timeline {
    std::vector<double> t;
    std::vector<std::array<double, 3>> v;
};

std::array<double, 3> sample_at(const Timeline& line, double t)
{
    if (t <= line.t.front())
        return line.v.front();
    if (t >= line.t.back())
        return line.v.back();
    auto hi = std::size_t(std::lower_bound(line.t.begin(), line.t.end(), t) - line.t.begin());
    if (line.t[hi] == t)
        return line.v[hi];
    std::size_t lo = hi - 1;
    double w = (t - line.t[lo]) / (line.t[hi] - line.t[lo]);
    std::array<double, 3> out{};
    for (std::size_t a = 0; a < 3; ++a)
        out[a] = line.v[lo][a] + w * (line.v[hi][a] - line.v[lo][a]);
    return out;
}

std::ofstream open_out(const std::filesystem::path& path)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        fail(Errc::IoError, "cannot write '" + path.string() + "'");
    return os;
}

std::vector<std::string> read_lines(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        fail(Errc::IoError, "cannot read '" + path.string() + "'");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        lines.push_back(std::move(line));
    }
    return lines;
}

} // namespace

std::vector<double> interpolate_sample_times(std::span<const double> payload_starts,
                                             std::span<const std::size_t> counts,
                                             std::optional<double> last_duration)
{
    const bool closed = counts.size() + 1 == payload_starts.size();
    if (!closed && counts.size() != payload_starts.size())
        fail(Errc::InvalidArgument, "need one count per payload (or per span between starts)");
    if (!closed && !last_duration)
        fail(Errc::InvalidArgument, "final payload span needs a duration");
    if (!closed && !(*last_duration > 0.0))
        fail(Errc::NonMonotonicPayloads, "final payload duration must be positive");
    for (std::size_t i = 1; i < payload_starts.size(); ++i)
        if (!(payload_starts[i] > payload_starts[i - 1]))
            fail(Errc::NonMonotonicPayloads, "payload " + std::to_string(i) + " does not start after its predecessor");

    std::vector<double> out;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] == 0)
            fail(Errc::ZeroCount, "payload " + std::to_string(i) + " has no samples");
        double begin = payload_starts[i];
        double end = i + 1 < payload_starts.size() ? payload_starts[i + 1] : begin + *last_duration;
        append_span(out, begin, end, counts[i]);
    }
    return out;
}

PayloadStreams decode_payload(const mp4::RawPayload& payload)
{
    PayloadStreams out;
    out.start = payload.start_time;
    out.duration = payload.duration;
    auto root = gpmf::parse_klv(payload.bytes);
    auto counts = gpmf::stream_counts(root);
    auto grab = [&](FourCC key, std::optional<gpmf::SensorStream>& slot) {
        if (counts.count(key))
            slot = gpmf::extract_stream(root, key);
    };
    grab(gpmf::kAccl, out.accel);
    grab(gpmf::kGyro, out.gyro);
    grab(gpmf::kShut, out.shutter);
    return out;
}

SyncedDataset build_dataset(std::span<const PayloadStreams> payloads, std::string recording_id)
{
    SyncedDataset ds;
    ds.meta.recording_id = std::move(recording_id);
    ds.meta.payload_count = payloads.size();
    if (payloads.empty())
        fail(Errc::MissingStream, "no payloads");

    for (std::size_t i = 1; i < payloads.size(); ++i)
        if (!(payloads[i].start > payloads[i - 1].start))
            fail(Errc::NonMonotonicPayloads, "payload " + std::to_string(i) + " does not start after its predecessor");

    std::vector<double> durations;
    for (const auto& p : payloads) {
        if (!(p.duration > 0.0))
            fail(Errc::NonMonotonicPayloads, "payload with non-positive duration");
        durations.push_back(p.duration);
    }
    std::nth_element(durations.begin(), durations.begin() + std::ptrdiff_t(durations.size() / 2), durations.end());
    const double nominal = durations[durations.size() / 2];
    const double origin = payloads.front().start;

    // Span of payload i, clipped so it never overlaps the next one.
    auto span_of = [&](std::size_t i) {
        double begin = payloads[i].start - origin;
        double end = begin + payloads[i].duration;
        if (i + 1 < payloads.size())
            end = std::min(end, payloads[i + 1].start - origin);
        return std::pair{begin, end};
    };

    for (std::size_t i = 1; i < payloads.size(); ++i) {
        double gap = payloads[i].start - payloads[i - 1].start;
        if (gap > 2.0 * nominal)
            ds.warnings.push_back("gap of " + text::fixed(gap, 3) + " s before payload " + std::to_string(i) +
                                  " (nominal " + text::fixed(nominal, 3) + " s): payloads likely dropped");
    }

    Timeline accel;
    Timeline gyro;
    bool have_shutter = false;
    double accel_span = 0.0;
    double gyro_span = 0.0;
    std::string axis_convention;

    for (std::size_t i = 0; i < payloads.size(); ++i) {
        const auto& p = payloads[i];
        auto [begin, end] = span_of(i);
        if (p.accel && p.gyro) {
            auto na = p.accel->rows();
            auto ng = p.gyro->rows();
            if ((na > ng ? na - ng : ng - na) > 2)
                fail(Errc::CountMismatch, "payload " + std::to_string(i) + " has " + std::to_string(na) +
                                              " ACCL vs " + std::to_string(ng) + " GYRO samples");
        }
        auto push = [&](const std::optional<gpmf::SensorStream>& s, Timeline& line, double& covered) {
            if (!s || s->rows() == 0)
                return;
            if (s->channels != 3)
                fail(Errc::MalformedKlv, "stream '" + s->key.str() + "' has " + std::to_string(s->channels) +
                                             " channels, expected 3");
            append_span(line.t, begin, end, s->rows());
            for (std::size_t r = 0; r < s->rows(); ++r)
                line.v.push_back({s->at(r, 0), s->at(r, 1), s->at(r, 2)});
            covered += end - begin;
        };
        push(p.accel, accel, accel_span);
        push(p.gyro, gyro, gyro_span);
        if (p.accel && axis_convention.empty())
            axis_convention = "accel " + p.accel->axes.describe();
        if (p.gyro && axis_convention.find("gyro") == std::string::npos)
            axis_convention += (axis_convention.empty() ? "" : "; ") + ("gyro " + p.gyro->axes.describe());

        if (p.shutter && p.shutter->rows() > 0) {
            have_shutter = true;
            std::vector<double> times;
            append_span(times, begin, end, p.shutter->rows());
            for (std::size_t r = 0; r < times.size(); ++r) {
                double exposure = p.shutter->at(r, 0);
                if (!(exposure > 0.0))
                    fail(Errc::InvalidExposure, "non-positive SHUT value in payload " + std::to_string(i));
                ds.frames.push_back({ds.frames.size(), times[r], exposure});
            }
        }
    }
    if (accel.t.empty())
        fail(Errc::MissingStream, "no ACCL samples in any payload");
    if (gyro.t.empty())
        fail(Errc::MissingStream, "no GYRO samples in any payload");
    if (!have_shutter)
        fail(Errc::MissingStream, "no SHUT samples in any payload");

    ds.imu.reserve(accel.t.size());
    for (std::size_t k = 0; k < accel.t.size(); ++k)
        ds.imu.push_back({accel.t[k], accel.v[k], sample_at(gyro, accel.t[k])});

    ds.meta.duration = span_of(payloads.size() - 1).second - span_of(0).first;
    ds.meta.accel_rate = accel_span > 0 ? double(accel.t.size()) / accel_span : 0.0;
    ds.meta.gyro_rate = gyro_span > 0 ? double(gyro.t.size()) / gyro_span : 0.0;
    ds.meta.frame_rate = ds.meta.duration > 0 ? double(ds.frames.size()) / ds.meta.duration : 0.0;
    ds.meta.axis_convention = axis_convention;
    return ds;
}

void export_imu_csv(const SyncedDataset& dataset, const std::filesystem::path& path)
{
    auto os = open_out(path);
    std::string buf = "t,ax,ay,az,gx,gy,gz\n";
    for (const auto& s : dataset.imu) {
        buf += text::fixed(s.t, 9);
        for (double v : s.accel) {
            buf += ',';
            buf += text::shortest(v);
        }
        for (double v : s.gyro) {
            buf += ',';
            buf += text::shortest(v);
        }
        buf += '\n';
        if (buf.size() > (1u << 20)) {
            os << buf;
            buf.clear();
        }
    }
    os << buf;
    if (!os)
        fail(Errc::IoError, "write failed for '" + path.string() + "'");
}

void export_frames_csv(const SyncedDataset& dataset, const std::filesystem::path& path)
{
    auto os = open_out(path);
    os << "index,t,exposure\n";
    for (const auto& f : dataset.frames)
        os << f.index << ',' << text::fixed(f.t, 9) << ',' << text::shortest(f.exposure) << '\n';
    if (!os)
        fail(Errc::IoError, "write failed for '" + path.string() + "'");
}

std::string format_manifest(const SyncedDataset& dataset, std::string_view imu_file, std::string_view frames_file)
{
    const auto& m = dataset.meta;
    std::ostringstream os;
    os << "recording_id: " << m.recording_id << '\n'
       << "clock_origin: first_payload_start\n"
       << "payload_count: " << m.payload_count << '\n'
       << "duration_s: " << text::fixed(m.duration, 6) << '\n'
       << "imu_samples: " << dataset.imu.size() << '\n'
       << "accel_rate_hz: " << text::fixed(m.accel_rate, 3) << '\n'
       << "gyro_rate_hz: " << text::fixed(m.gyro_rate, 3) << '\n'
       << "frame_count: " << dataset.frames.size() << '\n'
       << "frame_rate_hz: " << text::fixed(m.frame_rate, 3) << '\n'
       << "frame_time_reference: shutter_sample\n"
       << "axis_convention: " << m.axis_convention << '\n'
       << "imu_csv: " << imu_file << '\n'
       << "frames_csv: " << frames_file << '\n'
       << "warnings: " << dataset.warnings.size() << '\n';
    return os.str();
}

std::vector<ImuSample> read_imu_csv(const std::filesystem::path& path)
{
    auto lines = read_lines(path);
    std::vector<ImuSample> out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        auto line = text::trim(lines[i]);
        if (line.empty() || line.front() == '#' || (i == 0 && line.front() == 't'))
            continue;
        auto cols = text::split(line, ',');
        if (cols.size() != 7)
            fail(Errc::InvalidArgument, path.string() + ":" + std::to_string(i + 1) + ": expected 7 columns");
        ImuSample s;
        s.t = text::parse_double(cols[0], "t");
        for (std::size_t a = 0; a < 3; ++a) {
            s.accel[a] = text::parse_double(cols[1 + a], "accel");
            s.gyro[a] = text::parse_double(cols[4 + a], "gyro");
        }
        out.push_back(s);
    }
    return out;
}

std::vector<FrameStamp> read_frames_csv(const std::filesystem::path& path)
{
    auto lines = read_lines(path);
    std::vector<FrameStamp> out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        auto line = text::trim(lines[i]);
        if (line.empty() || line.front() == '#' || (i == 0 && line.front() == 'i'))
            continue;
        auto cols = text::split(line, ',');
        if (cols.size() != 3)
            fail(Errc::InvalidArgument, path.string() + ":" + std::to_string(i + 1) + ": expected 3 columns");
        out.push_back({std::size_t(text::parse_uint(cols[0], "index")), text::parse_double(cols[1], "t"),
                       text::parse_double(cols[2], "exposure")});
    }
    return out;
}

} // namespace govi::sync
