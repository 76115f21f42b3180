#include "gapsense/io.h"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string_view>

namespace gapsense {

namespace {

double parse_double(std::string_view field, std::size_t line, const char* name) {
    while (!field.empty() && field.front() == ' ') {
        field.remove_prefix(1);
    }
    while (!field.empty() && (field.back() == ' ' || field.back() == '\r')) {
        field.remove_suffix(1);
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
        throw ParseError(std::string("malformed ") + name + " value '" + std::string(field) + "'", line);
    }
    if (!std::isfinite(v)) {
        throw ParseError(std::string("non-finite ") + name + " value", line);
    }
    return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto next = line.find(sep, pos);
        if (next == std::string_view::npos) {
            out.push_back(line.substr(pos));
            break;
        }
        out.push_back(line.substr(pos, next - pos));
        pos = next + 1;
    }
    return out;
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
    }
}

void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xFFu));
    out.push_back(static_cast<char>((v >> 8) & 0xFFu));
}

std::uint32_t get_u32(const std::string& in, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) {
        v = (v << 8) | static_cast<unsigned char>(in[at + static_cast<std::size_t>(i)]);
    }
    return v;
}

std::uint16_t get_u16(const std::string& in, std::size_t at) {
    return static_cast<std::uint16_t>(static_cast<unsigned char>(in[at]) |
                                      (static_cast<unsigned char>(in[at + 1]) << 8));
}

} // namespace

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write '" + path.string() + "'");
    }
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) {
        throw IoError("write failed for '" + path.string() + "'");
    }
}

std::string format_number(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string format_fixed(double v, int decimals) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, decimals);
    return std::string(buf, ptr);
}

// ---------------------------------------------------------------------------
// IMU CSV
// ---------------------------------------------------------------------------

ImuStream parse_imu_csv(const std::string& text, const std::string& user_id, double nominal_rate_hz) {
    const double period = 1000.0 / nominal_rate_hz;
    std::vector<double> t;
    std::vector<std::array<double, 3>> a;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool header_seen = false;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string::npos) {
            end = text.size();
        }
        std::string_view line(text.data() + pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (!header_seen) {
            if (line != "t_ms,ax,ay,az") {
                throw ParseError("expected header 't_ms,ax,ay,az'", line_no);
            }
            header_seen = true;
            continue;
        }
        if (line.empty()) {
            continue;
        }
        const auto fields = split(line, ',');
        if (fields.size() != 4) {
            throw ParseError("expected 4 fields, got " + std::to_string(fields.size()), line_no);
        }
        const double ts = parse_double(fields[0], line_no, "t_ms");
        const std::array<double, 3> sample{parse_double(fields[1], line_no, "ax"),
                                           parse_double(fields[2], line_no, "ay"),
                                           parse_double(fields[3], line_no, "az")};
        if (!t.empty()) {
            const double dt = ts - t.back();
            if (!(dt > 0.0)) {
                throw ValidationError("timestamp regression at line " + std::to_string(line_no));
            }
            const auto missing = std::llround(dt / period) - 1;
            if (missing > 2) {
                throw AlignmentError("gap of " + std::to_string(missing) + " samples before line " +
                                     std::to_string(line_no));
            }
            const std::array<double, 3> prev = a.back();
            const double prev_t = t.back();
            for (long long m = 1; m <= missing; ++m) {
                const double w = static_cast<double>(m) / static_cast<double>(missing + 1);
                std::array<double, 3> fill{};
                for (std::size_t k = 0; k < 3; ++k) {
                    fill[k] = (1.0 - w) * prev[k] + w * sample[k];
                }
                a.push_back(fill);
                t.push_back(prev_t + w * dt);
            }
        }
        t.push_back(ts);
        a.push_back(sample);
    }
    if (!header_seen) {
        throw ParseError("missing header", 1);
    }
    if (t.empty()) {
        throw ValidationError("imu file contains no samples");
    }

    Eigen::VectorXd tv(static_cast<Eigen::Index>(t.size()));
    Accel av(3, static_cast<Eigen::Index>(t.size()));
    for (std::size_t i = 0; i < t.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        tv[k] = t[i];
        av.col(k) << a[i][0], a[i][1], a[i][2];
    }
    ImuStream s(user_id, std::move(tv), std::move(av), nominal_rate_hz);
    s.validate();
    return s;
}

ImuStream read_imu_csv(const fs::path& path, const std::string& user_id, double nominal_rate_hz) {
    return parse_imu_csv(read_file(path), user_id, nominal_rate_hz);
}

std::string format_imu_csv(const ImuStream& s) {
    std::string out = "t_ms,ax,ay,az\n";
    out.reserve(static_cast<std::size_t>(s.size()) * 40 + out.size());
    for (Eigen::Index k = 0; k < s.size(); ++k) {
        out += format_number(s.t_ms[k]);
        for (int axis = 0; axis < 3; ++axis) {
            out += ',';
            out += format_fixed(s.accel(axis, k), 6);
        }
        out += '\n';
    }
    return out;
}

void write_imu_csv(const fs::path& path, const ImuStream& s) { write_file(path, format_imu_csv(s)); }

// ---------------------------------------------------------------------------
// WAV
// ---------------------------------------------------------------------------

float quantize_pcm16(float x) {
    const float q = std::clamp(std::nearbyint(x * 32768.0f), -32768.0f, 32767.0f);
    return q / 32768.0f;
}

AudioStream parse_wav(const std::string& bytes, double t0_ms) {
    if (bytes.size() < 12 || bytes.compare(0, 4, "RIFF") != 0 || bytes.compare(8, 4, "WAVE") != 0) {
        throw ValidationError("not a RIFF/WAVE file");
    }
    std::size_t pos = 12;
    bool have_fmt = false;
    std::uint32_t rate = 0;
    std::uint16_t channels = 0;
    std::uint16_t bits = 0;
    std::uint16_t format = 0;
    while (pos + 8 <= bytes.size()) {
        const std::string id = bytes.substr(pos, 4);
        const std::uint32_t size = get_u32(bytes, pos + 4);
        const std::size_t body = pos + 8;
        if (body + size > bytes.size()) {
            throw ValidationError("truncated '" + id + "' chunk");
        }
        if (id == "fmt ") {
            if (size < 16) {
                throw ValidationError("fmt chunk too short");
            }
            format = get_u16(bytes, body);
            channels = get_u16(bytes, body + 2);
            rate = get_u32(bytes, body + 4);
            bits = get_u16(bytes, body + 14);
            have_fmt = true;
        } else if (id == "data") {
            if (!have_fmt) {
                throw ValidationError("data chunk before fmt chunk");
            }
            if (format != 1 || channels != 1 || bits != 16) {
                throw ValidationError("only mono PCM16 WAV is supported");
            }
            const auto n = static_cast<Eigen::Index>(size / 2);
            Eigen::VectorXf samples(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                const auto raw = static_cast<std::int16_t>(get_u16(bytes, body + 2 * static_cast<std::size_t>(i)));
                samples[i] = static_cast<float>(raw) / 32768.0f;
            }
            AudioStream a(std::move(samples), static_cast<double>(rate), t0_ms);
            a.validate();
            return a;
        }
        pos = body + size + (size & 1u);
    }
    throw ValidationError("WAV file has no data chunk");
}

AudioStream read_wav(const fs::path& path, double t0_ms) { return parse_wav(read_file(path), t0_ms); }

std::string encode_wav(const AudioStream& a) {
    const auto n = static_cast<std::uint32_t>(a.size());
    const auto rate = static_cast<std::uint32_t>(std::lround(a.rate_hz));
    std::string out;
    out.reserve(44 + 2 * static_cast<std::size_t>(n));
    out += "RIFF";
    put_u32(out, 36 + 2 * n);
    out += "WAVE";
    out += "fmt ";
    put_u32(out, 16);
    put_u16(out, 1);
    put_u16(out, 1);
    put_u32(out, rate);
    put_u32(out, rate * 2);
    put_u16(out, 2);
    put_u16(out, 16);
    out += "data";
    put_u32(out, 2 * n);
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        const float q = std::clamp(std::nearbyint(a.samples[i] * 32768.0f), -32768.0f, 32767.0f);
        put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
    }
    return out;
}

void write_wav(const fs::path& path, const AudioStream& a) { write_file(path, encode_wav(a)); }

// ---------------------------------------------------------------------------
// Ground truth
// ---------------------------------------------------------------------------

std::vector<TruthRecord> parse_truth_jsonl(const std::string& text) {
    std::vector<TruthRecord> out;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            const auto j = nlohmann::json::parse(line);
            TruthRecord r;
            r.user = j.at("user").get<std::string>();
            r.interval = Interval(j.at("start_ms").get<double>(), j.at("end_ms").get<double>());
            r.label = j.at("label").get<std::string>();
            r.kind = activity_kind_from_string(j.value("kind", std::string("primary")));
            out.push_back(std::move(r));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("bad ground truth record: ") + e.what(), line_no);
        } catch (const ValidationError& e) {
            throw ParseError(e.what(), line_no);
        }
    }
    return out;
}

std::vector<TruthRecord> read_truth_jsonl(const fs::path& path) { return parse_truth_jsonl(read_file(path)); }

void write_truth_jsonl(const fs::path& path, const std::vector<TruthRecord>& truth) {
    std::string out;
    for (const auto& r : truth) {
        nlohmann::ordered_json j;
        j["user"] = r.user;
        j["start_ms"] = r.interval.start_ms;
        j["end_ms"] = r.interval.end_ms;
        j["label"] = r.label;
        j["kind"] = to_string(r.kind);
        out += j.dump();
        out += '\n';
    }
    write_file(path, out);
}

// ---------------------------------------------------------------------------
// Scenario
// ---------------------------------------------------------------------------

Scenario load_scenario(const std::array<fs::path, 2>& imu_paths, const fs::path& audio_path,
                       const std::optional<fs::path>& truth_path, double audio_t0_ms,
                       const std::array<std::string, 2>& user_ids) {
    Scenario scn;
    scn.imu_a = read_imu_csv(imu_paths[0], user_ids[0]);
    scn.imu_b = read_imu_csv(imu_paths[1], user_ids[1]);
    scn.audio = read_wav(audio_path, audio_t0_ms);
    if (truth_path) {
        scn.ground_truth = read_truth_jsonl(*truth_path);
    }
    rebase_to_earliest(scn.imu_a, scn.imu_b, scn.audio, &scn.ground_truth);

    const Interval sa = scn.imu_a.span();
    const Interval sb = scn.imu_b.span();
    const Interval su = scn.audio.span();
    const double common_start = std::max({sa.start_ms, sb.start_ms, su.start_ms});
    const double common_end = std::min({sa.end_ms, sb.end_ms, su.end_ms});
    if (!(common_end > common_start)) {
        throw AlignmentError("imu and audio streams share no common time span");
    }
    scn.horizon_ms = common_end;
    scn.validate();
    return scn;
}

ScenarioFiles write_scenario(const fs::path& dir, const Scenario& scn) {
    fs::create_directories(dir);
    ScenarioFiles files{dir / "u1.csv", dir / "u2.csv", dir / "global.wav", dir / "truth.jsonl"};
    write_imu_csv(files.imu_a, scn.imu_a);
    write_imu_csv(files.imu_b, scn.imu_b);
    write_wav(files.audio, scn.audio);
    write_truth_jsonl(files.truth, scn.ground_truth);
    return files;
}

} // namespace gapsense
