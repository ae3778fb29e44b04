#include "lzeval/imu.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace lzeval {

bool accel_trusted(const Vec3& accel) {
    double n = accel.norm();
    return n > 0.5 * kGravity && n < 1.5 * kGravity;
}

OrientationState madgwick_update(const OrientationState& state, const ImuSample& s) {
    if (!s.gyro.finite() || !s.accel.finite() || !std::isfinite(s.dt) || s.dt <= 0.0) {
        throw InputError("IMU sample must be finite with dt > 0");
    }
    const double w = state.q.w, x = state.q.x, y = state.q.y, z = state.q.z;
    const Vec3& g = s.gyro;

    // Rate of change from the gyro: 0.5 * q x (0, gyro).
    double dw = 0.5 * (-x * g.x - y * g.y - z * g.z);
    double dx = 0.5 * (w * g.x + y * g.z - z * g.y);
    double dy = 0.5 * (w * g.y - x * g.z + z * g.x);
    double dz = 0.5 * (w * g.z + x * g.y - y * g.x);

    if (accel_trusted(s.accel)) {
        Vec3 a = s.accel.normalized();
        // Objective: predicted gravity direction in the body frame minus the
        // measured one; sN is the (unnormalized) gradient.
        double f1 = 2.0 * (x * z - w * y) - a.x;
        double f2 = 2.0 * (w * x + y * z) - a.y;
        double f3 = 2.0 * (0.5 - x * x - y * y) - a.z;
        double s0 = -2.0 * y * f1 + 2.0 * x * f2;
        double s1 = 2.0 * z * f1 + 2.0 * w * f2 - 4.0 * x * f3;
        double s2 = -2.0 * w * f1 + 2.0 * z * f2 - 4.0 * y * f3;
        double s3 = 2.0 * x * f1 + 2.0 * y * f2;
        double sn = std::sqrt(s0 * s0 + s1 * s1 + s2 * s2 + s3 * s3);
        if (sn > 1e-12) {
            dw -= state.beta * s0 / sn;
            dx -= state.beta * s1 / sn;
            dy -= state.beta * s2 / sn;
            dz -= state.beta * s3 / sn;
        }
    }

    OrientationState out = state;
    out.q = UnitQuaternion::normalized(w + s.dt * dw, x + s.dt * dx, y + s.dt * dy,
                                       z + s.dt * dz);
    return out;
}

Vec3 gravity_up(const OrientationState& state) {
    return rotate_vector(state.q.conjugate(), Vec3{0, 0, 1});
}

OrientationState orientation_from_accel(const Vec3& accel, double beta) {
    if (!accel.finite() || accel.norm() < 1e-9) {
        throw InputError("cannot derive orientation from a zero accel reading");
    }
    // q rotates the measured body-frame up direction onto world +z.
    OrientationState st;
    st.q = rotation_between(accel.normalized(), Vec3{0, 0, 1});
    st.beta = beta;
    return st;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double_field(const std::string& s, const std::string& context) {
    try {
        size_t pos = 0;
        double v = std::stod(s, &pos);
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw IoError("bad numeric field '" + s + "' in " + context);
    }
}

}  // namespace

std::vector<ImuSample> load_imu_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw IoError(path.string() + ": empty IMU file");
    auto header = split_csv_line(line);
    const std::vector<std::string> expected{"t_sec", "gx", "gy", "gz", "ax", "ay", "az"};
    if (header != expected) {
        throw IoError(path.string() + ": bad IMU CSV header (want t_sec,gx,gy,gz,ax,ay,az)");
    }
    std::vector<ImuSample> samples;
    double prev_t = 0.0;
    bool first = true;
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 7) {
            throw IoError(path.string() + ": wrong field count on line " +
                          std::to_string(lineno));
        }
        std::string ctx = path.string() + " line " + std::to_string(lineno);
        double t = parse_double_field(fields[0], ctx);
        ImuSample s;
        s.gyro = {parse_double_field(fields[1], ctx), parse_double_field(fields[2], ctx),
                  parse_double_field(fields[3], ctx)};
        s.accel = {parse_double_field(fields[4], ctx), parse_double_field(fields[5], ctx),
                   parse_double_field(fields[6], ctx)};
        s.dt = t - prev_t;
        if (first && t <= 0.0) {
            throw IoError(path.string() + ": first timestamp must be positive");
        }
        if (s.dt <= 0.0) {
            throw IoError(path.string() + ": non-increasing timestamp on line " +
                          std::to_string(lineno));
        }
        prev_t = t;
        first = false;
        samples.push_back(s);
    }
    return samples;
}

void save_imu_csv(const std::vector<ImuSample>& samples,
                  const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "t_sec,gx,gy,gz,ax,ay,az\n";
    char buf[256];
    double t = 0.0;
    for (const ImuSample& s : samples) {
        t += s.dt;
        std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", t, s.gyro.x,
                      s.gyro.y, s.gyro.z, s.accel.x, s.accel.y, s.accel.z);
        out << buf;
    }
    if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace lzeval
