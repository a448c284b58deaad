#include "dyad/devices.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "json.hpp"

namespace dyad {

namespace {
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

Vec3 normalized(Vec3 v) {
    const double n = v.norm();
    return {v.x / n, v.y / n, v.z / n};
}
}  // namespace

double Vec3::norm() const { return std::sqrt(x * x + y * y + z * z); }

Vec3 cross(Vec3 a, Vec3 b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

double Quaternion::norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

Quaternion multiply(const Quaternion& a, const Quaternion& b) {
    return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

Quaternion roll_quaternion(double angle_rad) {
    return {std::cos(angle_rad / 2.0), std::sin(angle_rad / 2.0), 0.0, 0.0};
}

OrientationState mahony_update(OrientationState state, const ImuSample& sample, double dt) {
    if (!(dt > 0.0)) throw InputError("mahony_update requires dt > 0");
    if (!(sample.accel.norm() > 0.0)) return state;

    const Vec3 a = normalized(sample.accel);
    const auto& q = state.q;

    // Gravity direction in the body frame predicted by the current attitude.
    const Vec3 v{2.0 * (q.x * q.z - q.w * q.y), 2.0 * (q.w * q.x + q.y * q.z),
                 q.w * q.w - q.x * q.x - q.y * q.y + q.z * q.z};
    Vec3 error = cross(a, v);

    if (sample.mag && sample.mag->norm() > 0.0) {
        const Vec3 m = normalized(*sample.mag);
        // Earth-frame field flattened onto the x-z plane.
        const double hx = 2.0 * (m.x * (0.5 - q.y * q.y - q.z * q.z) + m.y * (q.x * q.y - q.w * q.z) +
                                 m.z * (q.x * q.z + q.w * q.y));
        const double hy = 2.0 * (m.x * (q.x * q.y + q.w * q.z) + m.y * (0.5 - q.x * q.x - q.z * q.z) +
                                 m.z * (q.y * q.z - q.w * q.x));
        const double bx = std::sqrt(hx * hx + hy * hy);
        const double bz = 2.0 * (m.x * (q.x * q.z - q.w * q.y) + m.y * (q.y * q.z + q.w * q.x) +
                                 m.z * (0.5 - q.x * q.x - q.y * q.y));
        const Vec3 w{2.0 * (bx * (0.5 - q.y * q.y - q.z * q.z) + bz * (q.x * q.z - q.w * q.y)),
                     2.0 * (bx * (q.x * q.y - q.w * q.z) + bz * (q.w * q.x + q.y * q.z)),
                     2.0 * (bx * (q.w * q.y + q.x * q.z) + bz * (0.5 - q.x * q.x - q.y * q.y))};
        error = error + cross(m, w);
    }

    Vec3 rate = sample.gyro;
    if (state.ki > 0.0) {
        state.integral_error = state.integral_error + (state.ki * dt) * error;
        rate = rate + state.integral_error;
    } else {
        state.integral_error = {};
    }
    rate = rate + state.kp * error;

    const Quaternion dq = multiply(q, Quaternion{0.0, rate.x, rate.y, rate.z});
    Quaternion next{q.w + 0.5 * dt * dq.w, q.x + 0.5 * dt * dq.x, q.y + 0.5 * dt * dq.y,
                    q.z + 0.5 * dt * dq.z};
    const double n = next.norm();
    state.q = {next.w / n, next.x / n, next.y / n, next.z / n};
    return state;
}

double roll_angle(const Quaternion& q) {
    double deg = std::atan2(2.0 * (q.w * q.x + q.y * q.z), 1.0 - 2.0 * (q.x * q.x + q.y * q.y)) * kRadToDeg;
    if (deg <= -180.0) deg = 180.0;
    return deg;
}

Vec3 gravity_at_roll(double roll_deg, double g) {
    const double r = roll_deg / kRadToDeg;
    return {0.0, g * std::sin(r), g * std::cos(r)};
}

LateralCommand joystick_map(double roll_deg, const GameConfig& config) {
    int dir = 0;
    if (roll_deg > config.deadzone) dir = 1;
    else if (roll_deg < -config.deadzone) dir = -1;
    return {dir, InputSource::Joystick};
}

LateralCommand pedal_map(PedalState p) {
    return {static_cast<int>(p.right) - static_cast<int>(p.left), InputSource::Pedal};
}

LateralCommand keyboard_map(const std::set<Key>& held) {
    const int left = held.contains(Key::ArrowLeft) ? 1 : 0;
    const int right = held.contains(Key::ArrowRight) ? 1 : 0;
    return {right - left, InputSource::Keyboard};
}

std::string_view to_string(Key k) {
    switch (k) {
        case Key::ArrowLeft: return "ArrowLeft";
        case Key::ArrowRight: return "ArrowRight";
        case Key::Other: return "Other";
    }
    return "Other";
}

Key key_from_string(const std::string& name) {
    if (name == "ArrowLeft") return Key::ArrowLeft;
    if (name == "ArrowRight") return Key::ArrowRight;
    return Key::Other;
}

ImuSample imu_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw InputError("IMU sample must be an object");
    auto num = [&](const char* key) {
        if (!j.contains(key) || !j[key].is_number()) throw InputError(std::string("IMU sample missing ") + key);
        return j[key].get<double>();
    };
    ImuSample s;
    s.t = num("t");
    s.accel = {num("ax"), num("ay"), num("az")};
    s.gyro = {num("gx"), num("gy"), num("gz")};
    if (j.contains("mx") || j.contains("my") || j.contains("mz")) s.mag = Vec3{num("mx"), num("my"), num("mz")};
    return s;
}

nlohmann::json imu_to_json(const ImuSample& s) {
    nlohmann::json j{{"t", s.t},        {"ax", s.accel.x}, {"ay", s.accel.y}, {"az", s.accel.z},
                     {"gx", s.gyro.x},  {"gy", s.gyro.y},  {"gz", s.gyro.z}};
    if (s.mag) {
        j["mx"] = s.mag->x;
        j["my"] = s.mag->y;
        j["mz"] = s.mag->z;
    }
    return j;
}

ImuSample parse_imu_line(const std::string& line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("bad IMU line: ") + e.what());
    }
    return imu_from_json(j);
}

std::vector<ImuSample> read_imu_stream(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open IMU stream " + path.string());
    std::vector<ImuSample> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto s = parse_imu_line(line);
        if (!out.empty() && !(s.t > out.back().t))
            throw InputError("IMU timestamps must be strictly increasing");
        out.push_back(s);
    }
    return out;
}

}  // namespace dyad
