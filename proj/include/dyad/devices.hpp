#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dyad/config.hpp"
#include "json.hpp"

namespace dyad {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double norm() const;
    friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator*(double s, Vec3 v) { return {s * v.x, s * v.y, s * v.z}; }
    friend bool operator==(const Vec3&, const Vec3&) = default;
};

Vec3 cross(Vec3 a, Vec3 b);

struct Quaternion {
    double w = 1.0;
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double norm() const;
    Quaternion conjugate() const { return {w, -x, -y, -z}; }
    friend bool operator==(const Quaternion&, const Quaternion&) = default;
};

Quaternion multiply(const Quaternion& a, const Quaternion& b);
/// Rotation of `angle_rad` about the body forward (x) axis.
Quaternion roll_quaternion(double angle_rad);

struct ImuSample {
    double t = 0.0;   // s
    Vec3 accel;       // m/s^2, specific force in the body frame
    Vec3 gyro;        // rad/s
    std::optional<Vec3> mag;
};

struct OrientationState {
    Quaternion q;
    Vec3 integral_error;
    double kp = 1.0;
    double ki = 0.0;
};

/// Mahony complementary filter step. A zero-norm accelerometer reading leaves the state unchanged.
OrientationState mahony_update(OrientationState state, const ImuSample& sample, double dt);

/// Roll about the forward axis in degrees, (-180, 180].
double roll_angle(const Quaternion& q);

/// Accelerometer reading of a static handle held at `roll_deg` (gravity only).
Vec3 gravity_at_roll(double roll_deg, double g = 9.81);

enum class InputSource { Joystick, Pedal, Keyboard, Agent };

struct LateralCommand {
    int direction = 0;  // -1 left, 0 none, +1 right
    InputSource source = InputSource::Agent;

    friend bool operator==(const LateralCommand&, const LateralCommand&) = default;
};

struct PedalState {
    bool left = false;
    bool right = false;
};

enum class Key { ArrowLeft, ArrowRight, Other };

/// Positive roll is a rightward tilt.
LateralCommand joystick_map(double roll_deg, const GameConfig& config);
LateralCommand pedal_map(PedalState p);
LateralCommand keyboard_map(const std::set<Key>& held);

Key key_from_string(const std::string& name);

/// Reads an IMU stream in JSON Lines form: {t, ax, ay, az, gx, gy, gz, mx?, my?, mz?}.
std::vector<ImuSample> read_imu_stream(const std::filesystem::path& path);
ImuSample parse_imu_line(const std::string& line);
ImuSample imu_from_json(const nlohmann::json& j);
nlohmann::json imu_to_json(const ImuSample& s);
std::string_view to_string(Key k);

}  // namespace dyad
