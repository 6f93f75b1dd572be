#pragma once

#include <cstdint>
#include <string_view>

namespace trafficlens::pipeline {

/// Labels used to derive per-subsystem seeds from the run seed.
namespace seed_label {
inline constexpr std::string_view kRansac = "calibrate.ransac";
inline constexpr std::string_view kDistortion = "calibrate.distortion";
inline constexpr std::string_view kDetectionNoise = "simulate.detections";
inline constexpr std::string_view kMatches = "simulate.matches";
inline constexpr std::string_view kFrames = "simulate.frames";
}  // namespace seed_label

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view s);

/// splitmix64(seed ^ fnv1a64(label)).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);

}  // namespace trafficlens::pipeline
