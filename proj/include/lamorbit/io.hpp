#pragma once

#include <cstdint>
#include <string>

#include "lamorbit/continuation.hpp"

// Deterministic serialization: orbit and branch JSON, branch CSV with
// 17-significant-digit floats, and the FNV-1a configuration hash stamped
// into every output.

namespace lamorbit::io {

inline constexpr const char* kToolVersion = "0.1.0";

std::uint64_t fnv1a64(const std::string& data);
std::string hash_hex(const std::string& data);

std::string format17(double v);

/// {"meta": {eps, mu, P, lambda, residual, config_hash, version},
///  "mesh": [tau...], "states": [[u, v, w, z]...]} with states at mesh nodes.
std::string orbit_to_json(const OrbitProfile& profile, const std::string& config_hash);

/// Rebuild a profile from orbit JSON. Stage values are interpolated linearly
/// between nodes; re-converge with solve_periodic before use.
OrbitProfile orbit_from_json(const std::string& text);

/// step,mu,eps,P,lambda,fold rows at 17 significant digits.
std::string branch_to_csv(const Branch& branch);

std::string branch_to_json(const Branch& branch, const std::string& config_hash);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace lamorbit::io
