#pragma once

#include "paramest/integrator.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace paramest {

enum class NoiseKind { white_gaussian, pink };

std::string_view to_string(NoiseKind kind);
/// Accepts "white_gaussian"/"white" and "pink"; throws std::invalid_argument otherwise.
NoiseKind parse_noise_kind(std::string_view text);

/// Additive observation noise. `level` is an absolute standard deviation.
struct NoiseSpec {
    NoiseKind kind = NoiseKind::white_gaussian;
    double level = 0.0;
    std::uint64_t seed = 0;
};

/// Noisy observations eta_ij of all state components, with weights sigma_ij.
struct MeasurementSet {
    std::string model_name;
    Eigen::VectorXd times;
    RowMatrix observations;
    RowMatrix weights;
    NoiseSpec noise;

    std::size_t size() const { return static_cast<std::size_t>(times.size()); }
    std::size_t dim() const { return static_cast<std::size_t>(observations.cols()); }
};

/// SplitMix64 finalizer. Used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x);

/// Seed for an independent stream `stream` derived from `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// I.i.d. N(0, level^2) samples from a mt19937_64 seeded with mix64(spec.seed).
std::vector<double> white_sequence(const NoiseSpec &spec, std::size_t count);

/// Zero-mean 1/f noise by spectral shaping, rescaled so the population standard
/// deviation equals spec.level exactly.
std::vector<double> pink_sequence(const NoiseSpec &spec, std::size_t count);

/// Dispatches on spec.kind.
std::vector<double> noise_sequence(const NoiseSpec &spec, std::size_t count);

/// Adds an independent noise stream to each state component; all weights are 1.
MeasurementSet corrupt(const Trajectory &trajectory, const NoiseSpec &spec);

/// Noise-free measurements on the same grid (weights 1).
MeasurementSet exact_measurements(const Trajectory &trajectory);

} // namespace paramest
