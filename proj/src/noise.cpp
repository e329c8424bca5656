#include "paramest/noise.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <numeric>
#include <random>
#include <stdexcept>

namespace paramest {

std::string_view to_string(NoiseKind kind) {
    switch (kind) {
    case NoiseKind::white_gaussian: return "white_gaussian";
    case NoiseKind::pink: return "pink";
    }
    return "unknown";
}

NoiseKind parse_noise_kind(std::string_view text) {
    if (text == "white_gaussian" || text == "white") return NoiseKind::white_gaussian;
    if (text == "pink") return NoiseKind::pink;
    throw std::invalid_argument("unknown noise kind '" + std::string(text) + "'");
}

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return mix64(seed ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

namespace {

void check_level(const NoiseSpec &spec) {
    if (!(spec.level >= 0.0) || !std::isfinite(spec.level)) {
        throw std::invalid_argument("noise level must be finite and >= 0");
    }
}

} // namespace

std::vector<double> white_sequence(const NoiseSpec &spec, std::size_t count) {
    check_level(spec);
    std::vector<double> out(count, 0.0);
    if (spec.level == 0.0) {
        return out;
    }
    std::mt19937_64 gen(mix64(spec.seed));
    std::normal_distribution<double> dist(0.0, 1.0);
    for (double &v : out) {
        v = spec.level * dist(gen);
    }
    return out;
}

std::vector<double> pink_sequence(const NoiseSpec &spec, std::size_t count) {
    check_level(spec);
    std::vector<double> out(count, 0.0);
    if (spec.level == 0.0 || count < 2) {
        return out;
    }

    std::mt19937_64 gen(mix64(spec.seed));
    std::normal_distribution<double> dist(0.0, 1.0);

    // Hermitian spectrum: bin f gets a complex Gaussian scaled by 1/sqrt(f), DC is zero.
    std::vector<std::complex<double>> spectrum(count, {0.0, 0.0});
    const std::size_t half = count / 2;
    for (std::size_t f = 1; f <= half; ++f) {
        const double scale = 1.0 / std::sqrt(static_cast<double>(f));
        const double re = dist(gen);
        const double im = dist(gen);
        if (2 * f == count) {
            // Nyquist bin of an even-length transform must be real.
            spectrum[f] = {scale * re, 0.0};
        } else {
            spectrum[f] = {scale * re, scale * im};
            spectrum[count - f] = std::conj(spectrum[f]);
        }
    }

    Eigen::FFT<double> fft;
    fft.inv(out, spectrum);
    out.resize(count);

    const double n = static_cast<double>(count);
    const double mean = std::accumulate(out.begin(), out.end(), 0.0) / n;
    double ss = 0.0;
    for (double &v : out) {
        v -= mean;
        ss += v * v;
    }
    const double sd = std::sqrt(ss / n);
    if (sd == 0.0) {
        std::fill(out.begin(), out.end(), 0.0);
        return out;
    }
    const double factor = spec.level / sd;
    for (double &v : out) {
        v *= factor;
    }
    return out;
}

std::vector<double> noise_sequence(const NoiseSpec &spec, std::size_t count) {
    return spec.kind == NoiseKind::pink ? pink_sequence(spec, count) : white_sequence(spec, count);
}

MeasurementSet corrupt(const Trajectory &trajectory, const NoiseSpec &spec) {
    check_level(spec);
    MeasurementSet m;
    m.model_name = trajectory.model_name;
    m.times = trajectory.times;
    m.observations = trajectory.states;
    m.weights = RowMatrix::Ones(trajectory.states.rows(), trajectory.states.cols());
    m.noise = spec;

    const std::size_t k = trajectory.size();
    for (std::size_t i = 0; i < trajectory.dim(); ++i) {
        NoiseSpec component = spec;
        component.seed = derive_seed(spec.seed, i);
        const auto eps = noise_sequence(component, k);
        for (std::size_t j = 0; j < k; ++j) {
            m.observations(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) += eps[j];
        }
    }
    return m;
}

MeasurementSet exact_measurements(const Trajectory &trajectory) {
    return corrupt(trajectory, NoiseSpec{NoiseKind::white_gaussian, 0.0, 0});
}

} // namespace paramest
