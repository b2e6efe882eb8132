#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>

#include "chemolab/grid.hpp"

namespace chemolab {

/// Which Gagliardo-Nirenberg-type inequality to probe.
///  ineq_4_2_2:    ||f||_4 <= C (||grad f||_2^{1/2} ||f||_2^{1/2} + ||f||_2)
///  ineq_L3:       ||f||_3 <= C ||f||_1^{1/3} ||f||_{W^{1,2}}^{2/3}
///  ladyzhenskaya: ||grad f||_4^4 <= C ||grad f||_2^2 ||Lap f||_2^2   (zero-flux f)
enum class GnMode { ineq_4_2_2, ineq_L3, ladyzhenskaya };

GnMode parse_gn_mode(std::string_view name);
std::string_view to_string(GnMode mode);

/// Left side over right side without the constant, or nullopt when the right
/// side degenerates (f == 0, or grad f == 0 for the Ladyzhenskaya form).
std::optional<double> gn_ratio(const ScalarField& f, GnMode mode);

/// sum_{k,l <= max_mode} a_kl cos(k pi x/lx) cos(l pi y/ly), a_kl ~ N(0,1)/(1+k^2+l^2).
/// Every term satisfies the zero-flux condition.
ScalarField random_cosine_field(const Grid& grid, std::mt19937_64& rng, int max_mode);

struct GnProbeOptions {
    std::uint64_t seed = 20240611;
    int max_mode = 6;
};

/// Running maximum of gn_ratio over n_samples random cosine fields. The i-th
/// sample depends only on (seed, i), so the value is nondecreasing in n_samples.
double gn_probe(const Grid& grid, int n_samples, GnMode mode, const GnProbeOptions& opts = {});

/// safety * max over all three modes; the working constant for threshold checks.
double probe_working_cgn(const Grid& grid, int n_samples, double safety = 1.5, const GnProbeOptions& opts = {});

}  // namespace chemolab
