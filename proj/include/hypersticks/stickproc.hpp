// Poisson stick process: intensity measures, window and line-restricted samplers.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "hypersticks/hypgeo.hpp"
#include "hypersticks/rng.hpp"

namespace hs {

struct ProcessConfig {
    double lambda = 0.0;
    double L = 0.0;
    double window_radius = 0.0;
    std::uint64_t seed = 0;
};

struct TripleBox {
    double rho1 = 0.0, rho2 = 0.0;
    double phi1 = 0.0, phi2 = 0.0;
    double r1 = 0.0, r2 = 0.0;
};

struct StickSample {
    ProcessConfig config;
    std::vector<Stick> sticks;
    // Number of sticks drawn in the sampling ball (before any pruning).
    std::uint64_t realized_count = 0;
    // Radius of the ball the centres were drawn from.
    double sample_radius = 0.0;
};

struct CapExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Distribution of the hitting angle in the restricted sampler. `uniform` is the
// deliberately wrong law used as a negative control.
enum class PhiLaw { sine, uniform };

void validate(const ProcessConfig& c);
void validate(const TripleBox& b, double L);

double mu_box(const TripleBox& b);
bool box_contains(const TripleBox& b, const HitTriple& t);

// Expected-count cap: 5e7 unless HYPERSTICKS_MAX_STICKS is set.
double max_expected_sticks();

// Centres uniform in B(o, R_w + L/2). With prune_outside only sticks meeting
// B(o, R_w) are kept; the draw sequence is unchanged, so the kept set is the exact
// restriction. Samples at two intensities with the same (seed, replicate, L, R_w)
// are nested.
StickSample sample_window(const ProcessConfig& c, std::uint64_t replicate = 0, bool prune_outside = false);

struct RestrictedDraw {
    HitTriple triple;
    double ray_angle = 0.0;
};

std::vector<RestrictedDraw> draw_restricted(const ProcessConfig& c, double rho_lo, double rho_hi,
                                            double ray_angle, std::uint64_t replicate,
                                            bool full_geodesic = false, PhiLaw law = PhiLaw::sine,
                                            std::uint64_t sub = 0, Role role = Role::restricted);

StickSample sample_restricted(const ProcessConfig& c, double rho_max, double ray_angle,
                              std::uint64_t replicate = 0, bool full_geodesic = false,
                              PhiLaw law = PhiLaw::sine);

Stick stick_from_triple(const HitTriple& t, double L, double ray_angle);

double offspring_mean(double lambda, double L);
double embedding_success_prob(double lambda, double L);
double vacant_line_prob(double lambda, double L, double R);
double alpha_exponent(double lambda, double L);

void write_sample(std::ostream& os, const StickSample& s);
StickSample read_sample(std::istream& is);

}  // namespace hs
