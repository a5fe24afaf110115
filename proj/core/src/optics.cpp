#include "fringe/optics.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "fringe/errors.hpp"

namespace fringe {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Sagitta of a sphere of radius r at squared transverse distance rho2,
// written so that no near-equal quantities are subtracted.
double sagitta(double radius_m, double rho2) {
  return rho2 / (radius_m + std::sqrt(radius_m * radius_m - rho2));
}

}  // namespace

void OpticalSetup::validate() const {
  if (!(wavelength_m > 0.0))
    throw validation_error("optical setup: wavelength must be positive");
  if (!(wavefront_radius_m > 0.0))
    throw validation_error("optical setup: wavefront radius must be positive");
  if (!(pixel_pitch_m > 0.0))
    throw validation_error("optical setup: pixel pitch must be positive");
  if (pixel_count < 1)
    throw validation_error("optical setup: pixel count must be at least 1");
  const double extent = (pixel_count - 1) * pixel_pitch_m;
  if (!(wavefront_radius_m > extent))
    throw validation_error(
        "optical setup: wavefront radius " + std::to_string(wavefront_radius_m) +
        " m does not cover the sampled line extent " + std::to_string(extent) + " m");
}

double sagittal_phase(double x_m, double y_m, const OpticalSetup& setup) {
  const double r = setup.wavefront_radius_m;
  const double rho2 = x_m * x_m + y_m * y_m;
  if (!(rho2 < r * r))
    throw validation_error("sagittal_phase: point lies outside the wavefront footprint");
  return kTwoPi * sagitta(r, rho2) / setup.wavelength_m;
}

double thickness_phase(FilmThickness thickness, double wavelength_m) {
  if (!(thickness.nm >= 0.0))
    throw validation_error("thickness_phase: thickness must be nonnegative");
  if (!(wavelength_m > 0.0))
    throw validation_error("thickness_phase: wavelength must be positive");
  return kTwoPi * (2.0 * thickness.meters()) / wavelength_m;
}

double exact_phase(double x_m, double y_m, FilmThickness thickness,
                   const OpticalSetup& setup) {
  const double r = setup.wavefront_radius_m - 2.0 * thickness.meters();
  const double rho2 = x_m * x_m + y_m * y_m;
  if (!(r > 0.0) || !(rho2 < r * r))
    throw validation_error("exact_phase: point lies outside the shortened wavefront footprint");
  return kTwoPi * sagitta(r, rho2) / setup.wavelength_m;
}

double fringe_intensity(double delta_phi) {
  return 0.5 * (1.0 + std::cos(delta_phi));
}

LineProfile synthesize_profile(FilmThickness thickness, const OpticalSetup& setup) {
  setup.validate();
  if (!(thickness.nm >= 0.0))
    throw validation_error("synthesize_profile: thickness must be nonnegative");
  if (!(2.0 * thickness.meters() < setup.wavelength_m))
    throw validation_error(
        "synthesize_profile: thickness " + std::to_string(thickness.nm) +
        " nm leaves the injective range (2T must stay below one wavelength)");

  const double phi_film = thickness_phase(thickness, setup.wavelength_m);
  LineProfile profile;
  profile.thickness = thickness;
  profile.samples.resize(static_cast<std::size_t>(setup.pixel_count));
  for (int k = 0; k < setup.pixel_count; ++k) {
    const double phi = sagittal_phase(setup.pixel_x_m(k), 0.0, setup) - phi_film;
    profile.samples[static_cast<std::size_t>(k)] = fringe_intensity(phi);
  }
  return profile;
}

}  // namespace fringe
