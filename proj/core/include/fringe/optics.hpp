#pragma once

#include <vector>

namespace fringe {

// Geometry of the observation plane: a plane reference wave interfering with
// a diverging spherical wave of curvature radius wavefront_radius_m, sampled
// on a one-sided line of pixel_count points spaced pixel_pitch_m apart.
struct OpticalSetup {
  double wavelength_m = 500e-9;
  double wavefront_radius_m = 0.05;
  double pixel_pitch_m = 4 * 500e-9;
  int pixel_count = 1000;

  // Throws validation_error if any invariant fails. The sampled line must
  // stay strictly inside the wavefront footprint so the sagitta square root
  // keeps a positive argument.
  void validate() const;

  double pixel_x_m(int k) const { return k * pixel_pitch_m; }
};

// Film thickness in nanometers. The thickness-to-phase map is injective only
// while 2T < wavelength, which synthesize_profile enforces.
struct FilmThickness {
  double nm = 0.0;
  double meters() const { return nm * 1e-9; }
};

// One-sided intensity cut through the fringe-pattern center, tagged with the
// thickness that generated it. Clean samples lie in [0,1]; shot-noised copies
// may exceed 1.
struct LineProfile {
  FilmThickness thickness;
  std::vector<double> samples;
};

// Phase of the bare spherical wavefront against the plane reference at
// transverse position (x, y): 2*pi*(R - sqrt(R^2 - x^2 - y^2))/lambda.
// The sagitta is evaluated in the cancellation-free rational form
// r^2/(R + sqrt(R^2 - r^2)); the direct subtraction loses all significance
// for sagittas around 4e-11 m against R = 5e-2 m.
double sagittal_phase(double x_m, double y_m, const OpticalSetup& setup);

// Phase carried by the film's double-pass path difference: 4*pi*T/lambda.
double thickness_phase(FilmThickness thickness, double wavelength_m);

// Phase of a spherical wavefront whose radius is shortened by the film's
// double-pass path, without the shared-leading-digits approximation:
// 2*pi*((R - 2T) - sqrt((R - 2T)^2 - x^2 - y^2))/lambda.
double exact_phase(double x_m, double y_m, FilmThickness thickness,
                   const OpticalSetup& setup);

// Normalized two-beam interference intensity (1 + cos(delta_phi))/2.
double fringe_intensity(double delta_phi);

// Clean line profile: samples[k] = fringe_intensity(
//   sagittal_phase(k*pitch, 0) - thickness_phase(T)).
LineProfile synthesize_profile(FilmThickness thickness, const OpticalSetup& setup);

}  // namespace fringe
