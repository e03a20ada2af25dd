#pragma once

#include <vector>

#include "twsar/types.hpp"

namespace twsar {

struct AcquisitionConfig {
  double centre_frequency_hz = 349.9e6;
  double bandwidth_hz = 299.8e6;
  double aperture_rad = 0.86;
  double tx_azimuth_rad = -7.0 * pi / 12.0;
  std::vector<double> bistatic_angles_rad = {0.0, -pi / 6.0, -pi / 3.0};
  double range_m = 20.0;
  int n_slow = 12;
  int n_freq = 8;
  double antenna_height_m = 0.0;
  Vec3 scene_centre = Vec3::Zero();
};

// Multi-static collection: one transmit arc plus one receive arc per channel,
// each a rotation of the transmit arc about the vertical axis through the
// scene centre. Frequencies on a uniform grid spanning the band.
struct AcquisitionGeometry {
  MatX3 tx_positions;                // n_slow x 3
  std::vector<MatX3> rx_positions;   // per channel, n_slow x 3
  VecX omega;                        // n_freq, rad/s
  Vec3 reference_point;
  std::vector<double> bistatic_angles_rad;

  int n_slow() const { return static_cast<int>(tx_positions.rows()); }
  int n_freq() const { return static_cast<int>(omega.size()); }
  int n_channels() const { return static_cast<int>(rx_positions.size()); }
  int n_samples() const { return n_channels() * n_slow() * n_freq(); }

  // Sample ordering: channel-major, then slow time, then frequency.
  int sample_index(int channel, int slow, int freq) const {
    return (channel * n_slow() + slow) * n_freq() + freq;
  }
  void sample_decompose(int i, int& channel, int& slow, int& freq) const {
    freq = i % n_freq();
    slow = (i / n_freq()) % n_slow();
    channel = i / (n_freq() * n_slow());
  }

  // Mean look direction from antennas toward the scene (unit vector in-plane).
  Vec3 look_direction() const;
};

AcquisitionGeometry make_acquisition(const AcquisitionConfig& config);

struct ImageGrid {
  MatX3 pixels;    // nx*ny x 3, row-major with x fastest
  int nx = 0, ny = 0;
  double spacing = 0.0;
  Vec2 origin = Vec2::Zero();  // centre of pixel (0,0)
  double plane_height = 0.0;

  int pixel_count() const { return nx * ny; }
  int pixel_index(int ix, int iy) const { return iy * nx + ix; }
};

// Uniform 2D grid of 3D points at fixed height, centred on `centre`.
ImageGrid make_image_grid(double extent_x, double extent_y, double spacing, double plane_height,
                          const Vec2& centre = Vec2::Zero());

}  // namespace twsar
