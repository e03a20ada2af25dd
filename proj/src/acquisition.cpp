#include "twsar/acquisition.hpp"

#include <cmath>
#include <stdexcept>

namespace twsar {

Vec3 AcquisitionGeometry::look_direction() const {
  Vec3 mean = Vec3::Zero();
  int count = 0;
  for (int s = 0; s < n_slow(); ++s) {
    mean += tx_positions.row(s).transpose();
    ++count;
  }
  for (const auto& rx : rx_positions)
    for (int s = 0; s < n_slow(); ++s) {
      mean += rx.row(s).transpose();
      ++count;
    }
  mean /= count;
  Vec3 dir = reference_point - mean;
  dir.z() = 0.0;
  return dir.normalized();
}

AcquisitionGeometry make_acquisition(const AcquisitionConfig& c) {
  if (c.bistatic_angles_rad.empty()) throw std::invalid_argument("empty channel list");
  if (c.n_slow < 1 || c.n_freq < 1) throw std::invalid_argument("zero samples");
  if (c.centre_frequency_hz <= 0 || c.bandwidth_hz < 0) throw std::invalid_argument("bad band");

  AcquisitionGeometry g;
  g.reference_point = c.scene_centre;
  g.bistatic_angles_rad = c.bistatic_angles_rad;

  auto arc_point = [&](double azimuth) {
    return Vec3(c.scene_centre.x() + c.range_m * std::cos(azimuth),
                c.scene_centre.y() + c.range_m * std::sin(azimuth), c.antenna_height_m);
  };

  g.tx_positions.resize(c.n_slow, 3);
  for (int s = 0; s < c.n_slow; ++s) {
    const double frac = c.n_slow == 1 ? 0.5 : static_cast<double>(s) / (c.n_slow - 1);
    const double az = c.tx_azimuth_rad + c.aperture_rad * (frac - 0.5);
    g.tx_positions.row(s) = arc_point(az).transpose();
  }

  for (double beta : c.bistatic_angles_rad) {
    MatX3 rx(c.n_slow, 3);
    for (int s = 0; s < c.n_slow; ++s) {
      const double frac = c.n_slow == 1 ? 0.5 : static_cast<double>(s) / (c.n_slow - 1);
      const double az = c.tx_azimuth_rad + beta + c.aperture_rad * (frac - 0.5);
      rx.row(s) = arc_point(az).transpose();
    }
    g.rx_positions.push_back(std::move(rx));
  }

  g.omega.resize(c.n_freq);
  const double f_lo = c.centre_frequency_hz - 0.5 * c.bandwidth_hz;
  const double f_hi = c.centre_frequency_hz + 0.5 * c.bandwidth_hz;
  for (int i = 0; i < c.n_freq; ++i) {
    const double f = c.n_freq == 1 ? c.centre_frequency_hz
                                   : f_lo + (f_hi - f_lo) * static_cast<double>(i) / (c.n_freq - 1);
    g.omega(i) = 2.0 * pi * f;
  }
  return g;
}

ImageGrid make_image_grid(double extent_x, double extent_y, double spacing, double plane_height,
                          const Vec2& centre) {
  if (spacing <= 0.0) throw std::invalid_argument("grid spacing must be > 0");
  ImageGrid grid;
  grid.spacing = spacing;
  grid.plane_height = plane_height;
  grid.nx = static_cast<int>(std::floor(extent_x / spacing + 0.5)) + 1;
  grid.ny = static_cast<int>(std::floor(extent_y / spacing + 0.5)) + 1;
  grid.nx = std::max(grid.nx, 1);
  grid.ny = std::max(grid.ny, 1);
  grid.origin = centre - 0.5 * spacing * Vec2(grid.nx - 1, grid.ny - 1);
  grid.pixels.resize(grid.pixel_count(), 3);
  for (int iy = 0; iy < grid.ny; ++iy)
    for (int ix = 0; ix < grid.nx; ++ix)
      grid.pixels.row(grid.pixel_index(ix, iy)) =
          Vec3(grid.origin.x() + ix * spacing, grid.origin.y() + iy * spacing, plane_height)
              .transpose();
  return grid;
}

}  // namespace twsar
