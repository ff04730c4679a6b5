#pragma once

#include <vector>

#include "rowspray/prescription.hpp"
#include "rowspray/raster.hpp"
#include "rowspray/rowdetect.hpp"

namespace rowspray {

/// Review rendering: copies the raster and recolors, in order, weed pixels
/// (blue), no-spray cell outlines (cyan), and detected row lines (red).
/// Layers may be null; with none given the output equals the input.
/// All layers must share the raster's extent. Fully deterministic.
Raster render_overlay(const Raster& rgb, const std::vector<RowLine>* lines,
                      const BinaryMask* weeds, const PrescriptionMap* grid);

}  // namespace rowspray
