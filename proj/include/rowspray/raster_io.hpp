#pragma once

#include <string>

#include "rowspray/raster.hpp"

namespace rowspray {

// File layout: an 8-bit PNG plus an ESRI world file with the same basename
// and extension .pgw (six ASCII lines: pixel_size_x, 0, 0, pixel_size_y,
// origin_x, origin_y). Masks are written as 0/255 gray PNGs; scalar fields
// are affinely rescaled to 8 bits with the value range recorded in a
// <basename>.range.txt sidecar.

std::string world_file_path(const std::string& image_path);

GeoTransform read_world_file(const std::string& path);
void write_world_file(const std::string& path, const GeoTransform& geo);

/// Loads a PNG (gray or RGB) with its sibling world file.
/// Throws GeoreferenceError if the world file is missing or invalid,
/// DecodeError if the image is malformed.
Raster load_raster(const std::string& png_path);
void save_raster(const Raster& raster, const std::string& png_path);

BinaryMask load_mask(const std::string& png_path);
void save_mask(const BinaryMask& mask, const std::string& png_path);

void save_field(const ScalarField& field, const std::string& png_path);

}  // namespace rowspray
