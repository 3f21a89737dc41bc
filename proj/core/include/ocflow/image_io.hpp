#pragma once

#include <string>

#include "ocflow/field.hpp"

namespace ocflow {

/// Read a PGM (P5, 8/16-bit), PNG (grayscale or color, 8/16-bit), or PFM
/// image, dispatching on the file's magic bytes. Color inputs are converted
/// to luminance y = 0.299 R + 0.587 G + 0.114 B; integer samples are rescaled
/// to [0, 255] reals. PFM floats are returned as stored.
ScalarField read_image(const std::string& path);

/// Write a field as .png or .pgm (8-bit, values rounded and clamped to
/// [0, 255]) or .pfm (float, lossless), chosen by the file extension.
void write_image(const std::string& path, const ScalarField& f);

/// Middlebury .flo flow file: 4-byte magic "PIEH", little-endian int32 width
/// and height, then interleaved float32 (v, w) per pixel, row-major.
void write_flo(const std::string& path, const VectorField& b);
VectorField read_flo(const std::string& path);

}  // namespace ocflow
