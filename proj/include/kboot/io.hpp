#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "kboot/grid.hpp"

namespace kboot::io {

enum class ImageFormat { png16, pgm16 };

/// png16 for ".png", pgm16 for ".pgm"; anything else is an IoError.
ImageFormat format_from_extension(const std::filesystem::path& path);

/// Sidecar path holding the intensity scale: "<path>.meta".
std::filesystem::path sidecar_path(const std::filesystem::path& path);

/// Writes a 16-bit grayscale file (creating missing parent directories) with stored = round(value / value_max * 65535)
/// and a sidecar containing `value_max=<decimal>`. value_max is max(image), or
/// 1 when the image has no positive sample.
void save_image(const Image& image, const std::filesystem::path& path, ImageFormat format);
void save_image(const Image& image, const std::filesystem::path& path);

/// Reads a PNG or PGM (format detected from the content) and rescales by the
/// sidecar's value_max. Without a sidecar value_max = 1 and a warning is
/// printed to stderr.
Image load_image(const std::filesystem::path& path);

/// value_max from the sidecar of `path`, if present and well formed.
std::optional<double> read_value_max(const std::filesystem::path& path);

/// KSP1: magic "KSP1", u32 n_fe, u32 n_pe (little endian), then n_fe*n_pe
/// row-major (re, im) pairs of little-endian binary32.
std::vector<std::byte> encode_kspace(const KSpace& kspace);
KSpace decode_kspace(std::span<const std::byte> bytes);

void save_kspace(const KSpace& kspace, const std::filesystem::path& path);
KSpace load_kspace(const std::filesystem::path& path);

std::vector<std::byte> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::byte> bytes);

}  // namespace kboot::io
