#include "nocollide/mnist.hpp"

#include <cstdint>
#include <fstream>
#include <stdexcept>

namespace nocollide {

namespace {

std::uint32_t read_u32_be(std::istream& in, const std::string& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4))
    throw std::runtime_error("mnist: truncated file " + path);
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) |
         std::uint32_t(b[3]);
}

}  // namespace

std::vector<std::pair<GridDensity, int>> load_mnist_idx(const std::string& images_path,
                                                        const std::string& labels_path,
                                                        const std::set<int>& digit_filter,
                                                        std::size_t limit) {
  std::ifstream img(images_path, std::ios::binary);
  if (!img) throw std::runtime_error("mnist: cannot open " + images_path);
  std::ifstream lab(labels_path, std::ios::binary);
  if (!lab) throw std::runtime_error("mnist: cannot open " + labels_path);

  if (read_u32_be(img, images_path) != 0x00000803u)
    throw std::runtime_error("mnist: bad image magic in " + images_path);
  if (read_u32_be(lab, labels_path) != 0x00000801u)
    throw std::runtime_error("mnist: bad label magic in " + labels_path);

  const std::uint32_t count = read_u32_be(img, images_path);
  const std::uint32_t rows = read_u32_be(img, images_path);
  const std::uint32_t cols = read_u32_be(img, images_path);
  const std::uint32_t label_count = read_u32_be(lab, labels_path);
  if (count != label_count)
    throw std::runtime_error("mnist: image/label count mismatch between " + images_path + " and " +
                             labels_path);
  if (rows == 0 || cols == 0 || rows > 4096 || cols > 4096)
    throw std::runtime_error("mnist: implausible dimensions in " + images_path);

  std::vector<std::pair<GridDensity, int>> out;
  std::vector<unsigned char> buf(static_cast<std::size_t>(rows) * cols);
  for (std::uint32_t k = 0; k < count && out.size() < limit; ++k) {
    if (!img.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size())))
      throw std::runtime_error("mnist: truncated file " + images_path);
    char lc;
    if (!lab.read(&lc, 1)) throw std::runtime_error("mnist: truncated file " + labels_path);
    int label = static_cast<unsigned char>(lc);
    if (!digit_filter.empty() && digit_filter.count(label) == 0) continue;

    GridDensity d;
    d.width = static_cast<int>(cols);
    d.height = static_cast<int>(rows);
    d.origin = {0, 0};
    d.spacing = 1.0;
    d.mass.assign(buf.size(), 0.0);
    // IDX stores the top row first; flip so row 0 is at the bottom.
    for (std::uint32_t r = 0; r < rows; ++r)
      for (std::uint32_t c = 0; c < cols; ++c)
        d.at(static_cast<int>(c), static_cast<int>(rows - 1 - r)) = buf[r * cols + c];
    if (!(d.total_mass() > 0.0)) continue;  // blank image carries no measure
    d.normalize();
    out.emplace_back(std::move(d), label);
  }
  return out;
}

}  // namespace nocollide
