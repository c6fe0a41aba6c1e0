#include "wsseg/classicseg/slic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "wsseg/classicseg/color.hpp"

namespace wsseg {

namespace {

constexpr int kDr[4] = {-1, 1, 0, 0};
constexpr int kDc[4] = {0, 0, -1, 1};

// 4-connected components of equal ids; returns component index per pixel.
std::vector<int> components(int h, int w, const std::vector<int>& ids, int& count) {
  std::vector<int> comp(ids.size(), -1);
  std::vector<int> stack;
  count = 0;
  for (int start = 0; start < h * w; ++start) {
    if (comp[start] >= 0) continue;
    comp[start] = count;
    stack.push_back(start);
    while (!stack.empty()) {
      const int p = stack.back();
      stack.pop_back();
      const int r = p / w, c = p % w;
      for (int k = 0; k < 4; ++k) {
        const int nr = r + kDr[k], nc = c + kDc[k];
        if (nr < 0 || nr >= h || nc < 0 || nc >= w) continue;
        const int q = nr * w + nc;
        if (comp[q] < 0 && ids[q] == ids[p]) {
          comp[q] = count;
          stack.push_back(q);
        }
      }
    }
    ++count;
  }
  return comp;
}

}  // namespace

SuperpixelMap SuperpixelMap::from_ids(int height, int width, std::vector<int> ids) {
  if (static_cast<std::size_t>(height) * width != ids.size()) throw DataError("superpixel map size mismatch");
  SuperpixelMap m;
  m.height = height;
  m.width = width;
  std::vector<int> remap;
  for (int& id : ids) {
    if (id < 0) throw DataError("negative superpixel id");
    if (static_cast<std::size_t>(id) >= remap.size()) remap.resize(id + 1, -1);
    if (remap[id] < 0) remap[id] = m.count++;
    id = remap[id];
  }
  m.ids = std::move(ids);
  m.sizes.assign(m.count, 0);
  m.centroids.assign(m.count, {0.0, 0.0});
  std::vector<std::vector<int>> adj(m.count);
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) {
      const int id = m.at(r, c);
      ++m.sizes[id];
      m.centroids[id][0] += r;
      m.centroids[id][1] += c;
      if (r + 1 < height && m.at(r + 1, c) != id) {
        adj[id].push_back(m.at(r + 1, c));
        adj[m.at(r + 1, c)].push_back(id);
      }
      if (c + 1 < width && m.at(r, c + 1) != id) {
        adj[id].push_back(m.at(r, c + 1));
        adj[m.at(r, c + 1)].push_back(id);
      }
    }
  for (int i = 0; i < m.count; ++i) {
    m.centroids[i][0] /= m.sizes[i];
    m.centroids[i][1] /= m.sizes[i];
    std::sort(adj[i].begin(), adj[i].end());
    adj[i].erase(std::unique(adj[i].begin(), adj[i].end()), adj[i].end());
  }
  m.adjacency = std::move(adj);
  return m;
}

bool is_connected_partition(const SuperpixelMap& map) {
  if (map.ids.size() != static_cast<std::size_t>(map.height) * map.width) return false;
  for (int id : map.ids)
    if (id < 0 || id >= map.count) return false;
  int n = 0;
  const std::vector<int> comp = components(map.height, map.width, map.ids, n);
  if (n != map.count) return false;
  // As many components as ids, and every id used: one component each.
  std::vector<char> seen(map.count, 0);
  for (int id : map.ids) seen[id] = 1;
  return std::all_of(seen.begin(), seen.end(), [](char s) { return s != 0; });
}

SuperpixelMap enforce_connectivity(int height, int width, const std::vector<int>& ids, int min_size) {
  int n = 0;
  std::vector<int> comp = components(height, width, ids, n);
  std::vector<int> size(n, 0), comp_id(n, -1);
  for (std::size_t p = 0; p < comp.size(); ++p) {
    ++size[comp[p]];
    comp_id[comp[p]] = ids[p];
  }
  // Largest component per id (first seen wins ties) stays unless it is tiny.
  int max_id = 0;
  for (int id : ids) max_id = std::max(max_id, id);
  std::vector<int> best(max_id + 1, -1);
  for (int k = 0; k < n; ++k) {
    int& b = best[comp_id[k]];
    if (b < 0 || size[k] > size[b]) b = k;
  }
  std::vector<char> kept(n, 0);
  bool any = false;
  for (int k = 0; k < n; ++k) {
    kept[k] = best[comp_id[k]] == k && size[k] >= min_size;
    any |= kept[k] != 0;
  }
  if (!any) kept[std::max_element(size.begin(), size.end()) - size.begin()] = 1;

  // Component adjacency.
  std::vector<std::vector<int>> adj(n);
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) {
      const int a = comp[r * width + c];
      if (r + 1 < height && comp[(r + 1) * width + c] != a) {
        adj[a].push_back(comp[(r + 1) * width + c]);
        adj[comp[(r + 1) * width + c]].push_back(a);
      }
      if (c + 1 < width && comp[r * width + c + 1] != a) {
        adj[a].push_back(comp[r * width + c + 1]);
        adj[comp[r * width + c + 1]].push_back(a);
      }
    }

  // Merge orphans into the largest adjacent kept region, sweeping until done.
  std::vector<int> target(n, -1), region_size(n, 0);
  for (int k = 0; k < n; ++k)
    if (kept[k]) {
      target[k] = k;
      region_size[k] = size[k];
    }
  bool progress = true;
  while (progress) {
    progress = false;
    for (int k = 0; k < n; ++k) {
      if (target[k] >= 0) continue;
      int pick = -1;
      for (int q : adj[k]) {
        const int t = target[q];
        if (t >= 0 && (pick < 0 || region_size[t] > region_size[pick] ||
                       (region_size[t] == region_size[pick] && t < pick))) {
          pick = t;
        }
      }
      if (pick >= 0) {
        target[k] = pick;
        region_size[pick] += size[k];
        progress = true;
      }
    }
  }
  std::vector<int> out(ids.size());
  for (std::size_t p = 0; p < ids.size(); ++p) out[p] = target[comp[p]];
  return SuperpixelMap::from_ids(height, width, std::move(out));
}

SuperpixelMap slic(const Image& image, const SlicOptions& opts) {
  const int h = image.height, w = image.width;
  if (static_cast<double>(h) * w < 2.0) throw DataError("SLIC needs more than one pixel");
  if (static_cast<double>(h) * w < opts.target_area) {
    throw DataError("image smaller than the superpixel target area");
  }
  if (!(opts.target_area > 0) || !(opts.compactness > 0) || opts.max_iters < 1) {
    throw ConfigError("invalid SLIC options");
  }
  const RealRaster lab = rgb_to_lab(image);
  const double step = std::sqrt(opts.target_area);
  const int gy = std::max(1, static_cast<int>(std::lround(h / step)));
  const int gx = std::max(1, static_cast<int>(std::lround(w / step)));
  const double sy = static_cast<double>(h) / gy, sx = static_cast<double>(w) / gx;

  struct Center {
    double l, a, b, y, x;
  };
  auto lab_at = [&](int r, int c, int ch) { return lab.data[(static_cast<std::size_t>(r) * w + c) * 3 + ch]; };
  auto gradient = [&](int r, int c) {
    double g = 0;
    for (int ch = 0; ch < 3; ++ch) {
      const double dx = lab_at(r, std::min(c + 1, w - 1), ch) - lab_at(r, std::max(c - 1, 0), ch);
      const double dy = lab_at(std::min(r + 1, h - 1), c, ch) - lab_at(std::max(r - 1, 0), c, ch);
      g += dx * dx + dy * dy;
    }
    return g;
  };
  std::vector<Center> centers;
  for (int i = 0; i < gy; ++i)
    for (int j = 0; j < gx; ++j) {
      int r = std::min(h - 1, static_cast<int>((i + 0.5) * sy));
      int c = std::min(w - 1, static_cast<int>((j + 0.5) * sx));
      // Move the seed to the lowest-gradient pixel of its 3x3 neighbourhood.
      int br = r, bc = c;
      double bg = gradient(r, c);
      for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc) {
          const int nr = r + dr, nc = c + dc;
          if (nr < 0 || nr >= h || nc < 0 || nc >= w) continue;
          const double g = gradient(nr, nc);
          if (g < bg) {
            bg = g;
            br = nr;
            bc = nc;
          }
        }
      centers.push_back({lab_at(br, bc, 0), lab_at(br, bc, 1), lab_at(br, bc, 2),
                         static_cast<double>(br), static_cast<double>(bc)});
    }

  const double S = std::max(sy, sx);
  const double spatial = (opts.compactness / S) * (opts.compactness / S);
  std::vector<int> ids(static_cast<std::size_t>(h) * w, -1);
  std::vector<double> dist(ids.size());
  for (int it = 0; it < opts.max_iters; ++it) {
    std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
    for (std::size_t k = 0; k < centers.size(); ++k) {
      const Center& ct = centers[k];
      const int r0 = std::max(0, static_cast<int>(std::floor(ct.y - S)));
      const int r1 = std::min(h - 1, static_cast<int>(std::ceil(ct.y + S)));
      const int c0 = std::max(0, static_cast<int>(std::floor(ct.x - S)));
      const int c1 = std::min(w - 1, static_cast<int>(std::ceil(ct.x + S)));
      for (int r = r0; r <= r1; ++r)
        for (int c = c0; c <= c1; ++c) {
          const std::size_t p = static_cast<std::size_t>(r) * w + c;
          const double dl = lab.data[3 * p] - ct.l, da = lab.data[3 * p + 1] - ct.a,
                       db = lab.data[3 * p + 2] - ct.b;
          const double dy = r - ct.y, dx = c - ct.x;
          const double d = dl * dl + da * da + db * db + spatial * (dy * dy + dx * dx);
          if (d < dist[p]) {
            dist[p] = d;
            ids[p] = static_cast<int>(k);
          }
        }
    }
    std::vector<Center> sum(centers.size(), Center{0, 0, 0, 0, 0});
    std::vector<int> count(centers.size(), 0);
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) {
        const std::size_t p = static_cast<std::size_t>(r) * w + c;
        const int k = ids[p];
        if (k < 0) continue;
        sum[k].l += lab.data[3 * p];
        sum[k].a += lab.data[3 * p + 1];
        sum[k].b += lab.data[3 * p + 2];
        sum[k].y += r;
        sum[k].x += c;
        ++count[k];
      }
    for (std::size_t k = 0; k < centers.size(); ++k) {
      if (count[k] == 0) continue;
      const double n = count[k];
      centers[k] = {sum[k].l / n, sum[k].a / n, sum[k].b / n, sum[k].y / n, sum[k].x / n};
    }
  }
  // Pixels no window reached join the nearest center spatially.
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      int& id = ids[static_cast<std::size_t>(r) * w + c];
      if (id >= 0) continue;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < centers.size(); ++k) {
        const double d = (centers[k].y - r) * (centers[k].y - r) + (centers[k].x - c) * (centers[k].x - c);
        if (d < best) {
          best = d;
          id = static_cast<int>(k);
        }
      }
    }
  const int min_size = std::max(1, static_cast<int>(opts.target_area / 4));
  SuperpixelMap map = enforce_connectivity(h, w, ids, min_size);
  if (!is_connected_partition(map)) throw std::logic_error("SLIC produced a disconnected partition");
  return map;
}

void write_superpixels(const std::filesystem::path& path, const SuperpixelMap& map) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  auto put = [&](std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
  };
  out.write("WSSP", 4);
  put(map.height);
  put(map.width);
  put(map.count);
  for (int id : map.ids) put(static_cast<std::uint32_t>(id));
  if (!out) throw DataError("failed writing " + path.string());
}

SuperpixelMap read_superpixels(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  const std::string bytes = os.str();
  auto get = [&](std::size_t at) {
    if (at + 4 > bytes.size()) throw DataError(path.string() + ": truncated superpixel file");
    const auto* b = reinterpret_cast<const unsigned char*>(bytes.data() + at);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  };
  if (bytes.size() < 4 || bytes.compare(0, 4, "WSSP") != 0) {
    throw DataError(path.string() + ": not a superpixel file");
  }
  const std::uint32_t h = get(4), w = get(8), count = get(12);
  const std::size_t n = static_cast<std::size_t>(h) * w;
  if (bytes.size() != 16 + 4 * n) throw DataError(path.string() + ": superpixel file has the wrong length");
  std::vector<int> ids(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t v = get(16 + 4 * i);
    if (v >= count) throw DataError(path.string() + ": superpixel id out of range");
    ids[i] = static_cast<int>(v);
  }
  SuperpixelMap m = SuperpixelMap::from_ids(static_cast<int>(h), static_cast<int>(w), std::move(ids));
  if (m.count != static_cast<int>(count)) throw DataError(path.string() + ": unused superpixel ids");
  return m;
}

}  // namespace wsseg
