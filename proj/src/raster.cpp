#include "pdyn/raster.hpp"

#include <atomic>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <thread>

namespace pdyn {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void ViewWindow::validate() const {
  if (cols < 2 || rows < 2)
    throw precondition_error("window needs at least 2x2 cells");
  if (!(width > 0.0) || !(height > 0.0))
    throw precondition_error("window extent must be positive");
  if (!std::isfinite(center.real()) || !std::isfinite(center.imag()))
    throw precondition_error("window center must be finite");
}

cplx ViewWindow::pixel_center(int c, int r) const {
  double re = center.real() - width / 2.0 + (c + 0.5) * width / cols;
  double im = center.imag() + height / 2.0 - (r + 0.5) * height / rows;
  return {re, im};
}

CellRecord encode_cell(const Classification& cl) {
  CellRecord cell;
  cell.fate = static_cast<uint8_t>(cl.fate);
  cell.reason = static_cast<uint8_t>(cl.reason);
  cell.depth = static_cast<uint16_t>(
      std::min<size_t>(cl.certified_depth, 0xFFFF));
  if (cl.fate == Fate::fast_escaping) {
    cell.offset = static_cast<uint8_t>(std::min<size_t>(cl.offset, 0xFF));
    size_t n = std::min(cl.itinerary.size(), kMaxPackedSymbols);
    cell.sym_count = static_cast<uint8_t>(n);
    for (size_t i = 0; i < n; ++i)
      cell.packed_syms |=
          (static_cast<uint64_t>(cl.itinerary[i]) & 0xFull) << (4 * i);
  } else if (cl.fate == Fate::bounded) {
    cell.bound = cl.bound;
  }
  return cell;
}

bool itinerary_matches(const CellRecord& cell, const ItineraryPattern& e,
                       size_t shift_budget) {
  if (cell.fate != static_cast<uint8_t>(Fate::fast_escaping)) return false;
  size_t n = cell.sym_count;
  if (n == 0) return false;
  for (size_t kc = 0; kc <= shift_budget && kc < n; ++kc) {
    for (size_t kp = 0; kp <= shift_budget; ++kp) {
      bool ok = true;
      for (size_t i = 0; i + kc < n; ++i) {
        if (cell.symbol(kc + i) != e.symbol(kp + i)) {
          ok = false;
          break;
        }
      }
      if (ok) return true;
    }
  }
  return false;
}

ClassificationRaster classify_grid(const CompiledMap& map,
                                   const ViewWindow& window,
                                   const ClassifyParams& params, int threads) {
  window.validate();
  if (threads < 1) throw precondition_error("thread count must be positive");

  ClassificationRaster raster;
  raster.window = window;
  raster.params = params;
  raster.map_text = map.text();
  raster.cells.resize(window.cell_count());

  Classifier classifier(map, params);
  const PunctureSet& S = map.punctures();

  constexpr int kTile = 64;
  int tiles_x = (window.cols + kTile - 1) / kTile;
  int tiles_y = (window.rows + kTile - 1) / kTile;
  int tile_total = tiles_x * tiles_y;

  auto work_tile = [&](int tile) {
    int tx = tile % tiles_x, ty = tile / tiles_x;
    int c1 = std::min(window.cols, (tx + 1) * kTile);
    int r1 = std::min(window.rows, (ty + 1) * kTile);
    for (int r = ty * kTile; r < r1; ++r) {
      for (int c = tx * kTile; c < c1; ++c) {
        SpherePoint x = SpherePoint::finite(window.pixel_center(c, r));
        size_t idx = static_cast<size_t>(r) * window.cols + c;
        int pj = -1;
        if (S.is_puncture(x, &pj)) {
          // cell center sits exactly on a puncture: escape toward it
          CellRecord cell;
          cell.fate = static_cast<uint8_t>(Fate::fast_escaping);
          cell.sym_count = kMaxPackedSymbols;
          for (size_t i = 0; i < kMaxPackedSymbols; ++i)
            cell.packed_syms |= (static_cast<uint64_t>(pj) & 0xFull) << (4 * i);
          raster.cells[idx] = cell;
          continue;
        }
        raster.cells[idx] = encode_cell(classifier.classify(x));
      }
    }
  };

  if (threads == 1) {
    for (int t = 0; t < tile_total; ++t) work_tile(t);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    int n = std::min(threads, tile_total);
    pool.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      pool.emplace_back([&] {
        for (int t = next.fetch_add(1); t < tile_total; t = next.fetch_add(1))
          work_tile(t);
      });
    }
    for (auto& th : pool) th.join();
  }
  return raster;
}

size_t BoundaryRaster::set_count() const {
  size_t n = 0;
  for (uint8_t v : cells) n += v != 0;
  return n;
}

BoundaryRaster extract_boundary(const ClassificationRaster& raster,
                                const CellPredicate& selector) {
  const int W = raster.window.cols, H = raster.window.rows;
  std::vector<uint8_t> sel(raster.cells.size());
  for (size_t i = 0; i < raster.cells.size(); ++i)
    sel[i] = selector(raster.cells[i]) ? 1 : 0;

  BoundaryRaster b;
  b.window = raster.window;
  b.cells.assign(raster.cells.size(), 0);
  for (int r = 0; r < H; ++r) {
    for (int c = 0; c < W; ++c) {
      size_t i = static_cast<size_t>(r) * W + c;
      if (!sel[i]) continue;
      bool edge = (c > 0 && !sel[i - 1]) || (c + 1 < W && !sel[i + 1]) ||
                  (r > 0 && !sel[i - static_cast<size_t>(W)]) ||
                  (r + 1 < H && !sel[i + static_cast<size_t>(W)]);
      if (edge) b.cells[i] = 1;
    }
  }
  return b;
}

namespace {

uint64_t class_key(const CellRecord& cell) {
  uint64_t fate = cell.fate;
  if (cell.fate == static_cast<uint8_t>(Fate::fast_escaping))
    return (fate << 60) ^ cell.packed_syms;
  return fate << 60;
}

}  // namespace

BoundaryRaster extract_class_boundary(const ClassificationRaster& raster) {
  const int W = raster.window.cols, H = raster.window.rows;
  BoundaryRaster b;
  b.window = raster.window;
  b.cells.assign(raster.cells.size(), 0);
  auto key = [&](size_t i) { return class_key(raster.cells[i]); };
  for (int r = 0; r < H; ++r) {
    for (int c = 0; c < W; ++c) {
      size_t i = static_cast<size_t>(r) * W + c;
      uint64_t k = key(i);
      bool edge = (c > 0 && key(i - 1) != k) || (c + 1 < W && key(i + 1) != k) ||
                  (r > 0 && key(i - static_cast<size_t>(W)) != k) ||
                  (r + 1 < H && key(i + static_cast<size_t>(W)) != k);
      if (edge) b.cells[i] = 1;
    }
  }
  return b;
}

CellPredicate fast_class_selector(const ItineraryPattern& e,
                                  size_t shift_budget) {
  return [e, shift_budget](const CellRecord& cell) {
    return itinerary_matches(cell, e, shift_budget);
  };
}

ComponentLabeling label_components(const ClassificationRaster& raster,
                                   const CellPredicate& selector,
                                   const PunctureSet& S) {
  const int W = raster.window.cols, H = raster.window.rows;
  ComponentLabeling out;
  out.labels.assign(raster.cells.size(), -1);

  std::vector<uint8_t> sel(raster.cells.size());
  for (size_t i = 0; i < raster.cells.size(); ++i)
    sel[i] = selector(raster.cells[i]) ? 1 : 0;

  std::vector<size_t> stack;
  for (size_t seed = 0; seed < sel.size(); ++seed) {
    if (!sel[seed] || out.labels[seed] >= 0) continue;
    int32_t label = out.component_count++;
    out.pixel_counts.push_back(0);
    out.touches.push_back(0);
    stack.assign(1, seed);
    out.labels[seed] = label;
    while (!stack.empty()) {
      size_t i = stack.back();
      stack.pop_back();
      ++out.pixel_counts[static_cast<size_t>(label)];
      int c = static_cast<int>(i % static_cast<size_t>(W));
      int r = static_cast<int>(i / static_cast<size_t>(W));
      if (c == 0 || r == 0 || c == W - 1 || r == H - 1)
        out.touches[static_cast<size_t>(label)] |= kTouchFrame;
      SpherePoint x = SpherePoint::finite(raster.window.pixel_center(c, r));
      for (int j = 0; j < S.chart_count(); ++j) {
        if (generalized_modulus(x, j, S) >= S.rho_S())
          out.touches[static_cast<size_t>(label)] |= touch_puncture_bit(j);
      }
      auto push = [&](size_t t) {
        if (sel[t] && out.labels[t] < 0) {
          out.labels[t] = label;
          stack.push_back(t);
        }
      };
      if (c > 0) push(i - 1);
      if (c + 1 < W) push(i + 1);
      if (r > 0) push(i - static_cast<size_t>(W));
      if (r + 1 < H) push(i + static_cast<size_t>(W));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// distances

namespace {

// Large finite stand-in for "no site"; any true squared distance inside a
// raster is far below it.
constexpr double kFar = 1e12;

// 1D squared-distance lower envelope (Felzenszwalb-Huttenlocher).
void edt_1d(const std::vector<double>& f, std::vector<double>& d,
            std::vector<int>& v, std::vector<double>& z, int n) {
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  auto cross = [&](int q, int p) {
    return ((f[static_cast<size_t>(q)] + static_cast<double>(q) * q) -
            (f[static_cast<size_t>(p)] + static_cast<double>(p) * p)) /
           (2.0 * q - 2.0 * p);
  };
  for (int q = 1; q < n; ++q) {
    double s = cross(q, v[k]);
    while (s <= z[k]) {
      --k;
      s = cross(q, v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    double dq = static_cast<double>(q - v[k]);
    d[static_cast<size_t>(q)] = dq * dq + f[static_cast<size_t>(v[k])];
  }
}

}  // namespace

std::vector<double> squared_distance_field(const BoundaryRaster& b) {
  const int W = b.window.cols, H = b.window.rows;
  std::vector<double> field(b.cells.size());
  for (size_t i = 0; i < b.cells.size(); ++i)
    field[i] = b.cells[i] ? 0.0 : kFar;

  int n = std::max(W, H);
  std::vector<double> f(static_cast<size_t>(n)), d(static_cast<size_t>(n));
  std::vector<int> v(static_cast<size_t>(n));
  std::vector<double> z(static_cast<size_t>(n) + 1);

  for (int c = 0; c < W; ++c) {  // columns first
    for (int r = 0; r < H; ++r) f[static_cast<size_t>(r)] = field[static_cast<size_t>(r) * W + c];
    edt_1d(f, d, v, z, H);
    for (int r = 0; r < H; ++r) field[static_cast<size_t>(r) * W + c] = d[static_cast<size_t>(r)];
  }
  for (int r = 0; r < H; ++r) {  // then rows
    for (int c = 0; c < W; ++c) f[static_cast<size_t>(c)] = field[static_cast<size_t>(r) * W + c];
    edt_1d(f, d, v, z, W);
    for (int c = 0; c < W; ++c) field[static_cast<size_t>(r) * W + c] = d[static_cast<size_t>(c)];
  }
  return field;
}

RasterDistance raster_distance(const BoundaryRaster& a, const BoundaryRaster& b) {
  if (!a.window.same_shape(b.window))
    throw precondition_error("raster dimensions differ");
  size_t na = a.set_count(), nb = b.set_count();
  size_t both = 0, either = 0;
  for (size_t i = 0; i < a.cells.size(); ++i) {
    bool ia = a.cells[i] != 0, ib = b.cells[i] != 0;
    both += (ia && ib);
    either += (ia || ib);
  }
  double jaccard = either == 0 ? 1.0 : static_cast<double>(both) / either;

  if (na == 0 && nb == 0) return {0.0, jaccard};
  if (na == 0 || nb == 0) return {kInf, 0.0};

  std::vector<double> da = squared_distance_field(a);
  std::vector<double> db = squared_distance_field(b);
  double worst = 0.0;
  for (size_t i = 0; i < a.cells.size(); ++i) {
    if (a.cells[i]) worst = std::max(worst, db[i]);
    if (b.cells[i]) worst = std::max(worst, da[i]);
  }
  return {std::sqrt(worst), jaccard};
}

// ---------------------------------------------------------------------------
// artifact files

namespace {

struct Rgb { uint8_t r, g, b; };

// fates-v1 palette: escape classes colored by eventual symbol with shading
// by entry offset; bounded near-black blue; undecided grays by reason.
Rgb cell_color(const CellRecord& cell) {
  switch (static_cast<Fate>(cell.fate)) {
    case Fate::bounded:
      return {12, 16, 64};
    case Fate::undecided: {
      uint8_t g = static_cast<uint8_t>(96 + 24 * (cell.reason & 3));
      return {g, g, g};
    }
    case Fate::fast_escaping: {
      int eventual = cell.sym_count ? cell.symbol(cell.sym_count - 1) : 0;
      double fade = 1.0 - 0.08 * std::min<int>(cell.offset, 6);
      auto ch = [&](int base) {
        return static_cast<uint8_t>(std::max(0.0, std::min(255.0, base * fade)));
      };
      switch (eventual % 4) {
        case 0: return {ch(232), ch(112), ch(32)};   // toward infinity: ember
        case 1: return {ch(48), ch(160), ch(224)};   // toward y_1: cyan
        case 2: return {ch(96), ch(208), ch(96)};
        default: return {ch(176), ch(96), ch(208)};
      }
    }
  }
  return {0, 0, 0};
}

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<uint8_t>& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

uint32_t get_u32(const uint8_t* p) {
  uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

uint64_t get_u64(const uint8_t* p) {
  uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

constexpr char kGridMagic[8] = {'P', 'D', 'Y', 'N', 'F', 'G', '0', '1'};

}  // namespace

std::vector<uint8_t> render_ppm(const ClassificationRaster& raster) {
  std::string header = "P6\n" + std::to_string(raster.window.cols) + " " +
                       std::to_string(raster.window.rows) + "\n255\n";
  std::vector<uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + raster.cells.size() * 3);
  for (const CellRecord& cell : raster.cells) {
    Rgb c = cell_color(cell);
    out.push_back(c.r);
    out.push_back(c.g);
    out.push_back(c.b);
  }
  return out;
}

std::vector<uint8_t> serialize_fate_grid(const ClassificationRaster& raster) {
  std::vector<uint8_t> out;
  out.reserve(16 + raster.cells.size() * 24);
  out.insert(out.end(), kGridMagic, kGridMagic + 8);
  put_u32(out, static_cast<uint32_t>(raster.window.cols));
  put_u32(out, static_cast<uint32_t>(raster.window.rows));
  for (const CellRecord& cell : raster.cells) {
    out.push_back(cell.fate);
    out.push_back(cell.offset);
    out.push_back(cell.sym_count);
    out.push_back(cell.reason);
    out.push_back(static_cast<uint8_t>(cell.depth & 0xFF));
    out.push_back(static_cast<uint8_t>(cell.depth >> 8));
    out.push_back(0);
    out.push_back(0);
    put_u64(out, cell.packed_syms);
    uint64_t bits;
    std::memcpy(&bits, &cell.bound, 8);
    put_u64(out, bits);
  }
  return out;
}

ClassificationRaster parse_fate_grid(const std::vector<uint8_t>& bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kGridMagic, 8) != 0)
    throw precondition_error("not a fate grid file");
  ClassificationRaster raster;
  raster.window.cols = static_cast<int>(get_u32(bytes.data() + 8));
  raster.window.rows = static_cast<int>(get_u32(bytes.data() + 12));
  size_t n = static_cast<size_t>(raster.window.cols) * raster.window.rows;
  if (bytes.size() != 16 + n * 24)
    throw precondition_error("fate grid size mismatch");
  raster.cells.resize(n);
  const uint8_t* p = bytes.data() + 16;
  for (size_t i = 0; i < n; ++i, p += 24) {
    CellRecord& cell = raster.cells[i];
    cell.fate = p[0];
    cell.offset = p[1];
    cell.sym_count = p[2];
    cell.reason = p[3];
    cell.depth = static_cast<uint16_t>(p[4] | (p[5] << 8));
    cell.packed_syms = get_u64(p + 8);
    uint64_t bits = get_u64(p + 16);
    std::memcpy(&cell.bound, &bits, 8);
  }
  return raster;
}

void write_file_atomic(const std::string& path, const void* data, size_t size) {
  namespace fs = std::filesystem;
  fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string());
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
}

}  // namespace pdyn
