#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pdyn/itinerary.hpp"
#include "pdyn/orbit.hpp"

namespace pdyn {

/// Axis-aligned view of the plane sampled at cell centers. Pixel (c, r)
/// with row 0 at the top maps to
///   re = center.re - width/2  + (c + 0.5) * width  / cols
///   im = center.im + height/2 - (r + 0.5) * height / rows
struct ViewWindow {
  cplx center{0.0, 0.0};
  double width = 6.0;
  double height = 6.0;
  int cols = 512;
  int rows = 512;

  void validate() const;
  cplx pixel_center(int c, int r) const;
  size_t cell_count() const {
    return static_cast<size_t>(cols) * static_cast<size_t>(rows);
  }
  bool same_shape(const ViewWindow& o) const {
    return cols == o.cols && rows == o.rows;
  }
};

/// Per-cell classification code: fate tag, entry offset, certified depth,
/// and the first symbols of the extracted itinerary packed 4 bits each
/// (low nibble = symbol at the offset). Bounded cells reuse `bound`.
struct CellRecord {
  uint8_t fate = 0;       // Fate enum value
  uint8_t offset = 0;
  uint8_t sym_count = 0;  // packed symbols, at most 16
  uint8_t reason = 0;     // UndecidedReason for undecided cells
  uint16_t depth = 0;
  uint16_t reserved = 0;
  uint64_t packed_syms = 0;
  double bound = 0.0;

  int symbol(size_t i) const {
    return static_cast<int>((packed_syms >> (4 * i)) & 0xFull);
  }
};

inline constexpr size_t kMaxPackedSymbols = 16;

CellRecord encode_cell(const Classification& c);

/// Whether a fast-escaping cell's recorded symbols are shift-equivalent to
/// the pattern: some cell shift kc and pattern shift kp, both at most
/// `shift_budget`, align all remaining recorded symbols with the pattern.
bool itinerary_matches(const CellRecord& cell, const ItineraryPattern& e,
                       size_t shift_budget = 8);

struct ClassificationRaster {
  ViewWindow window;
  std::vector<CellRecord> cells;  // row-major, rows * cols
  ClassifyParams params;
  std::string map_text;

  const CellRecord& at(int c, int r) const {
    return cells[static_cast<size_t>(r) * static_cast<size_t>(window.cols) +
                 static_cast<size_t>(c)];
  }
};

/// Classifies every cell center. Work is split into 64x64 tiles claimed by
/// `threads` workers writing disjoint cells, so the bytes are identical for
/// any thread count. Cell centers that coincide with a puncture classify as
/// escape toward that puncture's symbol.
ClassificationRaster classify_grid(const CompiledMap& map,
                                   const ViewWindow& window,
                                   const ClassifyParams& params,
                                   int threads = 1);

struct BoundaryRaster {
  ViewWindow window;
  std::vector<uint8_t> cells;  // 1 = boundary

  size_t set_count() const;
};

using CellPredicate = std::function<bool(const CellRecord&)>;

/// Inner boundary of the selected set: selected cells with a 4-neighbour
/// that the predicate rejects. A uniform raster yields an empty boundary.
BoundaryRaster extract_boundary(const ClassificationRaster& raster,
                                const CellPredicate& selector);

/// Symmetric variant marking any cell whose class key (fate tag, packed
/// itinerary prefix) differs from a 4-neighbour's.
BoundaryRaster extract_class_boundary(const ClassificationRaster& raster);

/// Predicate for cells fast-escaping with itinerary equivalent to e.
CellPredicate fast_class_selector(const ItineraryPattern& e,
                                  size_t shift_budget = 8);

struct ComponentLabeling {
  std::vector<int32_t> labels;  // -1 outside the selection
  int component_count = 0;
  std::vector<size_t> pixel_counts;    // per component
  std::vector<uint32_t> touches;       // bit 0: frame, bit 1+j: puncture disk j
};

inline constexpr uint32_t kTouchFrame = 1u;
inline uint32_t touch_puncture_bit(int j) { return 1u << (1 + j); }

/// 4-connected labeling of selected cells. Puncture disk j is the pixel
/// preimage of {x : |x|_j >= rho_S}.
ComponentLabeling label_components(const ClassificationRaster& raster,
                                   const CellPredicate& selector,
                                   const PunctureSet& S);

struct RasterDistance {
  double hausdorff_px;  // +inf when exactly one side is empty
  double jaccard;       // 1.0 when both empty
};

RasterDistance raster_distance(const BoundaryRaster& a, const BoundaryRaster& b);

/// Exact Euclidean distance transform (squared distances) of the set cells;
/// cells with no site anywhere saturate at a large finite sentinel (1e12).
std::vector<double> squared_distance_field(const BoundaryRaster& b);

// -- artifact files ---------------------------------------------------------

/// Binary P6 image under the "fates-v1" palette.
std::vector<uint8_t> render_ppm(const ClassificationRaster& raster);

/// Flat binary fate grid: magic "PDYNFG01", little-endian u32 cols, u32
/// rows, then one 24-byte record per cell in row-major order:
/// u8 fate, u8 offset, u8 sym_count, u8 reason, u16 depth, u16 reserved,
/// u64 packed_syms, f64 bound.
std::vector<uint8_t> serialize_fate_grid(const ClassificationRaster& raster);
ClassificationRaster parse_fate_grid(const std::vector<uint8_t>& bytes);

/// Writes bytes via a temporary file and atomic rename.
void write_file_atomic(const std::string& path, const void* data, size_t size);

}  // namespace pdyn
