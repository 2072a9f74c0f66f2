#include "lcert/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "lcert/binio.hpp"
#include "lcert/common.hpp"
#include "lcert/hash.hpp"
#include "lcert/rng.hpp"

namespace lcert::data {

namespace {

double clip01(double v) { return std::min(1.0, std::max(0.0, v)); }

// RandomStream ids inside a blob seed: centers, then one stream per
// (class, split) so splits stay disjoint by construction.
constexpr std::uint64_t kCenterStream = 0;
std::uint64_t sample_stream(int class_index, bool test) {
  return 1 + 2 * static_cast<std::uint64_t>(class_index) + (test ? 1 : 0);
}

}  // namespace

void LabeledDataset::validate() const {
  require(size() >= 1, "dataset must contain at least one sample");
  require(input_dim >= 1 && class_count >= 1, "dataset dimensions must be positive");
  require(samples.size() == static_cast<std::size_t>(size()) * input_dim,
          "sample matrix size does not match N x I");
  for (double v : samples)
    if (!(v >= 0.0 && v <= 1.0)) fail("sample entry %.17g outside [0,1]", v);
  for (int y : labels)
    if (y < 0 || y >= class_count) fail("label %d outside [0,%d)", y, class_count);
}

std::uint64_t LabeledDataset::digest() const {
  Fnv1a h;
  h.update_u64(input_dim).update_u64(class_count);
  h.update_vec(samples);
  h.update_vec(labels);
  return h.digest();
}

std::string LabeledDataset::id() const { return domain_id + "@" + hex_digest(digest()); }

ClasswisePerturbation ClasswisePerturbation::zeros(int class_count, int input_dim,
                                                   double budget) {
  ClasswisePerturbation p;
  p.class_count = class_count;
  p.input_dim = input_dim;
  p.budget = budget;
  p.rows.assign(static_cast<std::size_t>(class_count) * input_dim, 0.0);
  return p;
}

void ClasswisePerturbation::validate() const {
  require(class_count >= 1 && input_dim >= 1, "perturbation dimensions must be positive");
  require(budget > 0.0, "perturbation budget must be positive");
  require(rows.size() == static_cast<std::size_t>(class_count) * input_dim,
          "perturbation matrix size does not match K x I");
  for (double v : rows)
    if (!(std::abs(v) <= budget))
      fail("perturbation entry %.17g exceeds the linf budget %.17g", v, budget);
}

std::uint64_t ClasswisePerturbation::digest() const {
  Fnv1a h;
  h.update_u64(class_count).update_u64(input_dim).update_f64(budget);
  h.update_vec(rows);
  return h.digest();
}

void BlobSpec::validate() const {
  require(class_count >= 2, "blob spec needs K >= 2");
  require(input_dim >= 2, "blob spec needs I >= 2");
  require(samples_per_class >= 1, "blob spec needs at least one sample per class");
  require(cluster_spread >= 0.0, "cluster spread must be nonnegative");
  require(center_spread > 0.0 && center_spread <= 0.5,
          "center spread must lie in (0, 0.5] so centers stay inside [0,1]");
}

std::string BlobSpec::domain_id() const {
  return strfmt("blobs-k%d-i%d-n%d-cs%g-w%g-seed%llu", class_count, input_dim,
                samples_per_class, cluster_spread, center_spread,
                static_cast<unsigned long long>(seed));
}

std::pair<LabeledDataset, LabeledDataset> make_blobs(const BlobSpec& spec) {
  spec.validate();
  const int k = spec.class_count;
  const int dim = spec.input_dim;
  const int n_train = spec.samples_per_class;
  const int n_test = std::max(1, spec.samples_per_class / 4);

  // Centers are rejection-sampled to keep every pair at least 5 cluster
  // spreads apart, so any generated benchmark is learnable by construction.
  // The floor is capped by what the center box can geometrically support.
  RandomStream centers(spec.seed, kCenterStream);
  const double min_sep = std::min(5.0 * spec.cluster_spread,
                                  0.5 * spec.center_spread * std::sqrt(dim));
  std::vector<double> center(static_cast<std::size_t>(k) * dim);
  std::uint64_t draw = 0;
  for (int c = 0; c < k; ++c) {
    double* row = center.data() + static_cast<std::size_t>(c) * dim;
    bool placed = false;
    for (int attempt = 0; attempt < 500 && !placed; ++attempt) {
      for (int i = 0; i < dim; ++i)
        row[i] = 0.5 + spec.center_spread * (2.0 * centers.uniform(draw++) - 1.0);
      placed = true;
      for (int prev = 0; prev < c && placed; ++prev) {
        const double* other = center.data() + static_cast<std::size_t>(prev) * dim;
        double dist2 = 0.0;
        for (int i = 0; i < dim; ++i) dist2 += (row[i] - other[i]) * (row[i] - other[i]);
        placed = dist2 >= min_sep * min_sep;
      }
    }
    if (!placed)
      fail("cannot place %d cluster centers at separation %.3g inside a box of width %.3g",
           k, min_sep, 2.0 * spec.center_spread);
  }

  auto fill_split = [&](bool test, int per_class) {
    LabeledDataset d;
    d.input_dim = dim;
    d.class_count = k;
    d.seed = spec.seed;
    d.domain_id = spec.domain_id() + (test ? "/test" : "/train");
    d.samples.reserve(static_cast<std::size_t>(k) * per_class * dim);
    d.labels.reserve(static_cast<std::size_t>(k) * per_class);
    for (int c = 0; c < k; ++c) {
      RandomStream rs(spec.seed, sample_stream(c, test));
      for (int j = 0; j < per_class; ++j) {
        for (int i = 0; i < dim; ++i) {
          double g = rs.gaussian(static_cast<std::uint64_t>(j) * dim + i);
          d.samples.push_back(clip01(center[static_cast<std::size_t>(c) * dim + i] +
                                     spec.cluster_spread * g));
        }
        d.labels.push_back(c);
      }
    }
    d.validate();
    return d;
  };

  return {fill_split(false, n_train), fill_split(true, n_test)};
}

LabeledDataset apply_perturbation(const LabeledDataset& d, const ClasswisePerturbation& delta) {
  if (delta.class_count != d.class_count)
    fail("perturbation has %d classes but dataset has %d", delta.class_count, d.class_count);
  if (delta.input_dim != d.input_dim)
    fail("perturbation width %d does not match dataset width %d", delta.input_dim, d.input_dim);

  LabeledDataset out = d;
  out.domain_id = d.domain_id + "+delta";
  for (int i = 0; i < d.size(); ++i) {
    std::span<const double> row = delta.row(d.labels[i]);
    double* x = out.samples.data() + static_cast<std::size_t>(i) * d.input_dim;
    for (int j = 0; j < d.input_dim; ++j) x[j] = clip01(x[j] + row[j]);
  }
  return out;
}

void save_dataset(const LabeledDataset& d, const std::string& path) {
  d.validate();
  BinWriter w(path);
  w.magic("LCDS");
  w.u32(1);  // version
  w.u64(d.size());
  w.u32(d.input_dim);
  w.u32(d.class_count);
  w.u64(d.seed);
  w.str(d.domain_id);
  w.f64s(d.samples);
  for (int y : d.labels) w.u16(static_cast<std::uint16_t>(y));
  w.u64(d.digest());
  w.close();
}

LabeledDataset load_dataset(const std::string& path) {
  BinReader r(path);
  r.expect_magic("LCDS");
  std::uint32_t version = r.u32();
  if (version != 1) fail("'%s': unsupported dataset version %u", path.c_str(), version);
  LabeledDataset d;
  std::uint64_t n = r.u64();
  d.input_dim = static_cast<int>(r.u32());
  d.class_count = static_cast<int>(r.u32());
  d.seed = r.u64();
  d.domain_id = r.str();
  if (n == 0 || d.input_dim <= 0 || d.class_count <= 0)
    fail("'%s': corrupt header (N=%llu I=%d K=%d)", path.c_str(),
         static_cast<unsigned long long>(n), d.input_dim, d.class_count);
  d.samples = r.f64s(n * d.input_dim);
  d.labels.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) d.labels.push_back(r.u16());
  std::uint64_t stored = r.u64();
  r.expect_eof();
  if (stored != d.digest())
    fail("'%s': content hash mismatch (stored %s, computed %s)", path.c_str(),
         hex_digest(stored).c_str(), hex_digest(d.digest()).c_str());
  d.validate();
  return d;
}

void save_perturbation(const ClasswisePerturbation& p, const std::string& path) {
  p.validate();
  BinWriter w(path);
  w.magic("LCPT");
  w.u32(p.class_count);
  w.u32(p.input_dim);
  w.f64(p.budget);
  w.f64s(p.rows);
  w.u64(p.digest());
  w.close();
}

ClasswisePerturbation load_perturbation(const std::string& path) {
  BinReader r(path);
  r.expect_magic("LCPT");
  ClasswisePerturbation p;
  p.class_count = static_cast<int>(r.u32());
  p.input_dim = static_cast<int>(r.u32());
  p.budget = r.f64();
  if (p.class_count <= 0 || p.input_dim <= 0 || !(p.budget > 0.0))
    fail("'%s': corrupt header (K=%d I=%d xi=%g)", path.c_str(), p.class_count, p.input_dim,
         p.budget);
  p.rows = r.f64s(static_cast<std::size_t>(p.class_count) * p.input_dim);
  std::uint64_t stored = r.u64();
  r.expect_eof();
  if (stored != p.digest())
    fail("'%s': content hash mismatch (stored %s, computed %s)", path.c_str(),
         hex_digest(stored).c_str(), hex_digest(p.digest()).c_str());
  p.validate();
  return p;
}

}  // namespace lcert::data
