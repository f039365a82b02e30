#include "wpic/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "wpic/error.hpp"
#include "wpic/io.hpp"
#include "wpic/rng.hpp"

namespace wpic {

namespace {

double graded(double t, double beta) {
  if (beta <= 0.0) return t;
  return 0.5 + std::sinh(beta * (t - 0.5)) / (2.0 * std::sinh(0.5 * beta));
}

}  // namespace

Mesh make_grid_mesh(const GridSpec& spec) {
  if (spec.nx < 1 || spec.ny < 1) throw ConfigError("grid needs at least one cell per direction");
  CounterRng rng(spec.seed);
  const int px = spec.nx + 1, py = spec.ny + 1;

  std::vector<double> xs(px), ys(py);
  for (int i = 0; i < px; ++i)
    xs[i] = spec.x0 + (spec.x1 - spec.x0) * graded(double(i) / spec.nx, spec.grading);
  for (int j = 0; j < py; ++j)
    ys[j] = spec.y0 + (spec.y1 - spec.y0) * graded(double(j) / spec.ny, spec.grading);

  std::vector<Vec2> pts(px * py);
  for (int j = 0; j < py; ++j) {
    for (int i = 0; i < px; ++i) {
      Vec2 p(xs[i], ys[j]);
      const bool interior = i > 0 && i < spec.nx && j > 0 && j < spec.ny;
      if (interior && spec.jitter > 0.0) {
        const double hx = std::min(xs[i] - xs[i - 1], xs[i + 1] - xs[i]);
        const double hy = std::min(ys[j] - ys[j - 1], ys[j + 1] - ys[j]);
        p.x() += spec.jitter * hx * rng.uniform(-0.5, 0.5);
        p.y() += spec.jitter * hy * rng.uniform(-0.5, 0.5);
      }
      pts[j * px + i] = p;
    }
  }

  std::vector<int> label(pts.size());
  std::iota(label.begin(), label.end(), 0);
  if (spec.shuffle_ids) {
    for (std::size_t k = label.size() - 1; k > 0; --k)
      std::swap(label[k], label[rng() % (k + 1)]);
  }
  std::vector<Vec2> vertices(pts.size());
  for (std::size_t k = 0; k < pts.size(); ++k) vertices[label[k]] = pts[k];

  std::vector<std::array<int, 3>> tris;
  tris.reserve(2 * spec.nx * spec.ny);
  for (int j = 0; j < spec.ny; ++j) {
    for (int i = 0; i < spec.nx; ++i) {
      const int a = label[j * px + i], b = label[j * px + i + 1];
      const int c = label[(j + 1) * px + i + 1], d = label[(j + 1) * px + i];
      const bool flip = spec.random_diagonals ? (rng() & 1) != 0 : ((i + j) % 2 == 1);
      if (flip) {
        tris.push_back({a, b, d});
        tris.push_back({b, c, d});
      } else {
        tris.push_back({a, b, c});
        tris.push_back({a, c, d});
      }
    }
  }
  return build_mesh(std::move(vertices), tris);
}

void write_mesh(std::ostream& out, const Mesh& mesh) {
  out.precision(17);
  if (mesh.holes > 0) out << "# holes " << mesh.holes << "\n";
  out << mesh.num_vertices() << " 2\n";
  for (int v = 0; v < mesh.num_vertices(); ++v)
    out << v + 1 << ' ' << mesh.vertices[v].x() << ' ' << mesh.vertices[v].y() << '\n';
  out << mesh.num_faces() << " 3\n";
  for (int f = 0; f < mesh.num_faces(); ++f)
    out << f + 1 << ' ' << mesh.faces[f][0] + 1 << ' ' << mesh.faces[f][1] + 1 << ' '
        << mesh.faces[f][2] + 1 << '\n';
}

void save_mesh(const std::string& path, const Mesh& mesh) {
  AtomicFile file(path);
  write_mesh(file.stream(), mesh);
  file.commit();
}

}  // namespace wpic
