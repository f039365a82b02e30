// Writes structured test meshes in the text format read by `wpic`.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "wpic/grid.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate a triangulated rectangle"};
  wpic::GridSpec g;
  std::string out;
  app.add_option("--nx", g.nx, "Cells along x")->check(CLI::PositiveNumber);
  app.add_option("--ny", g.ny, "Cells along y")->check(CLI::PositiveNumber);
  app.add_option("--x0", g.x0);
  app.add_option("--x1", g.x1);
  app.add_option("--y0", g.y0);
  app.add_option("--y1", g.y1);
  app.add_option("--jitter", g.jitter, "Interior vertex jitter as a fraction of spacing");
  app.add_flag("--random-diagonals", g.random_diagonals);
  app.add_option("--grading", g.grading, "sinh grading strength toward the center");
  app.add_flag("--shuffle-ids", g.shuffle_ids);
  app.add_option("--seed", g.seed);
  app.add_option("-o,--out", out, "Output file")->required();
  CLI11_PARSE(app, argc, argv);
  try {
    const wpic::Mesh mesh = wpic::make_grid_mesh(g);
    wpic::save_mesh(out, mesh);
    std::cout << out << ": " << mesh.num_vertices() << " vertices, " << mesh.num_edges()
              << " edges, " << mesh.num_faces() << " faces\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
