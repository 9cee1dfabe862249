// Emits system description files for the bundled example family.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <random>
#include <string>

#include "kh/builders.hpp"
#include "kh/errors.hpp"
#include "kh/systemio.hpp"

namespace {

void emit(const kh::FiniteExtension& ext, const std::string& out_path) {
  const std::string text = kh::render_report(kh::serialize_system(ext));
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) {
    std::cerr << "cannot write '" << out_path << "'\n";
    std::exit(1);
  }
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"System file generator"};
  app.require_subcommand(1);

  std::string out_path;
  std::size_t n = 6;
  std::uint64_t seed = 1;
  std::size_t max_bottom = 4;
  std::size_t max_fiber = 3;
  bool second_gen = false;

  auto* skew = app.add_subcommand("skew", "skew product on Z_n x Z_n over the rotation");
  skew->add_option("--n", n, "cycle length");
  skew->add_option("--out", out_path, "output path");

  auto* fourtwo = app.add_subcommand("fourtwo", "four atoms over two with an in-fiber swap");
  fourtwo->add_option("--out", out_path, "output path");

  auto* identity = app.add_subcommand("identity", "rotation on n atoms over itself");
  identity->add_option("--n", n, "cycle length");
  identity->add_option("--out", out_path, "output path");

  auto* random = app.add_subcommand("random", "seeded random extension");
  random->add_option("--seed", seed, "generator seed");
  random->add_option("--bottom", max_bottom, "largest bottom size");
  random->add_option("--fiber", max_fiber, "largest fiber size");
  random->add_flag("--second-gen", second_gen, "add a second commuting generator");
  random->add_option("--out", out_path, "output path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(skew)) {
      emit(kh::skew_torus(n), out_path);
    } else if (app.got_subcommand(fourtwo)) {
      emit(kh::four_two(), out_path);
    } else if (app.got_subcommand(identity)) {
      emit(kh::identity_extension(kh::cyclic_rotation(n)), out_path);
    } else if (app.got_subcommand(random)) {
      std::mt19937_64 rng(seed);
      emit(kh::random_extension(rng, max_bottom, max_fiber, second_gen), out_path);
    }
  } catch (const kh::Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 0;
}
