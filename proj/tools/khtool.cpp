// Command line front end: loads finite extension files, runs the analysis
// pipelines, and emits deterministic JSON reports.

#include <CLI11.hpp>

#include <complex>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "kh/errors.hpp"
#include "kh/gsystem.hpp"
#include "kh/homs.hpp"
#include "kh/measure.hpp"
#include "kh/shift.hpp"
#include "kh/structure.hpp"
#include "kh/systemio.hpp"

namespace {

using kh::Json;
using kh::Rat;

constexpr double kGapBreach = 1e-8;
constexpr double kSpectralBreach = 1e-8;
constexpr double kJoiningBreach = 1e-10;
constexpr double kFolnerBreach = 1e-12;

void emit(const Json& report, const std::string& out_path) {
  const std::string text = kh::render_report(report);
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw kh::ParseError("cannot write '" + out_path + "'");
  out << text;
}

std::string rat_str(const Rat& r) {
  std::ostringstream ss;
  ss << r;
  return ss.str();
}

Json double_array(const std::vector<double>& v) {
  Json out = Json::array();
  for (double x : v) out.push_back(x);
  return out;
}

Json rat_array(const std::vector<Rat>& v) {
  Json out = Json::array();
  for (const Rat& r : v) out.push_back(rat_str(r));
  return out;
}

Eigen::VectorXcd centered_indicator(const kh::FiniteProbSpace& space, std::size_t atom) {
  if (atom >= space.size())
    throw kh::DomainError("atom index " + std::to_string(atom) + " out of range");
  Eigen::VectorXcd f = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(space.size()));
  for (std::size_t i = 0; i < space.size(); ++i)
    f(static_cast<Eigen::Index>(i)) = (i == atom ? 1.0 : 0.0) - space.massd(atom);
  return f;
}

// Symbol string of digits with an integer offset, "SYMS@OFF"; an optional
// "coeff*" prefix scales the term and an empty symbol block is a constant.
kh::CylinderFunction parse_cylinder(const std::string& text, std::size_t alphabet) {
  kh::CylinderFunction out;
  std::stringstream terms(text);
  std::string term;
  while (std::getline(terms, term, ';')) {
    while (!term.empty() && term.front() == ' ') term.erase(term.begin());
    while (!term.empty() && term.back() == ' ') term.pop_back();
    if (term.empty()) continue;
    kh::CylinderTerm t;
    t.coeff = Rat(1);
    std::string body = term;
    const auto star = term.find('*');
    if (star != std::string::npos) {
      try {
        t.coeff = Rat(term.substr(0, star));
      } catch (const std::exception&) {
        throw kh::ParseError("cylinder coefficient '" + term.substr(0, star) +
                             "' does not parse");
      }
      body = term.substr(star + 1);
    }
    if (!body.empty()) {
      const auto at = body.find('@');
      if (at == std::string::npos)
        throw kh::ParseError("cylinder term '" + term + "' has no offset");
      for (char c : body.substr(0, at)) {
        if (c < '0' || c > '9')
          throw kh::ParseError("cylinder symbol '" + std::string(1, c) + "' is not a digit");
        const int s = c - '0';
        if (static_cast<std::size_t>(s) >= alphabet)
          throw kh::ParseError("cylinder symbol " + std::to_string(s) +
                               " outside alphabet of size " + std::to_string(alphabet));
        t.pattern.push_back(s);
      }
      try {
        t.offset = std::stol(body.substr(at + 1));
      } catch (const std::exception&) {
        throw kh::ParseError("cylinder offset '" + body.substr(at + 1) + "' does not parse");
      }
    }
    out.push_back(std::move(t));
  }
  if (out.empty()) throw kh::ParseError("empty cylinder function");
  return out;
}

std::vector<Rat> parse_symbols(const std::string& text, std::size_t alphabet) {
  if (text.empty()) {
    std::vector<Rat> out(alphabet, Rat(1) / Rat(static_cast<long>(alphabet)));
    return out;
  }
  std::vector<Rat> out;
  std::stringstream parts(text);
  std::string part;
  while (std::getline(parts, part, ',')) {
    try {
      out.push_back(Rat(part));
    } catch (const std::exception&) {
      throw kh::ParseError("symbol mass '" + part + "' does not parse");
    }
  }
  return out;
}

kh::ModuleHom random_self_adjoint_intertwiner(const kh::GSystem& sys, std::uint64_t seed,
                                              double tol) {
  const auto basis = kh::intertwiner_basis(sys, tol);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  kh::ModuleHom a = kh::ModuleHom::zero(sys.shape(), sys.shape());
  for (const auto& b : basis) a = a + kh::Complex(gauss(rng), gauss(rng)) * b;
  return kh::Complex(0.5, 0.0) * (a + kh::adjoint(a));
}

int run_validate(const std::string& path, const std::string& out_path) {
  const kh::FiniteExtension ext = kh::load_system(path);
  Json names = Json::array();
  for (std::size_t g = 0; g < ext.top().generator_count(); ++g)
    names.push_back(ext.top().name(g));
  Json report{{"command", "validate"},
              {"input_digest", kh::fnv1a_digest_file(path)},
              {"valid", true},
              {"top_atoms", ext.top().space().size()},
              {"bottom_atoms", ext.bottom().space().size()},
              {"generators", std::move(names)},
              {"group", ext.top().kind() == kh::GroupKind::SingleGeneratorZ ? "Z" : "free"}};
  emit(report, out_path);
  return 0;
}

int run_kronecker(const std::string& path, const std::string& out_path, std::uint64_t seed,
                  double tol) {
  const kh::FiniteExtension ext = kh::load_system(path);
  const auto rep = kh::kronecker_subspace(ext, seed, tol);
  Json families = Json::array();
  for (const auto& fam : rep.families) families.push_back(fam.size());
  Json histogram = Json::array();
  for (const auto& [rank, atoms] : rep.rank_histogram)
    histogram.push_back(Json::array({rank, atoms}));
  const bool breach = !rep.is_full || rep.char_gap > kGapBreach ||
                      rep.family_gap > kGapBreach || rep.sons_residual > kGapBreach;
  Json report{{"command", "kronecker"},
              {"input_digest", kh::fnv1a_digest_file(path)},
              {"tol", tol},
              {"seed", seed},
              {"is_full", rep.is_full},
              {"families", std::move(families)},
              {"rank_one_generators", rep.rank_one_generators},
              {"rank_histogram", std::move(histogram)},
              {"partition_classes", rep.partition.size()},
              {"factor_atoms", rep.factor.top().space().size()},
              {"char_gap", rep.char_gap},
              {"family_gap", rep.family_gap},
              {"sons_residual", rep.sons_residual},
              {"wm_norm", rep.wm_norm},
              {"breach", breach}};
  emit(report, out_path);
  return breach ? 3 : 0;
}

int run_tower(const std::string& path, const std::string& out_path, std::uint64_t seed,
              double tol) {
  const kh::FiniteExtension ext = kh::load_system(path);
  const auto rep = kh::furstenberg_tower(ext, seed, tol);
  Json levels = Json::array();
  for (const auto& level : rep.levels) levels.push_back(level.size());
  const bool breach = !rep.is_full || rep.stabilized_at > 2;
  Json report{{"command", "tower"},
              {"input_digest", kh::fnv1a_digest_file(path)},
              {"tol", tol},
              {"seed", seed},
              {"levels", std::move(levels)},
              {"stabilized_at", rep.stabilized_at},
              {"is_full", rep.is_full},
              {"breach", breach}};
  emit(report, out_path);
  return breach ? 3 : 0;
}

int run_spectral(const std::string& path, const std::string& out_path, std::uint64_t seed,
                 int max_terms, double tol) {
  const kh::FiniteExtension ext = kh::load_system(path);
  const kh::ConditionalModule cm = kh::conditional_module(ext);
  const kh::ModuleHom h = random_self_adjoint_intertwiner(cm.system, seed, tol);
  const double scale = kh::sup_op_norm(h);
  const auto es = kh::equivariant_spectral(cm.system, h, max_terms, tol);
  Json lambdas = Json::array();
  for (const auto& lam : es.decomposition.lambdas) {
    Json level = Json::array();
    for (std::size_t w = 0; w < ext.bottom().space().size(); ++w)
      level.push_back(lam[w].real());
    lambdas.push_back(std::move(level));
  }
  const bool breach = es.decomposition.residual_norm > kSpectralBreach * std::max(1.0, scale) ||
                      es.lambda_equivariance > kSpectralBreach ||
                      es.commutation_residual > kSpectralBreach;
  Json report{{"command", "spectral"},
              {"input_digest", kh::fnv1a_digest_file(path)},
              {"tol", tol},
              {"seed", seed},
              {"max_terms", max_terms},
              {"terms", es.decomposition.terms()},
              {"operator_norm", scale},
              {"lambdas", std::move(lambdas)},
              {"residual_norm", es.decomposition.residual_norm},
              {"lambda_equivariance", es.lambda_equivariance},
              {"commutation_residual", es.commutation_residual},
              {"breach", breach}};
  emit(report, out_path);
  return breach ? 3 : 0;
}

int run_wm_test(const std::string& path, const std::string& out_path, double tol) {
  const kh::FiniteExtension ext = kh::load_system(path);
  const auto rep = kh::is_weakly_mixing(ext, tol);
  bool bijective = ext.top().space().size() == ext.bottom().space().size();
  const bool breach = rep.weakly_mixing != bijective;
  Json report{{"command", "wm-test"},
              {"input_digest", kh::fnv1a_digest_file(path)},
              {"tol", tol},
              {"weakly_mixing", rep.weakly_mixing},
              {"joint_fixed_dim", rep.joint_fixed_dim},
              {"bottom_fixed_dim", rep.bottom_fixed_dim},
              {"witness_residual", rep.witness_residual},
              {"factor_bijective", bijective},
              {"breach", breach}};
  emit(report, out_path);
  return breach ? 3 : 0;
}

int run_joining(const std::string& path, const std::string& out_path, double tol) {
  const kh::FiniteExtension ext = kh::load_system(path);
  const auto iso = kh::tensor_joining_iso(ext, ext);
  const auto& joint_space = iso.joining.extension.top().space();
  const std::size_t n_left = ext.top().space().size();

  // Elementary tensors of matching atom indicator pairs span the joint
  // module; check the pairing and the intertwining on all of them.
  std::vector<kh::ModuleHom> tensors;
  std::vector<kh::KhVector> images;
  for (const auto& [k, l] : iso.joining.pairs) {
    Eigen::VectorXcd ek = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n_left));
    Eigen::VectorXcd el = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n_left));
    ek(static_cast<Eigen::Index>(k)) = 1.0;
    el(static_cast<Eigen::Index>(l)) = 1.0;
    tensors.push_back(iso.elementary(ek, el));
    images.push_back(iso.forward(tensors.back()));
  }

  double isometry = 0.0;
  for (std::size_t i = 0; i < tensors.size(); ++i)
    for (std::size_t j = 0; j < tensors.size(); ++j) {
      const kh::StoneElement lhs = kh::hs_inner(tensors[i], tensors[j]);
      const kh::StoneElement rhs = kh::inner_product(images[i], images[j]);
      isometry = std::max(isometry, (lhs - rhs).sup_norm());
    }

  double intertwining = 0.0;
  for (std::size_t g = 0; g < ext.top().generator_count(); ++g)
    for (std::size_t i = 0; i < tensors.size(); ++i) {
      const kh::KhVector lhs = iso.forward(iso.tensor_apply(g, tensors[i]));
      const kh::KhVector rhs = kh::apply_generator(iso.joint.system, g, images[i]);
      intertwining = std::max(intertwining, kh::sup_norm(lhs - rhs));
    }

  // Conditional expectations of elementary tensors split exactly.
  bool product_exact = true;
  for (std::size_t z = 0; z < iso.joining.pairs.size(); ++z) {
    const auto [k, l] = iso.joining.pairs[z];
    std::vector<Rat> u(joint_space.size(), Rat(0));
    u[z] = Rat(1);
    std::vector<Rat> fk(n_left, Rat(0));
    std::vector<Rat> gl(n_left, Rat(0));
    fk[k] = Rat(1);
    gl[l] = Rat(1);
    const auto lhs = kh::conditional_expectation(iso.joining.extension, u);
    const auto ef = kh::conditional_expectation(ext, fk);
    const auto eg = kh::conditional_expectation(ext, gl);
    for (std::size_t y = 0; y < lhs.size(); ++y)
      if (lhs[y] != ef[y] * eg[y]) product_exact = false;
  }

  const bool breach = isometry > kJoiningBreach || intertwining > kJoiningBreach ||
                      !product_exact;
  Json report{{"command", "joining"},
              {"input_digest", kh::fnv1a_digest_file(path)},
              {"tol", tol},
              {"joint_atoms", joint_space.size()},
              {"isometry_residual", isometry},
              {"intertwining_residual", intertwining},
              {"product_identity_exact", product_exact},
              {"breach", breach}};
  emit(report, out_path);
  return breach ? 3 : 0;
}

int run_folner(const std::string& path, const std::string& out_path, std::size_t atom,
               std::size_t n_max) {
  const kh::FiniteExtension ext = kh::load_system(path);
  const Eigen::VectorXcd f = centered_indicator(ext.top().space(), atom);
  const auto rep = kh::folner_diagnostic(ext, f, f, n_max);
  Json report{{"command", "folner"},
              {"input_digest", kh::fnv1a_digest_file(path)},
              {"atom", atom},
              {"n_max", n_max},
              {"curve", double_array(rep.curve)},
              {"limit", rep.limit},
              {"period", rep.period}};
  bool breach = false;
  if (rep.period <= n_max && rep.period >= 1) {
    const double gap = std::abs(rep.curve[rep.period - 1] - rep.limit);
    report["gap_at_period"] = gap;
    breach = gap > kFolnerBreach * std::max(1.0, std::abs(rep.limit));
  }
  report["breach"] = breach;
  emit(report, out_path);
  return breach ? 3 : 0;
}

int run_shift(const std::string& out_path, std::size_t alphabet, const std::string& symbols_text,
              const std::string& cylinder_text, const std::string& cylinder_g_text,
              std::size_t n_max) {
  if (alphabet < 1) throw kh::DomainError("alphabet must have at least one symbol");
  const std::vector<Rat> symbols = parse_symbols(symbols_text, alphabet);
  if (symbols.size() != alphabet)
    throw kh::DomainError("expected " + std::to_string(alphabet) + " symbol masses, got " +
                          std::to_string(symbols.size()));
  const kh::CylinderFunction f = parse_cylinder(cylinder_text, alphabet);
  const kh::CylinderFunction g =
      cylinder_g_text.empty() ? f : parse_cylinder(cylinder_g_text, alphabet);
  const auto rep = kh::shift_correlations(symbols, f, g, n_max);

  std::ostringstream canon;
  for (const Rat& s : symbols) canon << rat_str(s) << ",";
  canon << "|" << cylinder_text << "|" << cylinder_g_text << "|" << n_max;
  Json report{{"command", "shift"},
              {"input_digest", kh::fnv1a_digest(canon.str())},
              {"alphabet", alphabet},
              {"symbols", rat_array(symbols)},
              {"n_max", n_max},
              {"mean_f", rat_str(rep.mean_f)},
              {"mean_g", rat_str(rep.mean_g)},
              {"correlations", rat_array(rep.correlations)},
              {"cesaro", rat_array(rep.cesaro)}};
  emit(report, out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite extension analysis tool"};
  app.require_subcommand(1);

  std::string path;
  std::string out_path;
  double tol = 1e-9;
  std::uint64_t seed = 1;
  int max_terms = 64;
  std::size_t folner_n = 16;
  std::size_t atom = 0;
  std::size_t alphabet = 2;
  std::string symbols_text;
  std::string cylinder_text;
  std::string cylinder_g_text;
  std::size_t shift_n = 64;

  auto add_common = [&](CLI::App* cmd, bool needs_file) {
    if (needs_file) cmd->add_option("file", path, "system description file")->required();
    cmd->add_option("--out", out_path, "write the report here instead of stdout");
    cmd->add_option("--tol", tol, "numerical tolerance");
  };

  auto* validate = app.add_subcommand("validate", "check a system file");
  add_common(validate, true);

  auto* kronecker = app.add_subcommand("kronecker", "discrete part and invariant families");
  add_common(kronecker, true);
  kronecker->add_option("--seed", seed, "harvest seed");

  auto* tower = app.add_subcommand("tower", "iterated relative Kronecker factors");
  add_common(tower, true);
  tower->add_option("--seed", seed, "harvest seed");

  auto* spectral = app.add_subcommand("spectral", "spectral data of a random intertwiner");
  add_common(spectral, true);
  spectral->add_option("--seed", seed, "draw seed");
  spectral->add_option("--max-terms", max_terms, "spectral term budget");

  auto* wm = app.add_subcommand("wm-test", "relative weak mixing test");
  add_common(wm, true);

  auto* joining = app.add_subcommand("joining", "self joining and the tensor identification");
  add_common(joining, true);

  auto* folner = app.add_subcommand("folner", "window averages of conditioned correlations");
  add_common(folner, true);
  folner->add_option("--atom", atom, "top atom whose centered indicator is averaged");
  folner->add_option("--folner-N", folner_n, "window count");

  auto* shift = app.add_subcommand("shift", "exact correlations on the full shift");
  shift->add_option("--out", out_path, "write the report here instead of stdout");
  shift->add_option("--alphabet", alphabet, "number of symbols");
  shift->add_option("--symbols", symbols_text, "comma separated symbol masses");
  shift->add_option("--cylinder", cylinder_text, "cylinder function, terms like 01@-1")
      ->required();
  shift->add_option("--cylinder-g", cylinder_g_text, "second cylinder function");
  shift->add_option("--N", shift_n, "correlation horizon");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(validate)) return run_validate(path, out_path);
    if (app.got_subcommand(kronecker)) return run_kronecker(path, out_path, seed, tol);
    if (app.got_subcommand(tower)) return run_tower(path, out_path, seed, tol);
    if (app.got_subcommand(spectral))
      return run_spectral(path, out_path, seed, max_terms, tol);
    if (app.got_subcommand(wm)) return run_wm_test(path, out_path, tol);
    if (app.got_subcommand(joining)) return run_joining(path, out_path, tol);
    if (app.got_subcommand(folner)) return run_folner(path, out_path, atom, folner_n);
    if (app.got_subcommand(shift))
      return run_shift(out_path, alphabet, symbols_text, cylinder_text, cylinder_g_text,
                       shift_n);
  } catch (const kh::Error& e) {
    Json report{{"command", app.get_subcommands().front()->get_name()},
                {"error", e.what()}};
    emit(report, "");
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
