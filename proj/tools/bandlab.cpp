// bandlab: band structures of periodic Schrodinger operators with plane-wave
// discretizations, including the modified-kinetic scheme.
//
// Every subcommand reads an optional JSON config (--config), applies flag
// overrides, writes the fully resolved config to <out>/resolved_config.json
// and its artifacts next to it, and prints one summary line.
//
// Exit codes: 0 ok, 2 invalid input, 3 solver failure, 1 anything else.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "bandlab/analysis.hpp"
#include "bandlab/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace bandlab;

namespace {

// Flag values; applied only when the flag was given.
struct Flags {
  std::string config;
  double ec = 0;
  std::string ec_ladder;
  std::string scheme;
  int blowup_m = 0;
  double blowup_p = 0, blowup_c = 0, blowup_a = 0;
  int blowup_msmooth = 0;
  int nbands = 0;
  int grid = 0;
  std::string path;
  double electrons = 0;
  std::string out;
  std::uint64_t seed = 0;
  int threads = 0;
  // potential synth / blowup check
  double t = 0;
  int gmax = 0;

  // The same flag exists on several subcommands; only one of them parses.
  std::map<std::string, std::vector<CLI::Option*>> given;
  void track(const std::string& name, CLI::Option* opt) { given[name].push_back(opt); }
  bool has(const std::string& name) const {
    const auto it = given.find(name);
    if (it == given.end()) return false;
    for (const auto* o : it->second) {
      if (o->count() > 0) return true;
    }
    return false;
  }
};

void add_common_flags(CLI::App* app, Flags& f) {
  f.track("config", app->add_option("--config", f.config, "JSON run configuration"));
  f.track("ec", app->add_option("--ec", f.ec, "cutoff energy Ec"));
  f.track("ec-ladder", app->add_option("--ec-ladder", f.ec_ladder, "comma-separated cutoffs"));
  f.track("scheme", app->add_option("--scheme", f.scheme, "uniform, kdep or modified")
                          ->check(CLI::IsMember({"uniform", "kdep", "modified"})));
  f.track("blowup-m", app->add_option("--blowup-m", f.blowup_m, "blow-up regularity class m"));
  f.track("blowup-p", app->add_option("--blowup-p", f.blowup_p, "blow-up singularity order p"));
  f.track("blowup-c", app->add_option("--blowup-c", f.blowup_c, "blow-up tail constant C"));
  f.track("blowup-a", app->add_option("--blowup-a", f.blowup_a, "bridge/tail junction a"));
  f.track("nbands", app->add_option("--nbands", f.nbands, "number of bands"));
  f.track("grid", app->add_option("--grid", f.grid, "uniform k-grid points per dimension"));
  f.track("path", app->add_option(
      "--path", f.path, "k-path, e.g. \"G:0,0;M:0.5,0;K:0.3333333333333333,0.3333333333333333\""));
  f.track("electrons", app->add_option("--electrons", f.electrons, "electrons per cell"));
  f.track("out", app->add_option("--out", f.out, "output directory"));
  f.track("seed", app->add_option("--seed", f.seed, "seed for synthetic potentials and sampling"));
  f.track("threads", app->add_option("--threads", f.threads, "worker threads for per-k work"));
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, fmt::format("'{}' is not a number", item));
    }
  }
  if (out.empty()) throw Error(ErrorCode::ParseError, "empty number list");
  return out;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, fmt::format("cannot open {}", path));
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, fmt::format("{}: {}", path, e.what()));
  }
}

json defaults() {
  return {{"lattice", {{"kind", "chain"}, {"a", 1.0}}},
          {"potential", {{"kind", "cosine"}, {"amplitude", 1.0}}},
          {"scheme", "kdep"},
          {"blowup", {{"m", 1}, {"p", 1.5}, {"a", 0.75}}},
          {"ec", 25.0},
          {"nbands", 2},
          {"electrons", 1.0},
          {"out", "bandlab_out"},
          {"seed", 7},
          {"threads", 1}};
}

// Config file, then flags, then defaults for anything still missing.
json resolve_config(const Flags& f) {
  json cfg = f.has("config") ? read_json_file(f.config) : json::object();
  if (!cfg.is_object()) throw Error(ErrorCode::ParseError, "config must be a JSON object");
  if (f.has("ec")) cfg["ec"] = f.ec;
  if (f.has("ec-ladder")) cfg["ec_ladder"] = parse_list(f.ec_ladder);
  if (f.has("scheme")) cfg["scheme"] = f.scheme;
  if (f.has("blowup-m")) cfg["blowup"]["m"] = f.blowup_m;
  if (f.has("blowup-p")) cfg["blowup"]["p"] = f.blowup_p;
  if (f.has("blowup-c")) cfg["blowup"]["C"] = f.blowup_c;
  if (f.has("blowup-a")) cfg["blowup"]["a"] = f.blowup_a;
  if (f.has("nbands")) cfg["nbands"] = f.nbands;
  if (f.has("grid")) {
    cfg["kpoints"] = {{"grid", f.grid}};
  }
  if (f.has("path")) {
    if (f.has("grid")) throw Error(ErrorCode::InvalidArgument, "--path and --grid are exclusive");
    const int samples = cfg.contains("kpoints") ? cfg["kpoints"].value("samples_per_segment", 50) : 50;
    cfg["kpoints"] = {{"path", f.path}, {"samples_per_segment", samples}};
  }
  if (f.has("electrons")) cfg["electrons"] = f.electrons;
  if (f.has("out")) cfg["out"] = f.out;
  if (f.has("seed")) cfg["seed"] = f.seed;
  if (f.has("threads")) cfg["threads"] = f.threads;

  const json d = defaults();
  for (const auto& [key, value] : d.items()) {
    if (!cfg.contains(key)) {
      cfg[key] = value;
    } else if (value.is_object() && cfg[key].is_object() && key == "blowup") {
      for (const auto& [k2, v2] : value.items()) {
        if (!cfg[key].contains(k2)) cfg[key][k2] = v2;
      }
    }
  }
  if (cfg["potential"].value("kind", "") == "synth" && !cfg["potential"].contains("seed")) {
    cfg["potential"]["seed"] = cfg["seed"];
  }
  if (f.has("seed") && cfg["potential"].value("kind", "") == "synth") {
    cfg["potential"]["seed"] = f.seed;
  }
  return cfg;
}

template <typename T>
T get(const json& cfg, const std::string& key) {
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, fmt::format("config key '{}': {}", key, e.what()));
  }
}

double finite_positive(const json& cfg, const std::string& key) {
  const double v = get<double>(cfg, key);
  if (!std::isfinite(v) || v <= 0.0) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("'{}' must be positive and finite", key));
  }
  return v;
}

Lattice lattice_of_kind(const std::string& kind, double a) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw Error(ErrorCode::InvalidArgument, "lattice parameter must be positive");
  }
  if (kind == "chain") return Lattice::chain(a);
  if (kind == "hexagonal") return Lattice::hexagonal(a);
  if (kind == "cubic") return Lattice::cubic(a);
  if (kind == "fcc") return Lattice::fcc(a);
  throw Error(ErrorCode::InvalidArgument,
              fmt::format("unknown lattice kind '{}' (chain, hexagonal, cubic, fcc)", kind));
}

Lattice build_lattice(const json& cfg) {
  const json& l = cfg.at("lattice");
  if (l.contains("primitive")) return lattice_from_json(l);
  return lattice_of_kind(l.value("kind", "chain"), l.value("a", 1.0));
}

// Coefficients keyed by integer index, independent of the cell size.
std::vector<std::pair<GIndex, Complex>> potential_entries(const json& cfg, const Lattice& lat) {
  const json& p = cfg.at("potential");
  const std::string kind = p.value("kind", "");
  const double amplitude = p.value("amplitude", 1.0);
  std::vector<std::pair<GIndex, Complex>> out;
  if (kind == "zero") return out;
  if (kind == "cosine") {
    for (int i = 0; i < lat.dim(); ++i) {
      GIndex g;
      g[static_cast<std::size_t>(i)] = 1;
      out.emplace_back(g, amplitude);
      out.emplace_back(-g, amplitude);
    }
    return out;
  }
  FourierPotential src = zero_potential(lat);
  if (kind == "synth") {
    src = synth_power_law(lat, get<double>(p, "t"), p.value("gmax", 64),
                          p.value("seed", std::uint64_t{7}));
  } else if (kind == "file") {
    src = potential_from_json(read_json_file(get<std::string>(p, "path")));
  } else if (kind == "inline") {
    json wrapped = p;
    wrapped["lattice"] = lattice_to_json(lat);
    src = potential_from_json(wrapped);
  } else {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("unknown potential kind '{}' (zero, cosine, synth, file, inline)", kind));
  }
  for (const auto& [g, c] : src.coeffs()) out.emplace_back(g, amplitude * c);
  return out;
}

FourierPotential build_potential(const json& cfg, const Lattice& lat) {
  return potential_from_coeffs(lat, potential_entries(cfg, lat));
}

BlowupSpec build_blowup_spec(const json& cfg) { return blowup_spec_from_json(cfg.at("blowup")); }

Scheme build_scheme(const std::string& name, const json& cfg) {
  const SchemeKind kind = scheme_kind_from_string(name);
  if (kind == SchemeKind::Modified) return Scheme::modified(build_blowup_spec(cfg));
  return {kind, nullptr};
}

bool has_grid(const json& cfg) { return cfg.contains("kpoints") && cfg["kpoints"].contains("grid"); }

KPointSet build_kpoints(const json& cfg, const Lattice& lat, bool need_grid) {
  if (!cfg.contains("kpoints")) {
    throw Error(ErrorCode::InvalidArgument, "no k-points: pass --grid N or --path SPEC");
  }
  const json& k = cfg["kpoints"];
  if (k.contains("grid") && k.contains("path")) {
    throw Error(ErrorCode::InvalidArgument, "k-points: grid and path are exclusive");
  }
  if (k.contains("grid")) {
    const int n = get<int>(k, "grid");
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "grid size must be >= 1");
    return uniform_grid(lat, n);
  }
  if (need_grid) throw Error(ErrorCode::InvalidArgument, "this command needs a uniform grid (--grid N)");
  if (!k.contains("path")) throw Error(ErrorCode::InvalidArgument, "k-points need 'grid' or 'path'");

  std::vector<PathNode> nodes;
  std::stringstream ss(get<std::string>(k, "path"));
  std::string node;
  while (std::getline(ss, node, ';')) {
    const auto colon = node.find(':');
    if (colon == std::string::npos) {
      throw Error(ErrorCode::ParseError, fmt::format("path node '{}' is not LABEL:f1,..,fd", node));
    }
    const auto frac = parse_list(node.substr(colon + 1));
    if (static_cast<int>(frac.size()) != lat.dim()) {
      throw Error(ErrorCode::ParseError,
                  fmt::format("path node '{}' needs {} coordinates", node, lat.dim()));
    }
    Vec f(lat.dim());
    for (int i = 0; i < lat.dim(); ++i) f[i] = frac[static_cast<std::size_t>(i)];
    nodes.push_back({node.substr(0, colon), lat.k_from_fractional(f)});
  }
  return kpath(lat, nodes, k.value("samples_per_segment", 50));
}

fs::path prepare_out(const json& cfg) {
  const fs::path out = get<std::string>(cfg, "out");
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw std::runtime_error(fmt::format("cannot create {}: {}", out.string(), ec.message()));
  return out;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream o(p, std::ios::binary);
  o << text;
  if (!o) throw std::runtime_error(fmt::format("cannot write {}", p.string()));
}

void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

std::string hex(std::uint64_t x) { return fmt::format("{:016x}", x); }

struct Context {
  json cfg;
  fs::path out;
  Lattice lat;
  FourierPotential v;
  int threads;
};

Context make_context(const Flags& f) {
  json cfg = resolve_config(f);
  Lattice lat = build_lattice(cfg);
  FourierPotential v = build_potential(cfg, lat);
  const int threads = get<int>(cfg, "threads");
  if (threads < 1) throw Error(ErrorCode::InvalidArgument, "--threads must be >= 1");
  fs::path out = prepare_out(cfg);
  write_json(out / "resolved_config.json", cfg);
  return {std::move(cfg), std::move(out), std::move(lat), std::move(v), threads};
}

json inputs_digest(const Context& c) {
  return {{"config", hex(digest(c.cfg))},
          {"lattice", hex(digest(lattice_to_json(c.lat)))},
          {"potential", hex(digest(potential_to_json(c.v)))}};
}

int cmd_bands(const Flags& f) {
  auto c = make_context(f);
  const auto kset = build_kpoints(c.cfg, c.lat, false);
  const auto scheme = build_scheme(get<std::string>(c.cfg, "scheme"), c.cfg);
  const double ec = finite_positive(c.cfg, "ec");
  const auto bands = compute_bands(c.lat, c.v, kset, ec, scheme, get<int>(c.cfg, "nbands"), c.threads);
  write_text(c.out / "bands.csv", bands_to_csv(c.lat, bands));
  write_json(c.out / "bands.json", {{"inputs", inputs_digest(c)},
                                    {"kpoints", kpoints_to_json(c.lat, kset)},
                                    {"n_bands", bands.n_bands},
                                    {"scheme", to_string(scheme.kind)},
                                    {"ec", ec}});
  fmt::print("bands: {} k-points x {} bands, scheme {}, Ec {} -> {}\n", kset.size(), bands.n_bands,
             to_string(scheme.kind), ec, (c.out / "bands.csv").string());
  return 0;
}

BandStructure grid_bands(const Context& c) {
  const auto kset = build_kpoints(c.cfg, c.lat, true);
  const auto scheme = build_scheme(get<std::string>(c.cfg, "scheme"), c.cfg);
  return compute_bands(c.lat, c.v, kset, finite_positive(c.cfg, "ec"), scheme,
                       get<int>(c.cfg, "nbands"), c.threads);
}

int cmd_dos(const Flags& f) {
  auto c = make_context(f);
  const auto bands = grid_bands(c);
  const int points = c.cfg.value("mu_points", 201);
  if (points < 2) throw Error(ErrorCode::InvalidArgument, "mu_points must be >= 2");
  const double lo = bands.energies.minCoeff() - 0.5;
  const double hi = bands.energies.maxCoeff() + 0.5;
  std::string csv = "mu,idos,idoe,truncation_warning\n";
  bool warned = false;
  for (int i = 0; i < points; ++i) {
    const double mu = lo + (hi - lo) * i / (points - 1);
    const auto n = idos(bands, mu);
    const auto e = idoe(bands, mu);
    warned = warned || n.truncation_warning;
    csv += fmt::format("{:.17g},{:.17g},{:.17g},{}\n", mu, n.value, e.value,
                       n.truncation_warning ? 1 : 0);
  }
  write_text(c.out / "dos.csv", csv);
  write_json(c.out / "dos.json", {{"inputs", inputs_digest(c)},
                                  {"mu_range", {lo, hi}},
                                  {"mu_points", points},
                                  {"truncation_warning", warned}});
  fmt::print("dos: {} mu values in [{:.6g}, {:.6g}]{} -> {}\n", points, lo, hi,
             warned ? " (top band reached: increase --nbands)" : "", (c.out / "dos.csv").string());
  return 0;
}

json fermi_json(const FermiLevel& fl) {
  json j{{"mu_F", fl.mu},
         {"bracket", {fl.bracket_lo, fl.bracket_hi}},
         {"truncation_warning", fl.truncation_warning},
         {"gap", nullptr}};
  if (fl.gap) j["gap"] = {{"lower", fl.gap->lower}, {"upper", fl.gap->upper}, {"width", fl.gap->width()}};
  return j;
}

int cmd_fermi(const Flags& f) {
  auto c = make_context(f);
  const auto bands = grid_bands(c);
  const double n = finite_positive(c.cfg, "electrons");
  const auto fl = fermi_level(bands, n);
  json j = fermi_json(fl);
  j["electrons"] = n;
  j["idoe_at_mu_F"] = idoe(bands, fl.mu).value;
  j["inputs"] = inputs_digest(c);
  write_json(c.out / "fermi.json", j);
  fmt::print("fermi: mu_F = {:.12g}, bracket [{:.12g}, {:.12g}]{}\n", fl.mu, fl.bracket_lo,
             fl.bracket_hi,
             fl.gap ? fmt::format(", gap {:.6g}", fl.gap->width()) : std::string(", metallic"));
  return 0;
}

int cmd_converge(const Flags& f) {
  auto c = make_context(f);
  if (!c.cfg.contains("ec_ladder")) throw Error(ErrorCode::InvalidArgument, "converge needs --ec-ladder");
  const auto ladder = get<std::vector<double>>(c.cfg, "ec_ladder");
  const double ec_ref = c.cfg.value("ec_ref", 16.0 * ladder.back());
  KPointSet probe;
  if (has_grid(c.cfg)) {
    probe = build_kpoints(c.cfg, c.lat, true);
  } else {
    std::vector<double> frac(static_cast<std::size_t>(c.lat.dim()), 0.05);
    if (c.cfg.contains("k_probe")) {
      const json& kp = c.cfg["k_probe"];
      frac = kp.is_number() ? std::vector<double>{kp.get<double>()} : get<std::vector<double>>(c.cfg, "k_probe");
    }
    if (static_cast<int>(frac.size()) != c.lat.dim()) {
      throw Error(ErrorCode::InvalidArgument, "k_probe has the wrong dimension");
    }
    Vec fv(c.lat.dim());
    for (int i = 0; i < c.lat.dim(); ++i) fv[i] = frac[static_cast<std::size_t>(i)];
    probe.points = {c.lat.k_from_fractional(fv)};
  }
  const int band = c.cfg.value("band", 1);
  const auto scheme = build_scheme(get<std::string>(c.cfg, "scheme"), c.cfg);
  const auto ref = make_reference(c.lat, c.v, probe, ec_ref, band, {}, c.threads);

  double r = c.cfg.value("r_potential", std::nan(""));
  const json& p = c.cfg["potential"];
  if (std::isnan(r) && p.value("kind", "") == "synth") r = synth_sobolev_order(get<double>(p, "t"), c.lat.dim());
  const auto study = convergence_study(c.lat, c.v, band, ladder, scheme, ref, r, c.threads);

  std::string csv = "ec,error,clamped\n";
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    csv += fmt::format("{:.17g},{:.17g},{}\n", ladder[i], study.errors[i], study.clamped[i] ? 1 : 0);
  }
  write_text(c.out / "converge.csv", csv);
  json j = to_json(study);
  if (std::isnan(r)) {
    j["r_potential"] = nullptr;
    j["predicted_rate"] = nullptr;
  }
  j["scheme"] = to_string(scheme.kind);
  j["ec_ref"] = ec_ref;
  j["inputs"] = inputs_digest(c);
  write_json(c.out / "converge.json", j);
  fmt::print("converge: scheme {}, fitted rate {:.4g} (full ladder {:.4g}), predicted {}{}\n",
             to_string(scheme.kind), study.fitted_rate, study.full_fit_rate,
             std::isnan(r) ? std::string("n/a") : fmt::format("{:.4g}", study.predicted_rate),
             study.any_clamped ? ", some errors at the precision floor" : "");
  return 0;
}

int cmd_regularity(const Flags& f) {
  auto c = make_context(f);
  const auto spec = build_blowup_spec(c.cfg);
  const auto widths = c.cfg.value("mesh_widths", std::vector<double>{1e-2, 5e-3, 2.5e-3, 1.25e-3});
  const int band = c.cfg.value("band", 1);
  const int order = c.cfg.value("order", 1);
  const auto probe = regularity_probe(c.lat, c.v, finite_positive(c.cfg, "ec"), spec, band, order, widths);
  std::string csv = "mesh_width,peak,raw_peak\n";
  for (std::size_t i = 0; i < widths.size(); ++i) {
    csv += fmt::format("{:.17g},{:.17g},{:.17g}\n", widths[i], probe.peak_magnitudes[i],
                       probe.raw_peak_magnitudes[i]);
  }
  write_text(c.out / "regularity.csv", csv);
  json j = to_json(probe);
  j["blowup"] = blowup_spec_to_json(spec);
  j["inputs"] = inputs_digest(c);
  write_json(c.out / "regularity.json", j);
  fmt::print("regularity: band {}, order {}, p = {} -> {}\n", band, order, spec.p,
             j["verdict"].get<std::string>());
  return 0;
}

int cmd_periodicity(const Flags& f) {
  auto c = make_context(f);
  const double ec = finite_positive(c.cfg, "ec");
  const int samples = c.cfg.value("samples", 50);
  const int nbands = get<int>(c.cfg, "nbands");
  if (samples < 1) throw Error(ErrorCode::InvalidArgument, "samples must be >= 1");
  std::mt19937_64 rng(get<std::uint64_t>(c.cfg, "seed"));
  std::uniform_real_distribution<double> unit(-0.5, 0.5);
  std::vector<Vec> ks;
  for (int s = 0; s < samples; ++s) {
    Vec fr(c.lat.dim());
    for (int i = 0; i < c.lat.dim(); ++i) fr[i] = unit(rng);
    ks.push_back(c.lat.k_from_fractional(fr));
  }
  std::vector<GIndex> shifts;
  for (int i = 0; i < c.lat.dim(); ++i) {
    GIndex g;
    g[static_cast<std::size_t>(i)] = 1;
    shifts.push_back(g);
  }
  const std::vector<Scheme> schemes{Scheme::uniform(), Scheme::kdependent(),
                                    Scheme::modified(build_blowup_spec(c.cfg))};
  const auto rows = periodicity_report(c.lat, c.v, ec, schemes, ks, shifts, nbands);
  std::string csv = "scheme,max_violation\n";
  json j = {{"inputs", inputs_digest(c)}, {"rows", json::array()}};
  std::string summary;
  for (const auto& r : rows) {
    csv += fmt::format("{},{:.17g}\n", to_string(r.scheme), r.max_violation);
    j["rows"].push_back({{"scheme", to_string(r.scheme)}, {"max_violation", r.max_violation}});
    summary += fmt::format(" {}={:.3g}", to_string(r.scheme), r.max_violation);
  }
  write_text(c.out / "periodicity.csv", csv);
  write_json(c.out / "periodicity.json", j);
  fmt::print("periodicity: max |e_n(k) - e_n(k+G)| over {} samples:{}\n", samples, summary);
  return 0;
}

int cmd_cellscan(const Flags& f) {
  auto c = make_context(f);
  const json& l = c.cfg.at("lattice");
  if (l.contains("primitive")) {
    throw Error(ErrorCode::InvalidArgument, "cellscan needs a lattice given by kind and a");
  }
  const std::string kind = l.value("kind", "chain");
  const double a0 = l.value("a", 1.0);
  std::vector<double> ladder;
  const json spec = c.cfg.value("a_ladder", json{{"span", 0.05}, {"count", 50}});
  if (spec.is_array()) {
    ladder = spec.get<std::vector<double>>();
  } else {
    const double centre = spec.value("center", a0);
    const double span = spec.value("span", 0.05);
    const int count = spec.value("count", 50);
    if (count < 3) throw Error(ErrorCode::InvalidArgument, "a_ladder needs at least 3 points");
    for (int i = 0; i < count; ++i) ladder.push_back(centre * (1.0 - span + 2.0 * span * i / (count - 1)));
  }
  if (!has_grid(c.cfg)) throw Error(ErrorCode::InvalidArgument, "cellscan needs --grid N");
  const int grid = get<int>(c.cfg["kpoints"], "grid");
  const auto entries = potential_entries(c.cfg, c.lat);
  const std::vector<Scheme> schemes{Scheme::kdependent(), Scheme::modified(build_blowup_spec(c.cfg))};
  const auto scan = energy_vs_cell_parameter(
      [&](double a) { return lattice_of_kind(kind, a); },
      [&](const Lattice& lat) { return potential_from_coeffs(lat, entries); },
      finite_positive(c.cfg, "ec"), schemes, ladder, finite_positive(c.cfg, "electrons"), grid,
      get<int>(c.cfg, "nbands"), c.threads);

  std::string csv = "a";
  for (const auto& col : scan.columns) csv += fmt::format(",{}", to_string(col.scheme));
  csv += '\n';
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    csv += fmt::format("{:.17g}", ladder[i]);
    for (const auto& col : scan.columns) csv += fmt::format(",{:.17g}", col.energy_per_volume[i]);
    csv += '\n';
  }
  write_text(c.out / "cellscan.csv", csv);
  json j = to_json(scan);
  j["inputs"] = inputs_digest(c);
  write_json(c.out / "cellscan.json", j);
  const double k2 = scan.columns[0].max_second_difference;
  const double m2 = scan.columns[1].max_second_difference;
  fmt::print("cellscan: max |second difference| kdep {:.3e}, modified {:.3e}, ratio {:.3g}\n", k2, m2,
             m2 > 0 ? k2 / m2 : INFINITY);
  return 0;
}

int cmd_potential_synth(const Flags& f) {
  auto c = make_context(f);
  if (!f.has("t")) throw Error(ErrorCode::InvalidArgument, "potential synth needs --t");
  const int gmax = f.has("gmax") ? f.gmax : 64;
  const auto seed = get<std::uint64_t>(c.cfg, "seed");
  const auto v = synth_power_law(c.lat, f.t, gmax, seed);
  write_json(c.out / "potential.json", potential_to_json(v));
  fmt::print("potential synth: {} coefficients, t = {}, H^s for s < {}, sup-norm bound {:.6g} -> {}\n",
             v.coeffs().size(), f.t, synth_sobolev_order(f.t, c.lat.dim()), v.sup_norm_proxy(),
             (c.out / "potential.json").string());
  return 0;
}

int cmd_blowup_check(const Flags& f) {
  BlowupSpec spec;
  if (f.has("config")) spec = blowup_spec_from_json(read_json_file(f.config).value("blowup", json::object()));
  if (f.has("blowup-m")) spec.m = f.blowup_m;
  if (f.has("blowup-p")) spec.p = f.blowup_p;
  if (f.has("blowup-c")) spec.c = f.blowup_c;
  if (f.has("blowup-a")) spec.a = f.blowup_a;
  if (f.has("msmooth")) spec.msmooth = f.blowup_msmooth;
  const BlowupFunction g(spec);
  const auto& val = g.validation();
  if (f.has("out")) {
    const fs::path out = f.out;
    fs::create_directories(out);
    json j = blowup_spec_to_json(g.spec());
    j["min_domination_margin"] = val.min_domination_margin;
    j["max_junction_mismatch"] = val.max_junction_mismatch;
    j["samples"] = val.samples;
    write_json(out / "blowup.json", j);
    std::string csv = "x,G\n";
    for (int i = 0; i <= 400; ++i) {
      const double x = 0.995 * i / 400.0;
      csv += fmt::format("{:.17g},{:.17g}\n", x, g(x));
    }
    write_text(out / "blowup.csv", csv);
  }
  fmt::print("blowup check: ok, m = {}, p = {}, C = {}, a = {}, msmooth = {}, min G(x)-x^2 = {:.3g}\n",
             g.spec().m, g.spec().p, g.tail_constant(), g.spec().a, g.spec().smoothness(),
             val.min_domination_margin);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bandlab: plane-wave band structures with k-dependent and modified kinetic schemes"};
  app.require_subcommand(1);
  Flags f;

  struct Command {
    const char* name;
    const char* help;
    int (*run)(const Flags&);
  };
  const Command commands[] = {
      {"bands", "band energies along a path or on a grid", cmd_bands},
      {"dos", "integrated density of states and energy sweep", cmd_dos},
      {"fermi", "Fermi level for --electrons", cmd_fermi},
      {"converge", "error vs cutoff against a large-cutoff reference", cmd_converge},
      {"regularity", "derivative peaks of the modified band at a basis change", cmd_regularity},
      {"periodicity", "|e_n(k) - e_n(k+G)| for each scheme", cmd_periodicity},
      {"cellscan", "energy per volume vs lattice parameter", cmd_cellscan},
  };
  int (*selected)(const Flags&) = nullptr;
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    add_common_flags(sub, f);
    sub->callback([&selected, run = c.run] { selected = run; });
  }

  auto* potential = app.add_subcommand("potential", "potential utilities");
  potential->require_subcommand(1);
  auto* synth = potential->add_subcommand("synth", "write a seeded power-law potential");
  add_common_flags(synth, f);
  f.track("t", synth->add_option("--t", f.t, "decay exponent, coefficients ~ |G|^-t")->required());
  f.track("gmax", synth->add_option("--gmax", f.gmax, "largest shell index"));
  synth->callback([&] { selected = cmd_potential_synth; });

  auto* blowup = app.add_subcommand("blowup", "blow-up function utilities");
  blowup->require_subcommand(1);
  auto* check = blowup->add_subcommand("check", "build and validate a blow-up function");
  f.track("config", check->add_option("--config", f.config, "JSON with a 'blowup' object"));
  f.track("blowup-m", check->add_option("--m,--blowup-m", f.blowup_m, "regularity class m"));
  f.track("blowup-p", check->add_option("--p,--blowup-p", f.blowup_p, "singularity order p"));
  f.track("blowup-c", check->add_option("--c,--blowup-c", f.blowup_c, "tail constant C"));
  f.track("blowup-a", check->add_option("--a,--blowup-a", f.blowup_a, "junction a"));
  f.track("msmooth", check->add_option("--msmooth", f.blowup_msmooth, "derivative matching order"));
  f.track("out", check->add_option("--out", f.out, "write blowup.json and blowup.csv here"));
  check->callback([&] { selected = cmd_blowup_check; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    return selected ? selected(f) : 2;
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return e.code() == ErrorCode::SolverFailure ? 3 : 2;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
}
