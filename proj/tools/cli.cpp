#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "magpot/errors.hpp"
#include "magpot/fields.hpp"
#include "magpot/forward.hpp"
#include "magpot/io.hpp"
#include "magpot/stability.hpp"

namespace magpot::cli {

using nlohmann::json;
namespace fs = std::filesystem;

json to_json(const RunConfig& c) {
  json j{{"command", c.command}, {"field", c.field},   {"n_list", c.n_list}, {"out", c.out},
         {"format", c.format},   {"precision", c.precision}, {"rtol", c.rtol}, {"seed", c.seed},
         {"fixture", c.fixture}, {"points", c.points}, {"r", c.r},           {"alpha", c.alpha},
         {"a", c.a},             {"samples", c.samples}, {"lambda", c.lambda}, {"reference", c.reference},
         {"bump_a", c.bump_a},   {"timing", c.timing}, {"input", c.input},   {"column", c.column}};
  j["n"] = c.n ? json(*c.n) : json(nullptr);
  j["k"] = c.k ? json(*c.k) : json(nullptr);
  return j;
}

void apply_json(RunConfig& c, const json& j) {
  if (!j.is_object()) throw ParseError("config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "command") c.command = value.get<std::string>();
      else if (key == "field") c.field = value.is_object() ? value.dump() : value.get<std::string>();
      else if (key == "n") c.n = value.is_null() ? std::nullopt : std::optional(value.get<int>());
      else if (key == "k") c.k = value.is_null() ? std::nullopt : std::optional(value.get<int>());
      else if (key == "n_list") c.n_list = value.get<std::vector<int>>();
      else if (key == "out") c.out = value.get<std::string>();
      else if (key == "format") c.format = value.get<std::string>();
      else if (key == "precision") c.precision = value.get<std::string>();
      else if (key == "rtol") c.rtol = value.get<double>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "fixture") c.fixture = value.get<std::string>();
      else if (key == "points") c.points = value.get<int>();
      else if (key == "r") c.r = value.get<double>();
      else if (key == "alpha") c.alpha = value.get<double>();
      else if (key == "a") c.a = value.get<double>();
      else if (key == "samples") c.samples = value.get<std::string>();
      else if (key == "lambda") c.lambda = value.get<double>();
      else if (key == "reference") c.reference = value.get<std::string>();
      else if (key == "bump_a") c.bump_a = value.get<std::vector<double>>();
      else if (key == "timing") c.timing = value.get<bool>();
      else if (key == "input") c.input = value.get<std::string>();
      else if (key == "column") c.column = value.get<std::string>();
      else throw ParseError("unknown config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad config value: ") + e.what());
  }
}

namespace {

/// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
double uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

Vec3 random_direction(std::mt19937_64& rng) {
  const double z = 2.0 * uniform(rng) - 1.0;
  const double phi = 2.0 * std::numbers::pi * uniform(rng);
  const double s = std::sqrt(1.0 - z * z);
  return {s * std::cos(phi), s * std::sin(phi), z};
}

QuadratureSpec quadrature_spec(const RunConfig& c) {
  if (!(c.rtol > 0.0 && c.rtol < 1.0)) throw InvalidInput("rtol must lie in (0, 1)");
  QuadratureSpec spec;
  spec.rtol = c.rtol;
  return spec;
}

fs::path output_dir(const RunConfig& c) {
  fs::path dir(c.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InvalidInput("cannot create output directory " + dir.string());
  return dir;
}

void check_format(const RunConfig& c) {
  if (c.format != "csv" && c.format != "json") throw InvalidInput("format must be csv or json");
}

std::string sci(double x, int digits = 6) {
  std::ostringstream s;
  s << std::setprecision(digits) << std::scientific << x;
  return s.str();
}

int cmd_invisible_demo(const RunConfig& c, std::ostream& out) {
  if (c.points < 1) throw InvalidInput("--points must be >= 1");
  std::optional<SmoothField> field;
  if (c.fixture == "triangle") field = invisible_triangle_field();
  else if (c.fixture == "balls") field = invisible_ball_field(c.r, c.alpha, Vec3(0.0, 0.0, 1.0));
  else if (c.fixture == "bump") field = bump_gradient(c.a);
  else throw InvalidInput("unknown fixture '" + c.fixture + "' (expected triangle, balls or bump)");

  const QuadratureSpec spec = quadrature_spec(c);
  const Box& support = field->support();
  const double radius = 0.5 * support.diameter();
  std::mt19937_64 rng(c.seed);
  double max_abs = 0.0, scale = 0.0;
  json rows = json::array();
  for (int i = 0; i < c.points; ++i) {
    const Vec3 x = support.center() + radius * (1.2 + 0.8 * uniform(rng)) * random_direction(rng);
    const QuadraturePotential q = potential_quadrature(*field, x, spec);
    max_abs = std::max(max_abs, std::abs(q.value));
    scale = std::max(scale, q.scale);
    rows.push_back({{"x", {x[0], x[1], x[2]}}, {"potential", q.value}, {"scale", q.scale}});
  }
  const bool invisible = max_abs < 10.0 * c.rtol * scale;
  const fs::path dir = output_dir(c);
  write_text(dir / "invisible_demo.json",
             json{{"fixture", c.fixture}, {"field", field->name()}, {"max_abs_potential", max_abs},
                  {"scale", scale}, {"threshold", 10.0 * c.rtol * scale}, {"invisible", invisible},
                  {"samples", rows}}
                     .dump(2) + "\n");
  out << "fixture " << c.fixture << " (" << field->name() << "), " << c.points << " exterior points\n"
      << "  max |P(f)|   " << sci(max_abs) << "\n"
      << "  field scale  " << sci(scale) << "\n"
      << "  threshold    " << sci(10.0 * c.rtol * scale) << "  (10 * rtol * scale)\n"
      << "  " << (invisible ? "invisible" : "VISIBLE") << "\n";
  return invisible ? kOk : kNumerical;
}

int cmd_forward(const RunConfig& c, std::ostream& out) {
  if (c.field.empty()) throw InvalidInput("forward needs --field");
  const ParsedField parsed = load_field(c.field);
  const int k = c.k.value_or(10);
  if (k < 1) throw InvalidInput("k must be >= 1");
  const SurfaceGrid grid = surface_grid(k);
  const QuadratureSpec spec = quadrature_spec(c);

  Eigen::VectorXd values(static_cast<Eigen::Index>(grid.size()));
  std::string kind;
  std::visit(
      [&](const auto& f) {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, BoxSimpleField>) {
          kind = "box_simple (closed form)";
          for (std::size_t i = 0; i < grid.size(); ++i) values(static_cast<Eigen::Index>(i)) = potential(f, grid.points[i]);
        } else if constexpr (std::is_same_v<F, LatticeField>) {
          if (c.n && *c.n != f.lattice().n()) throw DimensionMismatch("--n differs from the lattice field's n");
          kind = "lattice (closed form)";
          for (std::size_t i = 0; i < grid.size(); ++i) values(static_cast<Eigen::Index>(i)) = potential(f, grid.points[i]);
        } else if (c.n) {
          kind = f.name() + " discretized at n = " + std::to_string(*c.n);
          const LatticeField lf = discretize(f, Lattice(*c.n));
          for (std::size_t i = 0; i < grid.size(); ++i) values(static_cast<Eigen::Index>(i)) = potential(lf, grid.points[i]);
        } else {
          kind = f.name() + " (quadrature)";
          for (std::size_t i = 0; i < grid.size(); ++i) {
            values(static_cast<Eigen::Index>(i)) = potential_quadrature(f, grid.points[i], spec).value;
          }
        }
      },
      parsed);

  const fs::path path = output_dir(c) / "forward_samples.csv";
  write_samples_csv(path, grid.points, values);
  out << "forward: " << kind << ", k = " << k << ", M = " << grid.size() << "\n"
      << "  max |P(f)| " << sci(values.size() ? values.cwiseAbs().maxCoeff() : 0.0) << "\n"
      << "  boundary L2 norm " << sci(boundary_l2_norm(values, grid)) << "\n"
      << "  wrote " << path.string() << "\n";
  return kOk;
}

LatticeField as_lattice_field(const ParsedField& parsed, const Lattice& lattice) {
  if (const auto* lf = std::get_if<LatticeField>(&parsed)) {
    if (!(lf->lattice() == lattice)) throw DimensionMismatch("reference field lattice differs from --n");
    return *lf;
  }
  if (const auto* bf = std::get_if<BoxSimpleField>(&parsed)) return LatticeField::from_box_simple(lattice, *bf);
  return discretize(std::get<SmoothField>(parsed), lattice);
}

int cmd_invert(const RunConfig& c, std::ostream& out) {
  if (c.samples.empty()) throw InvalidInput("invert needs --samples");
  if (!c.n) throw InvalidInput("invert needs --n");
  const Samples s = read_samples_csv(c.samples);
  const int k = c.k.value_or(10);
  const Lattice lattice(*c.n);
  const SurfaceGrid grid = surface_grid(k);
  if (s.points.size() != grid.size()) {
    throw DimensionMismatch("samples file has " + std::to_string(s.points.size()) +
                            " rows; the k = " + std::to_string(k) + " grid has " +
                            std::to_string(grid.size()) + " points");
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if ((s.points[i] - grid.points[i]).norm() > 1e-12) {
      throw DimensionMismatch("sample point " + std::to_string(i) + " is not the grid point of k = " +
                              std::to_string(k));
    }
  }
  const ForwardMatrix P = assemble(lattice, grid);
  const LatticeField v = invert(P, s.values, c.lambda);
  const Eigen::VectorXd residual = P.entries * v.coeffs() - s.values;
  const double snorm = s.values.norm();

  json report{{"field", magpot::to_json(v)},
              {"lambda", c.lambda},
              {"residual_l2", boundary_l2_norm(residual, grid)},
              {"relative_residual", snorm > 0.0 ? residual.norm() / snorm : residual.norm()}};
  out << "invert: n = " << *c.n << ", k = " << k << ", lambda = " << c.lambda << "\n"
      << "  residual (boundary L2) " << sci(boundary_l2_norm(residual, grid)) << "\n";
  if (!c.reference.empty()) {
    const LatticeField ref = as_lattice_field(load_field(c.reference), lattice);
    const double rn = ref.coeffs().norm();
    const double diff = (v.coeffs() - ref.coeffs()).norm();
    const double rel = rn > 0.0 ? diff / rn : diff;
    report["relative_error"] = rel;
    out << "  relative error vs reference " << sci(rel) << "\n";
  }
  const fs::path path = output_dir(c) / "inverted_field.json";
  write_text(path, report.dump(2) + "\n");
  out << "  wrote " << path.string() << "\n";
  return kOk;
}

void print_fit_line(std::ostream& out, const std::string& label, const FitResult& f) {
  out << "  " << std::left << std::setw(12) << label << std::right << std::fixed << std::setprecision(4)
      << " gamma " << std::setw(9) << f.gamma << "  beta " << std::setw(9) << f.beta << "  alpha "
      << std::setw(7) << f.alpha << "  rms " << std::setw(7) << f.residual_rms
      << (f.alpha_at_bound ? "  (alpha at search bound)" : "") << "\n";
  out.unsetf(std::ios::floatfield);
}

void print_reference(std::ostream& out) {
  out << "reference fits (published, M ~ 330000; not reproduced at desk scale):\n";
  for (const auto& r : kReferenceFits) {
    out << "  " << std::left << std::setw(12) << r.series << std::right << std::fixed << std::setprecision(4)
        << " gamma " << std::setw(9) << r.gamma << "  beta " << std::setw(9) << r.beta << "  alpha "
        << std::setw(7) << r.alpha << "\n";
    out.unsetf(std::ios::floatfield);
  }
}

int cmd_stability_sweep(const RunConfig& c, std::ostream& out, std::ostream& err) {
  check_format(c);
  SweepConfig config;
  config.n_list = c.n_list;
  config.k = c.k;
  config.policy = parse_precision(c.precision);
  config.record_timing = c.timing;
  for (double a : c.bump_a) config.fields.push_back({"a" + format_number(a), bump_gradient(a)});

  const SweepResult result = sweep(config);
  const fs::path dir = output_dir(c);
  const fs::path data = dir / (c.format == "csv" ? "stability_sweep.csv" : "stability_sweep.json");
  write_text(data, c.format == "csv" ? sweep_csv(result) : sweep_json(result).dump(2) + "\n");
  write_text(dir / "stability_plot.csv", plot_data_csv(result));

  out << "stability sweep (" << to_string(config.policy) << " precision)\n";
  out << "     n      delta     M       C_delta   C_delta_paper";
  for (const auto& l : result.field_labels) out << std::setw(14) << ("Cf_" + l);
  out << "     sigma_min  bits\n";
  bool any = false;
  for (const auto& r : result.records) {
    const auto& k = r.constant;
    out << std::setw(6) << r.n << std::setw(11) << std::setprecision(5) << r.delta << std::setw(6) << r.M;
    out << std::setw(14) << (k ? sci(k->C_delta, 4) : "-") << std::setw(16) << (k ? sci(k->C_delta_paper, 4) : "-");
    for (const auto& f : r.field_ratios) out << std::setw(14) << (f ? sci(f->consistent, 4) : "-");
    out << std::setw(14) << (k ? sci(k->sigma_min, 4) : "-") << std::setw(6) << (k ? std::to_string(k->precision_bits) : "-")
        << "\n";
    any = any || k || std::any_of(r.field_ratios.begin(), r.field_ratios.end(), [](const auto& f) { return f.has_value(); });
    for (const auto& e : r.errors) out << "        ! " << e << "\n";
  }
  out << "fits of log C = gamma + beta * delta^-alpha:\n";
  for (const auto& f : result.fits) {
    if (f.fit) print_fit_line(out, f.label, *f.fit);
    else out << "  " << std::left << std::setw(12) << f.label << std::right << " " << f.error << "\n";
  }
  print_reference(out);
  out << "wrote " << data.string() << ", " << (dir / "stability_plot.csv").string() << "\n";
  if (!any) err << "numerical failure: every sweep record failed\n";
  return any ? kOk : kNumerical;
}

int cmd_fit(const RunConfig& c, std::ostream& out) {
  check_format(c);
  if (c.input.empty()) throw InvalidInput("fit needs --input");
  std::ifstream in(c.input);
  if (!in) throw ParseError("cannot open " + c.input);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(c.input + " is empty");
  auto columns = [](const std::string& l) {
    std::vector<std::string> cells;
    std::stringstream ss(l);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      if (!cell.empty() && cell.back() == '\r') cell.pop_back();
      cells.push_back(cell);
    }
    if (!l.empty() && l.back() == ',') cells.emplace_back();
    return cells;
  };
  const auto header = columns(line);
  const auto find = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ParseError("column '" + name + "' not found in " + c.input);
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t di = find("delta"), vi = find(c.column);
  std::vector<FitPoint> pts;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto cells = columns(line);
    if (cells.size() <= std::max(di, vi)) throw ParseError("short row in " + c.input);
    if (cells[vi].empty()) continue;  // failed record
    try {
      pts.push_back({std::stod(cells[di]), std::stod(cells[vi])});
    } catch (const std::exception&) {
      throw ParseError("non-numeric cell in " + c.input);
    }
  }
  const FitResult fit = fit_exponential(pts);
  const fs::path dir = output_dir(c);
  if (c.format == "json") {
    json j = magpot::to_json(fit);
    j["series"] = c.column;
    write_text(dir / "fit.json", j.dump(2) + "\n");
  } else {
    write_text(dir / "fit.csv", "series,gamma,beta,alpha,residual_rms,n_points\n" + c.column + ',' +
                                    format_number(fit.gamma) + ',' + format_number(fit.beta) + ',' +
                                    format_number(fit.alpha) + ',' + format_number(fit.residual_rms) + ',' +
                                    std::to_string(fit.n_points) + '\n');
  }
  out << "fit of log " << c.column << " = gamma + beta * delta^-alpha over " << pts.size() << " points:\n";
  print_fit_line(out, c.column, fit);
  print_reference(out);
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Magnetic potentials of box-simple magnetizations: invisibility demos, forward "
               "evaluation, inversion and discretization-stability sweeps."};
  app.name(args.empty() ? "magpot" : args.front());
  app.require_subcommand(1);
  app.fallthrough();

  RunConfig flags;
  std::string config_path;
  std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> bound;
  auto bind = [&](CLI::Option* opt, auto member) {
    bound.emplace_back(opt, [&flags, member](RunConfig& dst) { dst.*member = flags.*member; });
    return opt;
  };

  bind(app.add_option("--out", flags.out, "Output directory"), &RunConfig::out);
  bind(app.add_option("--format", flags.format, "Machine-readable format")->check(CLI::IsMember({"csv", "json"})),
       &RunConfig::format);
  bind(app.add_option("--seed", flags.seed, "Random seed"), &RunConfig::seed);
  bind(app.add_option("--rtol", flags.rtol, "Quadrature relative tolerance"), &RunConfig::rtol);
  bind(app.add_option("--precision", flags.precision, "sigma_min precision policy")
           ->check(CLI::IsMember({"auto", "double", "extended"})),
       &RunConfig::precision);
  app.add_option("--config", config_path, "JSON run config; flags override it");

  auto* demo = app.add_subcommand("invisible-demo", "Potential of an invisible fixture at exterior points");
  bind(demo->add_option("fixture", flags.fixture, "triangle | balls | bump")
           ->check(CLI::IsMember({"triangle", "balls", "bump"})),
       &RunConfig::fixture);
  bind(demo->add_option("--points", flags.points, "Number of exterior points"), &RunConfig::points);
  bind(demo->add_option("--r", flags.r, "Outer ball radius"), &RunConfig::r);
  bind(demo->add_option("--alpha", flags.alpha, "Inner ball radius ratio"), &RunConfig::alpha);
  bind(demo->add_option("--a", flags.a, "Bump half-width"), &RunConfig::a);

  auto* fwd = app.add_subcommand("forward", "Potential samples of a field on the surface grid");
  bind(fwd->add_option("--field", flags.field, "Field JSON (inline or path)"), &RunConfig::field);

  auto* inv = app.add_subcommand("invert", "Lattice field from surface samples");
  bind(inv->add_option("--samples", flags.samples, "Samples CSV (x,y,z,potential)"), &RunConfig::samples);
  bind(inv->add_option("--lambda", flags.lambda, "Tikhonov parameter (0: least squares)"), &RunConfig::lambda);
  bind(inv->add_option("--reference", flags.reference, "Field JSON to compare against"), &RunConfig::reference);

  std::optional<int> n_flag, k_flag;
  for (auto* sub : {fwd, inv}) {
    bound.emplace_back(sub->add_option("--n", n_flag, "Lattice size (cells per edge)"),
                       [&n_flag](RunConfig& dst) { dst.n = n_flag; });
  }
  auto* sw = app.add_subcommand("stability-sweep", "C(delta) and C_f(delta) over lattice sizes");
  bind(sw->add_option("--n-list", flags.n_list, "Ascending lattice sizes")->delimiter(','), &RunConfig::n_list);
  bind(sw->add_option("--bump-a", flags.bump_a, "Bump parameters of the C_f series")->delimiter(','),
       &RunConfig::bump_a);
  auto* no_fields = sw->add_flag("--no-fields", "Only the C_delta series");
  bind(sw->add_flag("--timing", flags.timing, "Fill the wall_ms column (breaks byte reproducibility)"),
       &RunConfig::timing);
  for (auto* sub : {fwd, inv, sw}) {
    bound.emplace_back(sub->add_option("--k", k_flag, "Grid points per face edge"),
                       [&k_flag](RunConfig& dst) { dst.k = k_flag; });
  }

  auto* fit = app.add_subcommand("fit", "Fit exp(gamma + beta delta^-alpha) to a CSV column");
  bind(fit->add_option("--input", flags.input, "CSV with a delta column"), &RunConfig::input);
  bind(fit->add_option("--column", flags.column, "Column to fit"), &RunConfig::column);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    RunConfig config;
    if (!config_path.empty()) apply_json(config, read_json(config_path));
    for (auto& [opt, copy] : bound) {
      if (opt->count() > 0) copy(config);
    }
    if (no_fields->count() > 0) config.bump_a.clear();
    const std::string command = app.get_subcommands().front()->get_name();
    if (!config.command.empty() && config.command != command) {
      throw InvalidInput("config is for '" + config.command + "', not '" + command + "'");
    }
    config.command = command;
    write_text(output_dir(config) / "run_config.json", to_json(config).dump(2) + "\n");

    if (command == "invisible-demo") return cmd_invisible_demo(config, out);
    if (command == "forward") return cmd_forward(config, out);
    if (command == "invert") return cmd_invert(config, out);
    if (command == "stability-sweep") return cmd_stability_sweep(config, out, err);
    return cmd_fit(config, out);
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kNumerical;
  }
}

}  // namespace magpot::cli
