#include "magpot/io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "magpot/errors.hpp"

namespace magpot {

using nlohmann::json;

namespace {

Vec3 vec3_at(const json& j, const char* key) {
  if (!j.contains(key)) throw ParseError(std::string("missing key '") + key + "'");
  const json& a = j.at(key);
  if (!a.is_array() || a.size() != 3) throw ParseError(std::string("'") + key + "' must be an array of 3 numbers");
  Vec3 out;
  for (int i = 0; i < 3; ++i) {
    if (!a[i].is_number()) throw ParseError(std::string("'") + key + "' must hold numbers");
    out[i] = a[i].get<double>();
  }
  return out;
}

double number_at(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw ParseError(std::string("missing numeric key '") + key + "'");
  }
  return j.at(key).get<double>();
}

json vec_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

double parse_number(std::string_view s, std::size_t line) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError("line " + std::to_string(line) + ": '" + std::string(s) + "' is not a number");
  }
  return x;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string cell(const std::optional<double>& x) { return x ? format_number(*x) : std::string(); }

}  // namespace

ParsedField parse_field(const json& j) {
  if (!j.is_object()) throw ParseError("field description must be a JSON object");
  if (!j.contains("type") || !j.at("type").is_string()) throw ParseError("field description needs a string 'type'");
  const std::string type = j.at("type").get<std::string>();
  try {
    if (type == "box_simple") {
      BoxSimpleField f;
      if (!j.contains("parts") || !j.at("parts").is_array()) throw ParseError("'parts' must be an array");
      for (const json& p : j.at("parts")) f.add(Box(vec3_at(p, "lo"), vec3_at(p, "hi")), vec3_at(p, "v"));
      return f;
    }
    if (type == "lattice") {
      const double n = number_at(j, "n");
      if (n != std::floor(n) || n < 1 || n > 1000) throw ParseError("'n' must be a positive integer");
      const Lattice lattice(static_cast<int>(n));
      if (!j.contains("coeffs") || !j.at("coeffs").is_array()) throw ParseError("'coeffs' must be an array");
      const json& c = j.at("coeffs");
      Eigen::VectorXd v(static_cast<Eigen::Index>(c.size()));
      for (std::size_t i = 0; i < c.size(); ++i) {
        if (!c[i].is_number()) throw ParseError("'coeffs' must hold numbers");
        v(static_cast<Eigen::Index>(i)) = c[i].get<double>();
      }
      return LatticeField(lattice, std::move(v));
    }
    if (type == "bump") return bump_gradient(number_at(j, "a"));
    if (type == "nested_balls") {
      const Vec3 center = j.contains("center") ? vec3_at(j, "center") : Vec3::Zero();
      return invisible_ball_field(number_at(j, "r"), number_at(j, "alpha"), vec3_at(j, "v"), center);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad field description: ") + e.what());
  }
  throw ParseError("unknown field type '" + type + "'");
}

ParsedField load_field(std::string_view text_or_path) {
  std::string_view t = text_or_path;
  while (!t.empty() && std::isspace(static_cast<unsigned char>(t.front()))) t.remove_prefix(1);
  if (!t.empty() && t.front() == '{') {
    json j;
    try {
      j = json::parse(t);
    } catch (const json::exception& e) {
      throw ParseError(std::string("bad field JSON: ") + e.what());
    }
    return parse_field(j);
  }
  return parse_field(read_json(std::filesystem::path(std::string(text_or_path))));
}

json to_json(const BoxSimpleField& f) {
  json parts = json::array();
  for (const auto& p : f.parts()) {
    parts.push_back({{"lo", vec_json(p.box.lo())}, {"hi", vec_json(p.box.hi())}, {"v", vec_json(p.v)}});
  }
  return {{"type", "box_simple"}, {"parts", parts}};
}

json to_json(const LatticeField& f) {
  json coeffs = json::array();
  for (Eigen::Index i = 0; i < f.coeffs().size(); ++i) coeffs.push_back(f.coeffs()(i));
  return {{"type", "lattice"}, {"n", f.lattice().n()}, {"coeffs", coeffs}};
}

std::string format_number(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw Error("number formatting failed");
  return std::string(buf, ptr);
}

void write_samples_csv(const std::filesystem::path& path, const std::vector<Vec3>& points,
                       const Eigen::VectorXd& values) {
  if (static_cast<Eigen::Index>(points.size()) != values.size()) {
    throw DimensionMismatch("point and value counts differ");
  }
  std::string out = "x,y,z,potential\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vec3& p = points[i];
    out += format_number(p[0]) + ',' + format_number(p[1]) + ',' + format_number(p[2]) + ',' +
           format_number(values(static_cast<Eigen::Index>(i))) + '\n';
  }
  write_text(path, out);
}

Samples read_samples_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  Samples s;
  std::vector<double> values;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    if (lineno == 1 && line.rfind("x,", 0) == 0) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 4) throw ParseError("line " + std::to_string(lineno) + ": expected 4 columns");
    s.points.emplace_back(parse_number(fields[0], lineno), parse_number(fields[1], lineno),
                          parse_number(fields[2], lineno));
    values.push_back(parse_number(fields[3], lineno));
  }
  s.values = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  return s;
}

std::string sweep_csv(const SweepResult& result) {
  std::string out = "delta,N,M,C_delta,C_delta_paper";
  for (const auto& label : result.field_labels) out += ",Cf_" + label;
  out += ",sigma_min,precision_bits,wall_ms\n";
  for (const auto& r : result.records) {
    const auto& c = r.constant;
    out += format_number(r.delta) + ',' + std::to_string(r.N) + ',' + std::to_string(r.M) + ',';
    out += cell(c ? std::optional(c->C_delta) : std::nullopt) + ',';
    out += cell(c ? std::optional(c->C_delta_paper) : std::nullopt);
    for (const auto& f : r.field_ratios) out += ',' + cell(f ? std::optional(f->consistent) : std::nullopt);
    out += ',' + cell(c ? std::optional(c->sigma_min) : std::nullopt);
    out += ',' + (c ? std::to_string(c->precision_bits) : std::string());
    out += ',' + cell(r.wall_ms) + '\n';
  }
  return out;
}

json to_json(const FitResult& fit) {
  return {{"gamma", fit.gamma},           {"beta", fit.beta},         {"alpha", fit.alpha},
          {"residual_rms", fit.residual_rms}, {"n_points", fit.n_points}, {"alpha_at_bound", fit.alpha_at_bound}};
}

json sweep_json(const SweepResult& result) {
  json records = json::array();
  for (const auto& r : result.records) {
    json rec{{"n", r.n}, {"delta", r.delta}, {"N", r.N}, {"M", r.M}, {"k", r.k}};
    if (r.constant) {
      const auto& c = *r.constant;
      rec["C_delta"] = c.C_delta;
      rec["C_delta_paper"] = c.C_delta_paper;
      rec["sigma_min"] = c.sigma_min;
      rec["sigma_min_check"] = c.sigma_min_check;
      rec["kappa"] = c.kappa;
      rec["precision_bits"] = c.precision_bits;
    }
    json cf = json::object();
    for (std::size_t i = 0; i < r.field_ratios.size(); ++i) {
      const auto& f = r.field_ratios[i];
      cf[result.field_labels[i]] =
          f ? json{{"consistent", f->consistent}, {"paper_literal", f->paper_literal}} : json(nullptr);
    }
    rec["Cf"] = cf;
    rec["wall_ms"] = r.wall_ms ? json(*r.wall_ms) : json(nullptr);
    rec["errors"] = r.errors;
    records.push_back(rec);
  }
  json fits = json::array();
  for (const auto& f : result.fits) {
    json entry{{"series", f.label}};
    if (f.fit) entry["fit"] = to_json(*f.fit);
    else entry["error"] = f.error;
    fits.push_back(entry);
  }
  json reference = json::array();
  for (const auto& r : kReferenceFits) {
    reference.push_back({{"series", r.series}, {"gamma", r.gamma}, {"beta", r.beta}, {"alpha", r.alpha}});
  }
  return {{"records", records}, {"fits", fits}, {"reference_fits", reference}};
}

std::string plot_data_csv(const SweepResult& result) {
  std::string out = "series,delta,delta_pow_neg_alpha,log_value,log_fit\n";
  for (std::size_t s = 0; s < result.fits.size(); ++s) {
    const auto& f = result.fits[s];
    if (!f.fit) continue;
    for (const auto& p : series_points(result, s)) {
      const double t = std::pow(p.delta, -f.fit->alpha);
      out += f.label + ',' + format_number(p.delta) + ',' + format_number(t) + ',' +
             format_number(std::log(p.value)) + ',' + format_number(f.fit->gamma + f.fit->beta * t) + '\n';
    }
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error("write to " + path.string() + " failed");
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace magpot
