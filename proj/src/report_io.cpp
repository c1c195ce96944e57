#include "kencl/report_io.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "kencl/verification_report.hpp"

namespace kencl::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

FieldSpec number(json def, std::optional<double> min = std::nullopt, bool min_excl = false,
                 std::optional<double> max = std::nullopt, bool max_excl = false, std::string help = {}) {
  FieldSpec f;
  f.type = FieldType::number;
  f.default_value = std::move(def);
  f.optional = f.default_value.is_null();
  f.min = min;
  f.min_exclusive = min_excl;
  f.max = max;
  f.max_exclusive = max_excl;
  f.help = std::move(help);
  return f;
}

FieldSpec required_number(std::optional<double> min, bool min_excl, std::optional<double> max, bool max_excl,
                          std::string help) {
  FieldSpec f = number(nullptr, min, min_excl, max, max_excl, std::move(help));
  f.optional = false;
  return f;
}

FieldSpec integer(long long def, long long min, std::string help) {
  FieldSpec f;
  f.type = FieldType::integer;
  f.default_value = def;
  f.min = static_cast<double>(min);
  f.help = std::move(help);
  return f;
}

FieldSpec choice(std::string def, std::vector<std::string> choices, std::string help) {
  FieldSpec f;
  f.type = FieldType::string;
  f.default_value = std::move(def);
  f.choices = std::move(choices);
  f.help = std::move(help);
  return f;
}

FieldSpec output(json def, std::string help) {
  FieldSpec f;
  f.type = FieldType::string;
  f.default_value = std::move(def);
  f.optional = f.default_value.is_null();
  f.output_path = true;
  f.help = std::move(help);
  return f;
}

FieldSpec input(std::string help) {
  FieldSpec f;
  f.type = FieldType::string;
  f.optional = true;
  f.input_path = true;
  f.help = std::move(help);
  return f;
}

FieldSpec flag(std::string help) {
  FieldSpec f;
  f.type = FieldType::boolean;
  f.default_value = false;
  f.help = std::move(help);
  return f;
}

const std::map<std::string, Schema>& schemas() {
  static const std::map<std::string, Schema> all = [] {
    std::map<std::string, Schema> s;
    s["region"] = {
        {"kind", choice("bone", {"disks", "hull", "bone"}, "region type")},
        {"a", required_number(0.0, false, std::nullopt, false, "relative bound constant a >= 0")},
        {"b", required_number(0.0, false, 1.0, true, "relative bound constant 0 <= b < 1")},
        {"gamma", number(nullptr, 0.0, false, std::nullopt, false, "centers in [-gamma, gamma]; absent: whole line")},
        {"radius-scale", number(1.0, 0.0, true, std::nullopt, false, "factor s in r(t)^2 = s (a + b t^2)")},
        {"resolution", integer(400, 16, "number of boundary samples")},
        {"lo", number(nullptr, std::nullopt, false, std::nullopt, false, "left end of the abscissa window")},
        {"hi", number(nullptr, std::nullopt, false, std::nullopt, false, "right end of the abscissa window")},
        {"prior-overlay", flag("also write the coarser prior hull")},
        {"out", output("region.csv", "boundary polyline CSV")},
        {"overlay-out", output("region_prior.csv", "prior hull polyline CSV")},
        {"region-json", output(nullptr, "region description JSON")},
    };
    s["matrix-lab"] = {
        {"trials", integer(500, 1, "number of random instances")},
        {"min-dim", integer(2, 2, "smallest total dimension")},
        {"max-dim", integer(20, 2, "largest total dimension")},
        {"seed", integer(42, 0, "base seed")},
        {"samples", integer(1000, 1, "resolvent samples per instance")},
        {"report", output("matrix_lab.json", "JSON report")},
        {"jobs", integer(1, 1, "worker threads")},
    };
    s["perturb"] = {
        {"problem", input("problem JSON {signature, A0, V}; absent: random suite")},
        {"trials", integer(200, 1, "number of random problems")},
        {"min-dim", integer(2, 2, "smallest dimension")},
        {"max-dim", integer(20, 2, "largest dimension")},
        {"seed", integer(42, 0, "base seed")},
        {"b-step", number(0.01, 0.0, true, 1.0, true, "step of the b grid")},
        {"report", output("perturb.json", "JSON report")},
        {"jobs", integer(1, 1, "worker threads")},
    };
    FieldSpec tau;
    tau.type = FieldType::number_or_auto;
    tau.default_value = "auto";
    tau.min = 1.0;
    tau.help = "tau: 'auto' (tau0) or a value >= 1";
    s["perturb"]["tau"] = tau;
    s["sl"] = {
        {"kind", choice("step", {"step", "gaussian", "lorentzian", "tabulated"}, "potential shape")},
        {"depth", number(nullptr, 0.0, false, std::nullopt, false, "depth c >= 0 of q = -c shape((x - center)/width)")},
        {"width", number(1.0, 0.0, true, std::nullopt, false, "width of the potential")},
        {"center", number(0.0, std::nullopt, false, std::nullopt, false, "center of the potential")},
        {"file", input("two-column CSV x,q for kind=tabulated")},
        {"p", number(2.0, 2.0, false, std::nullopt, false, "Lebesgue exponent p >= 2")},
        {"L", number(30.0, 0.0, true, std::nullopt, false, "half-length of the interval [-L, L]")},
        {"n", integer(4000, 16, "number of interior grid points (even)")},
        {"nonreal-tol", number(1e-8, 0.0, true, std::nullopt, false, "relative threshold for non-real eigenvalues")},
        {"slack-c", number(1.0, 0.0, false, std::nullopt, false, "slack coefficient of h^2 ||q||_inf")},
        {"slack-kappa", number(1.0, 0.0, false, std::nullopt, false, "slack decay rate in L")},
        {"slack-floor", number(1e-6, 0.0, true, std::nullopt, false, "minimal slack")},
        {"skip-sign-test", flag("skip the sign-type test of real eigenvalues")},
        {"out", output("sl_eigenvalues.csv", "eigenvalue CSV")},
        {"constants-out", output("sl_constants.csv", "constants CSV")},
        {"report", output("sl_report.json", "JSON report")},
    };
    s["tau0"] = {
        {"profile", choice("extremizer", {"indicator", "extremizer", "power"}, "probe family")},
        {"X", number(1e6, 1.0, true, std::nullopt, false, "upper end of the extremizer support [1, X]")},
        {"lo", number(1.0, 0.0, true, std::nullopt, false, "support start for indicator/power")},
        {"hi", number(2.0, 0.0, true, std::nullopt, false, "support end for indicator/power")},
        {"exponent", number(-0.5, std::nullopt, false, std::nullopt, false, "exponent of the power profile")},
        {"partner", choice("zero", {"zero", "negated", "same"}, "second component of the power profile")},
        {"rel-tol", number(1e-7, 0.0, true, std::nullopt, false, "quadrature refinement tolerance")},
        {"out", output("tau0.json", "JSON result")},
    };
    s["constants"] = {
        {"p-min", number(2.0, 2.0, false, std::nullopt, false, "smallest p")},
        {"p-max", number(100.0, 2.0, false, std::nullopt, false, "largest p")},
        {"count", integer(200, 1, "number of p values")},
        {"spacing", choice("log", {"log", "linear"}, "spacing of the p values")},
        {"out", output("constants.csv", "constants CSV")},
    };
    return s;
  }();
  return all;
}

std::string describe_range(const FieldSpec& f) {
  std::ostringstream os;
  if (f.min) os << (f.min_exclusive ? "> " : ">= ") << *f.min;
  if (f.min && f.max) os << " and ";
  if (f.max) os << (f.max_exclusive ? "< " : "<= ") << *f.max;
  return os.str();
}

void check_field(const std::string& key, const FieldSpec& f, json& v, std::vector<std::string>& problems) {
  auto bad = [&](const std::string& what) { problems.push_back("'" + key + "': " + what); };
  auto range = [&](double x) {
    bool ok = std::isfinite(x);
    if (f.min) ok = ok && (f.min_exclusive ? x > *f.min : x >= *f.min);
    if (f.max) ok = ok && (f.max_exclusive ? x < *f.max : x <= *f.max);
    if (!ok) bad("value " + format_number(x) + " out of range (must be " + describe_range(f) + ")");
  };
  switch (f.type) {
    case FieldType::number:
      if (!v.is_number()) return bad("expected a number");
      range(v.get<double>());
      v = v.get<double>();
      return;
    case FieldType::integer:
      if (v.is_number_float()) {
        double d = v.get<double>();
        if (std::trunc(d) != d || std::abs(d) > 9.007199254740992e15) return bad("expected an integer");
        if (d >= 0) v = static_cast<std::uint64_t>(d);
        else v = static_cast<long long>(d);
      }
      if (!v.is_number_integer()) return bad("expected an integer");
      if (v.is_number_unsigned()) {
        if (f.min && *f.min > 0 && v.get<std::uint64_t>() < static_cast<std::uint64_t>(*f.min))
          bad("value " + std::to_string(v.get<std::uint64_t>()) + " out of range (must be " + describe_range(f) + ")");
      } else {
        long long x = v.get<long long>();
        if (f.min && static_cast<double>(x) < *f.min)
          bad("value " + std::to_string(x) + " out of range (must be " + describe_range(f) + ")");
        else if (x >= 0) v = static_cast<std::uint64_t>(x);
      }
      return;
    case FieldType::string:
      if (!v.is_string()) return bad("expected a string");
      if (!f.choices.empty() && std::find(f.choices.begin(), f.choices.end(), v.get<std::string>()) == f.choices.end()) {
        std::string list;
        for (const auto& c : f.choices) list += (list.empty() ? "" : "|") + c;
        bad("'" + v.get<std::string>() + "' is not one of " + list);
      }
      if ((f.output_path || f.input_path) && v.get<std::string>().empty()) bad("empty path");
      return;
    case FieldType::boolean:
      if (!v.is_boolean()) bad("expected true or false");
      return;
    case FieldType::number_or_auto:
      if (v.is_string() && v.get<std::string>() == "auto") return;
      if (!v.is_number()) return bad("expected a number or 'auto'");
      range(v.get<double>());
      v = v.get<double>();
      return;
  }
}

// Constraints spanning several fields.
void check_cross(const std::string& command, const json& p, std::vector<std::string>& problems) {
  auto has = [&](const char* k) { return p.contains(k) && !p[k].is_null(); };
  if (command == "sl") {
    std::string kind = p.value("kind", "step");
    if (kind == "tabulated" && !has("file")) problems.push_back("'file': required for kind=tabulated");
    if (kind != "tabulated" && !has("depth")) problems.push_back("'depth': required for kind=" + kind);
    if (p["n"].is_number_integer() && p["n"].get<long long>() % 2 != 0) problems.push_back("'n': must be even");
  }
  if (command == "matrix-lab" || command == "perturb") {
    if (p["min-dim"].is_number_integer() && p["max-dim"].is_number_integer() &&
        p["min-dim"].get<long long>() > p["max-dim"].get<long long>())
      problems.push_back("'min-dim': exceeds max-dim");
    if (p["jobs"].is_number_integer() && p["jobs"].get<long long>() > 256) problems.push_back("'jobs': at most 256");
  }
  if (command == "matrix-lab" && p["max-dim"].is_number_integer() && p["max-dim"].get<long long>() > 400)
    problems.push_back("'max-dim': at most 400");
  if (command == "region" && has("lo") && has("hi") && p["lo"].is_number() && p["hi"].is_number() &&
      !(p["lo"].get<double>() < p["hi"].get<double>()))
    problems.push_back("'lo': must be below hi");
  if (command == "region" && has("lo") != has("hi")) problems.push_back("'lo'/'hi': give both or neither");
  if (command == "tau0" && p["lo"].is_number() && p["hi"].is_number() &&
      !(p["lo"].get<double>() < p["hi"].get<double>()))
    problems.push_back("'lo': must be below hi");
  if (command == "constants" && p["p-min"].is_number() && p["p-max"].is_number() &&
      p["p-min"].get<double>() > p["p-max"].get<double>())
    problems.push_back("'p-min': exceeds p-max");
}

std::string to_hex(const unsigned char* data, unsigned len) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(digits[data[i] >> 4]);
    out.push_back(digits[data[i] & 15]);
  }
  return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::invalid_argument([&] {
        std::string msg = "invalid configuration:";
        for (const auto& p : problems) msg += "\n  " + p;
        return msg;
      }()),
      problems_(std::move(problems)) {}

const Schema& schema_for(const std::string& command) {
  auto it = schemas().find(command);
  if (it == schemas().end()) throw ConfigError({"unknown command '" + command + "'"});
  return it->second;
}

std::vector<std::string> known_commands() {
  std::vector<std::string> out;
  for (const auto& [k, v] : schemas()) out.push_back(k);
  return out;
}

json RunConfig::to_json() const { return {{"command", command}, {"params", params}}; }

RunConfig validate_config(const json& raw) {
  if (!raw.is_object()) throw ConfigError({"configuration must be a JSON object"});
  if (!raw.contains("command") || !raw["command"].is_string()) throw ConfigError({"'command': missing or not a string"});
  RunConfig cfg;
  cfg.command = raw["command"].get<std::string>();
  const Schema& schema = schema_for(cfg.command);
  std::vector<std::string> problems;
  json given = json::object();
  if (raw.contains("params")) {
    if (!raw["params"].is_object()) throw ConfigError({"'params': expected an object"});
    given = raw["params"];
    for (const auto& [k, v] : raw.items())
      if (k != "command" && k != "params") problems.push_back("'" + k + "': unknown top-level key");
  } else {
    for (const auto& [k, v] : raw.items())
      if (k != "command") given[k] = v;
  }
  for (const auto& [k, v] : given.items())
    if (!schema.count(k)) problems.push_back("'" + k + "': unknown key for command " + cfg.command);
  for (const auto& [key, spec] : schema) {
    if (given.contains(key) && !given[key].is_null()) {
      json v = given[key];
      check_field(key, spec, v, problems);
      cfg.params[key] = v;
    } else if (!spec.default_value.is_null()) {
      cfg.params[key] = spec.default_value;
    } else if (!spec.optional) {
      problems.push_back("'" + key + "': required");
    }
  }
  check_cross(cfg.command, cfg.params, problems);
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return cfg;
}

RunConfig load_config(const fs::path& path) {
  std::string text = read_file(path);
  json raw;
  try {
    raw = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t byte = std::min<std::size_t>(e.byte, text.size());
    std::size_t line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
    throw ConfigError({path.string() + ":" + std::to_string(line) + ": parse error: " + e.what()});
  }
  return validate_config(raw);
}

void save_config(const RunConfig& config, const fs::path& path) { write_json(path, config.to_json()); }

std::string format_number(double v) {
  if (!std::isfinite(v)) throw std::domain_error("non-finite number in output");
  if (v == 0.0) v = 0.0;  // no negative zero
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string canonical_json(const json& j) {
  require_finite_json(j);
  return j.dump(2) + "\n";
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 computation failed");
  return to_hex(md, len);
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_file(path)); }

void write_file(const fs::path& path, const std::string& bytes) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  if (ec) throw std::runtime_error("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_json(const fs::path& path, const json& j) { write_file(path, canonical_json(j)); }

json read_json(const fs::path& path) {
  std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

CsvTable& CsvTable::row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) throw std::invalid_argument("CSV row width does not match the header");
  rows_.push_back(std::move(cells));
  return *this;
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out.push_back(',');
      out += cells[i];
    }
    out.push_back('\n');
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

std::string cell(double v) { return format_number(v); }
std::string cell(bool v) { return v ? "1" : "0"; }
std::string cell(long long v) { return std::to_string(v); }

std::string polyline_csv(const std::vector<ComplexPoint>& points) {
  CsvTable t({"re", "im"});
  for (auto z : points) t.row({cell(z.real()), cell(z.imag())});
  return t.str();
}

std::string sl_eigen_csv(const sl::SLContainmentReport& report) {
  CsvTable t({"re", "im", "in_paper_box", "in_bst", "margin_paper", "margin_bst"});
  for (const auto& r : report.rows)
    t.row({cell(r.value.real()), cell(r.value.imag()), cell(r.in_box), cell(r.in_bst), cell(r.margin_box),
           cell(r.margin_bst)});
  return t.str();
}

std::string constants_csv(const std::vector<double>& p_values) {
  CsvTable t({"p", "s_p", "f_sp", "C_p", "im_coef", "re_coef", "bst_im", "bst_abs"});
  for (double p : p_values) {
    auto c = sl::sl_constants(p);
    auto b = sl::bst_constants(p);
    t.row({cell(p), cell(c.s_p), cell(c.f_sp), cell(c.c_p), cell(c.im_coef), cell(c.re_coef), cell(b.im_coef),
           cell(b.abs_coef)});
  }
  return t.str();
}

json region_json(const geometry::DiskFamilyRegion& region, const std::string& kind, std::optional<double> gamma) {
  json centers = json::object();
  json intervals = json::array();
  for (const auto& iv : region.centers().intervals()) {
    // unbounded ends are written as null
    intervals.push_back({std::isfinite(iv.lo) ? json(iv.lo) : json(nullptr),
                         std::isfinite(iv.hi) ? json(iv.hi) : json(nullptr)});
  }
  centers["intervals"] = intervals;
  centers["points"] = region.centers().points();
  return {{"kind", kind},
          {"a", region.bound().a()},
          {"b", region.bound().b()},
          {"radiusScale", region.radius_scale()},
          {"centers", centers},
          {"gamma", gamma ? json(*gamma) : json(nullptr)}};
}

json matrix_to_json(const Matrix& m) {
  json data = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back({m(i, j).real(), m(i, j).imag()});
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Matrix matrix_from_json(const json& j) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("data"))
    throw std::invalid_argument("matrix JSON needs rows, cols and data");
  const auto rows = j["rows"].get<Eigen::Index>(), cols = j["cols"].get<Eigen::Index>();
  const auto& data = j["data"];
  if (rows < 0 || cols < 0 || !data.is_array() || data.size() != static_cast<std::size_t>(rows * cols))
    throw std::invalid_argument("matrix JSON data length does not match rows * cols");
  Matrix m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index c = 0; c < cols; ++c, ++k) {
      const auto& e = data[k];
      if (e.is_number()) {
        m(i, c) = e.get<double>();
      } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
        m(i, c) = {e[0].get<double>(), e[1].get<double>()};
      } else {
        throw std::invalid_argument("matrix entry " + std::to_string(k) + " must be [re, im]");
      }
    }
  return m;
}

json problem_to_json(const lab::KreinPerturbationProblem& problem) {
  return {{"signature", problem.signature()}, {"A0", matrix_to_json(problem.a0())}, {"V", matrix_to_json(problem.v())}};
}

lab::KreinPerturbationProblem problem_from_json(const json& j) {
  if (!j.is_object() || !j.contains("signature") || !j.contains("A0") || !j.contains("V"))
    throw std::invalid_argument("problem JSON needs signature, A0 and V");
  return {j["signature"].get<std::vector<int>>(), matrix_from_json(j["A0"]), matrix_from_json(j["V"])};
}

json RunRecord::to_json() const {
  auto entries = [](const std::vector<ManifestEntry>& v) {
    json a = json::array();
    for (const auto& e : v) a.push_back({{"path", e.path}, {"sha256", e.sha256}});
    return a;
  };
  return {{"config", config.to_json()}, {"version", version}, {"started", started},
          {"finished", finished},       {"inputs", entries(inputs)}, {"outputs", entries(outputs)}};
}

RunRecord RunRecord::from_json(const json& j) {
  RunRecord r;
  try {
    r.config = validate_config(j.at("config"));
    r.version = j.at("version").get<std::string>();
    r.started = j.value("started", "");
    r.finished = j.value("finished", "");
    for (const auto* key : {"inputs", "outputs"}) {
      auto& dst = std::string(key) == "inputs" ? r.inputs : r.outputs;
      for (const auto& e : j.at(key)) dst.push_back({e.at("path").get<std::string>(), e.at("sha256").get<std::string>()});
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed run record: ") + e.what());
  }
  return r;
}

std::string utc_now() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

fs::path write_report(RunRecord& record, const fs::path& run_dir, const std::string& relative_path, const json& report) {
  fs::path path = run_dir / relative_path;
  write_json(path, report);
  record_output(record, run_dir, relative_path);
  return path;
}

void record_output(RunRecord& record, const fs::path& run_dir, const std::string& relative_path) {
  std::string digest = sha256_file(run_dir / relative_path);
  for (auto& e : record.outputs)
    if (e.path == relative_path) {
      e.sha256 = digest;
      return;
    }
  record.outputs.push_back({relative_path, digest});
}

void write_run_record(const RunRecord& record, const fs::path& run_dir) {
  write_json(run_dir / "run_record.json", record.to_json());
}

RunRecord read_run_record(const fs::path& path) { return RunRecord::from_json(read_json(path)); }

void verify_manifest(const RunRecord& record, const fs::path& run_dir) {
  for (const auto& e : record.outputs) {
    fs::path p = run_dir / e.path;
    if (!fs::exists(p)) throw IntegrityError("manifest entry missing on disk: " + p.string());
    std::string actual = sha256_file(p);
    if (actual != e.sha256)
      throw IntegrityError("digest mismatch for " + p.string() + ": recorded " + e.sha256 + ", found " + actual);
  }
}

}  // namespace kencl::io
