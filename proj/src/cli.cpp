#include "kencl/cli.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <iostream>
#include <mutex>
#include <numbers>
#include <thread>

#include <CLI11.hpp>

#include "kencl/instance_generator.hpp"
#include "kencl/operator_lab.hpp"
#include "kencl/quadrature.hpp"
#include "kencl/random.hpp"
#include "kencl/sturm_liouville.hpp"
#include "kencl/verification_report.hpp"

namespace kencl::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kTauBound = 3.0 + 2.0 * std::numbers::sqrt2;

// Runs task(i) for i in [0, count) on up to `jobs` threads; results keep index order.
template <class Result, class Task>
std::vector<Result> run_indexed(int count, int jobs, Task task) {
  std::vector<Result> results(static_cast<std::size_t>(count));
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        results[static_cast<std::size_t>(i)] = task(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = count;
      }
    }
  };
  const int threads = std::max(1, std::min(jobs, count));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  return results;
}

struct Outputs {
  const fs::path& run_dir;
  io::RunRecord& record;

  void text(const std::string& rel, const std::string& bytes) {
    io::write_file(run_dir / rel, bytes);
    io::record_output(record, run_dir, rel);
  }
  void json_file(const std::string& rel, const json& j) { io::write_report(record, run_dir, rel, j); }
};

void record_input(io::RunRecord& record, const std::string& path) {
  record.inputs.push_back({path, io::sha256_file(path)});
}

json summary_of(const VerificationReport& r) {
  json s{{"verified", r.verified()},
         {"rejected", r.rejected},
         {"nonrealCount", r.nonreal_count},
         {"failures",
          {{"containment", r.containment_failures.size()},
           {"resolvent", r.resolvent_failures.size()},
           {"signType", r.sign_failures.size()}}}};
  if (r.containment.worst) s["worstMargin"] = *r.containment.worst;
  if (r.rejected) s["rejectionReason"] = r.rejection_reason;
  return s;
}

void print_failures(std::ostream& err, const std::string& label, const VerificationReport& r) {
  for (const auto* list : {&r.containment_failures, &r.resolvent_failures, &r.sign_failures})
    for (const auto& f : *list) err << label << ": " << f.check << ": " << f.detail << "\n";
}

geometry::Interval default_window(const io::RunConfig& c, double a, double b) {
  if (c.has("lo")) return {c.number("lo"), c.number("hi")};
  double g = c.has("gamma") ? c.number("gamma") : 0.0;
  double w = 2.0 * (g + std::sqrt(a) + 1.0) / (1.0 - std::sqrt(b));
  return {-w, w};
}

int cmd_region(const io::RunConfig& c, Outputs& o, std::ostream& out) {
  const std::string kind = c.string("kind");
  const double a = c.number("a"), b = c.number("b");
  const int res = static_cast<int>(c.integer("resolution"));
  geometry::RelBound bound(a, b);
  const geometry::Interval window = default_window(c, a, b);
  std::optional<double> gamma;
  if (c.has("gamma")) gamma = c.number("gamma");

  std::vector<ComplexPoint> curve, overlay;
  std::optional<geometry::DiskFamilyRegion> region;
  if (kind == "hull") {
    curve = geometry::hull_boundary_polyline(bound, res, window);
    overlay = geometry::coarse_hull_boundary_polyline(bound, res, window);
    region.emplace(bound, geometry::SpectrumModel::real_line(), 1.0);
  } else {
    if (kind == "bone" && !gamma) throw std::invalid_argument("--gamma is required for kind=bone");
    auto centers = gamma ? geometry::SpectrumModel::interval(-*gamma, *gamma) : geometry::SpectrumModel::real_line();
    region.emplace(bound, centers, c.number("radius-scale"));
    std::optional<geometry::Interval> span;
    if (c.has("lo") || !gamma) span = window;
    curve = geometry::boundary_polyline(*region, res, span);
    overlay = geometry::hull_boundary_polyline(bound, res, window);
  }
  o.text(c.string("out"), io::polyline_csv(curve));
  if (c.boolean("prior-overlay")) o.text(c.string("overlay-out"), io::polyline_csv(overlay));
  if (c.has("region-json")) o.json_file(c.string("region-json"), io::region_json(*region, kind, gamma));
  out << "region " << kind << ": " << curve.size() << " boundary points\n";
  return kOk;
}

int cmd_matrix_lab(const io::RunConfig& c, Outputs& o, std::ostream& out, std::ostream& err) {
  const int trials = static_cast<int>(c.integer("trials"));
  const std::uint64_t seed = c.seed("seed");
  const int samples = static_cast<int>(c.integer("samples"));
  lab::BlockInstanceParams params;
  params.min_dim = static_cast<int>(c.integer("min-dim"));
  params.max_dim = static_cast<int>(c.integer("max-dim"));

  auto reports = run_indexed<VerificationReport>(trials, static_cast<int>(c.integer("jobs")), [&](int i) {
    std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(i));
    Rng rng(s);
    lab::BlockOperator block = lab::random_block_operator(rng, params);
    return lab::verify_block_theorem(block, samples, derive_seed(s, 1));
  });

  json instances = json::array();
  long failed = 0, rejected = 0;
  for (int i = 0; i < trials; ++i) {
    const auto& r = reports[static_cast<std::size_t>(i)];
    std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(i));
    json entry = summary_of(r);
    entry["index"] = i;
    entry["seed"] = s;
    entry["instance"] = r.instance;
    if (r.rejected) {
      ++rejected;
    } else if (!r.verified()) {
      ++failed;
      entry["report"] = r.to_json();
      err << "instance " << i << " (seed " << s << ") failed\n";
      print_failures(err, "  instance " + std::to_string(i), r);
    }
    instances.push_back(std::move(entry));
  }
  json report{{"command", "matrix-lab"}, {"seed", seed},    {"trials", trials}, {"failed", failed},
              {"rejected", rejected},   {"verified", failed == 0}, {"instances", instances}};
  o.json_file(c.string("report"), report);
  out << "matrix-lab: " << trials << " trials, " << failed << " failed, " << rejected << " rejected\n";
  return failed ? kVerificationFailure : kOk;
}

json regions_of(const VerificationReport& r) {
  const auto& b = r.bounds;
  if (!b.contains("a") || !b.contains("v") || !b["v"].is_number() || b["v"].get<double>() >= 0.0) return nullptr;
  auto regions = geometry::perturbation_regions(b["a"].get<double>(), b["b"].get<double>(),
                                                b["tau"].get<double>(), b["v"].get<double>());
  json j{{"worse", io::region_json(regions.worse, "disks", regions.gamma)}};
  j["better"] = regions.better ? io::region_json(*regions.better, "disks", regions.gamma) : json(nullptr);
  return j;
}

int cmd_perturb(const io::RunConfig& c, Outputs& o, std::ostream& out, std::ostream& err) {
  lab::TmainOptions opts;
  opts.b_step = c.number("b-step");
  if (c.params["tau"].is_number()) opts.tau = c.number("tau");

  if (c.has("problem")) {
    record_input(o.record, c.string("problem"));
    auto problem = io::problem_from_json(io::read_json(c.string("problem")));
    VerificationReport r = lab::verify_tmain(problem, opts);
    json report = r.to_json();
    report["command"] = "perturb";
    report["regions"] = r.rejected ? json(nullptr) : regions_of(r);
    o.json_file(c.string("report"), report);
    if (r.rejected) {
      err << "hypothesis unmet: " << r.rejection_reason << "\n";
      return kHypothesisUnmet;
    }
    print_failures(err, "problem", r);
    out << "perturb: " << (r.verified() ? "verified" : "FAILED") << ", " << r.nonreal_count << " non-real eigenvalues\n";
    return r.verified() ? kOk : kVerificationFailure;
  }

  const int trials = static_cast<int>(c.integer("trials"));
  const std::uint64_t seed = c.seed("seed");
  lab::PerturbationInstanceParams params;
  params.min_dim = static_cast<int>(c.integer("min-dim"));
  params.max_dim = static_cast<int>(c.integer("max-dim"));
  auto reports = run_indexed<VerificationReport>(trials, static_cast<int>(c.integer("jobs")), [&](int i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    return lab::verify_tmain(lab::random_perturbation_problem(rng, params), opts);
  });
  json instances = json::array();
  long failed = 0, rejected = 0;
  for (int i = 0; i < trials; ++i) {
    const auto& r = reports[static_cast<std::size_t>(i)];
    std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(i));
    json entry = summary_of(r);
    entry["index"] = i;
    entry["seed"] = s;
    entry["bounds"] = r.bounds;
    if (r.rejected) {
      ++rejected;
    } else if (!r.verified()) {
      ++failed;
      entry["report"] = r.to_json();
      err << "problem " << i << " (seed " << s << ") failed\n";
      print_failures(err, "  problem " + std::to_string(i), r);
    }
    instances.push_back(std::move(entry));
  }
  json report{{"command", "perturb"}, {"seed", seed},    {"trials", trials}, {"failed", failed},
              {"rejected", rejected}, {"verified", failed == 0}, {"instances", instances}};
  o.json_file(c.string("report"), report);
  out << "perturb: " << trials << " problems, " << failed << " failed, " << rejected << " rejected\n";
  return failed ? kVerificationFailure : kOk;
}

sl::Potential potential_from(const io::RunConfig& c, io::RunRecord& record) {
  auto kind = sl::potential_kind_from_string(c.string("kind"));
  const double w = c.number("width"), x0 = c.number("center");
  switch (kind) {
    case sl::PotentialKind::step: return sl::Potential::step(c.number("depth"), w, x0);
    case sl::PotentialKind::gaussian: return sl::Potential::gaussian(c.number("depth"), w, x0);
    case sl::PotentialKind::lorentzian: return sl::Potential::lorentzian(c.number("depth"), w, x0);
    case sl::PotentialKind::tabulated:
      record_input(record, c.string("file"));
      return sl::Potential::load_table(c.string("file"));
  }
  throw std::invalid_argument("unknown potential");
}

int cmd_sl(const io::RunConfig& c, Outputs& o, std::ostream& out, std::ostream& err) {
  const sl::Potential q = potential_from(c, o.record);
  const double p = c.number("p");
  sl::SLContainmentOptions opts;
  opts.nonreal_tolerance = c.number("nonreal-tol");
  opts.slack = {c.number("slack-c"), c.number("slack-kappa"), c.number("slack-floor")};
  opts.sign_test = !c.boolean("skip-sign-test");
  const auto disc = sl::discretize(q, c.number("L"), static_cast<int>(c.integer("n")));
  const auto rep = sl::containment_report(disc, q, p, opts);
  o.text(c.string("out"), io::sl_eigen_csv(rep));
  o.text(c.string("constants-out"), io::constants_csv({p}));
  json report = rep.report.to_json();
  report["command"] = "sl";
  report["worstMarginBox"] = rep.worst_margin_box ? json(*rep.worst_margin_box) : json(nullptr);
  report["worstMarginBst"] = rep.worst_margin_bst ? json(*rep.worst_margin_bst) : json(nullptr);
  o.json_file(c.string("report"), report);
  print_failures(err, "sl", rep.report);
  out << "sl: " << rep.rows.size() << " non-real eigenvalues, " << (rep.report.verified() ? "all contained" : "FAILED")
      << "\n";
  return rep.report.verified() ? kOk : kVerificationFailure;
}

int cmd_tau0(const io::RunConfig& c, Outputs& o, std::ostream& out) {
  const std::string profile = c.string("profile");
  sl::HalfLineProfile f1, f2;
  if (profile == "indicator") {
    f1 = sl::HalfLineProfile::indicator(c.number("lo"), c.number("hi"));
  } else if (profile == "extremizer") {
    f1 = sl::HalfLineProfile::power(-0.5, 1.0, c.number("X"));
    f2 = sl::HalfLineProfile::power(-0.5, 1.0, c.number("X"), -1.0);
  } else {
    const double e = c.number("exponent"), lo = c.number("lo"), hi = c.number("hi");
    f1 = sl::HalfLineProfile::power(e, lo, hi);
    const std::string partner = c.string("partner");
    if (partner == "negated") f2 = sl::HalfLineProfile::power(e, lo, hi, -1.0);
    if (partner == "same") f2 = f1;
  }
  auto r = sl::tau0_hilbert_form(f1, f2, c.number("rel-tol"));
  const bool within = r.quotient <= kTauBound + 1e-4;
  json report{{"command", "tau0"},
              {"profile", profile},
              {"quotient", r.quotient},
              {"normSq", r.norm_sq},
              {"doubleIntegral", r.double_integral},
              {"panels", r.panels},
              {"upperBound", kTauBound},
              {"withinUpperBound", within}};
  o.json_file(c.string("out"), report);
  out << "tau0 " << profile << ": quotient " << io::format_number(r.quotient) << (within ? "" : " EXCEEDS 3+2sqrt2")
      << "\n";
  return within ? kOk : kVerificationFailure;
}

int cmd_constants(const io::RunConfig& c, Outputs& o, std::ostream& out) {
  const double lo = c.number("p-min"), hi = c.number("p-max");
  const int count = static_cast<int>(c.integer("count"));
  std::vector<double> ps;
  for (int i = 0; i < count; ++i) {
    double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    ps.push_back(c.string("spacing") == "log" ? lo * std::pow(hi / lo, t) : lo + (hi - lo) * t);
  }
  o.text(c.string("out"), io::constants_csv(ps));
  out << "constants: " << count << " rows\n";
  return kOk;
}

// String flag values become JSON values of the schema's type.
json parse_flag(const std::string& key, const io::FieldSpec& spec, const std::string& text,
                std::vector<std::string>& problems) {
  auto as_number = [&]() -> json {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      problems.push_back("'" + key + "': cannot parse '" + text + "' as a number");
      return nullptr;
    }
    return v;
  };
  switch (spec.type) {
    case io::FieldType::number: return as_number();
    case io::FieldType::number_or_auto: return text == "auto" ? json("auto") : as_number();
    case io::FieldType::integer: {
      long long v = 0;
      auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec == std::errc() && ptr == text.data() + text.size()) return v;
      std::uint64_t u = 0;
      auto [ptr2, ec2] = std::from_chars(text.data(), text.data() + text.size(), u);
      if (ec2 == std::errc() && ptr2 == text.data() + text.size()) return u;
      problems.push_back("'" + key + "': cannot parse '" + text + "' as an integer");
      return nullptr;
    }
    case io::FieldType::boolean: return text == "true" || text == "1";
    case io::FieldType::string: return text;
  }
  return nullptr;
}

int run_with_record(const io::RunConfig& config, const std::optional<fs::path>& run_dir, std::ostream& out,
                    std::ostream& err) {
  io::RunRecord record;
  record.config = config;
  record.started = io::utc_now();
  const fs::path dir = run_dir.value_or(fs::path("."));
  int code = execute(config, dir, record, out, err);
  record.finished = io::utc_now();
  if (run_dir) io::write_run_record(record, dir);
  return code;
}

int cmd_replay(const fs::path& record_path, const std::optional<fs::path>& run_dir, std::ostream& out,
               std::ostream& err) {
  io::RunRecord original = io::read_run_record(record_path);
  for (const auto& in : original.inputs) {
    std::string actual = io::sha256_file(in.path);
    if (actual != in.sha256) throw io::IntegrityError("input changed since the run: " + in.path);
  }
  if (original.version != kencl::io::kArtifactVersion)
    err << "warning: record written by version " << original.version << "\n";
  const fs::path dir = run_dir.value_or(record_path.parent_path() / "replay");
  io::RunRecord fresh;
  fresh.config = original.config;
  fresh.started = io::utc_now();
  int code = execute(original.config, dir, fresh, out, err);
  fresh.finished = io::utc_now();
  io::write_run_record(fresh, dir);
  int mismatches = 0;
  for (const auto& e : original.outputs) {
    auto it = std::find_if(fresh.outputs.begin(), fresh.outputs.end(), [&](const auto& f) { return f.path == e.path; });
    if (it == fresh.outputs.end() || it->sha256 != e.sha256) {
      ++mismatches;
      err << "replay mismatch: " << e.path << "\n";
    }
  }
  out << "replay: " << original.outputs.size() - static_cast<std::size_t>(mismatches) << "/" << original.outputs.size()
      << " outputs identical (run exit code " << code << ")\n";
  return mismatches ? kVerificationFailure : kOk;
}

}  // namespace

std::string version_string() { return std::string("kencl ") + io::kArtifactVersion; }

int execute(const io::RunConfig& config, const fs::path& run_dir, io::RunRecord& record, std::ostream& out,
            std::ostream& err) {
  Outputs o{run_dir, record};
  const std::string& cmd = config.command;
  if (cmd == "region") return cmd_region(config, o, out);
  if (cmd == "matrix-lab") return cmd_matrix_lab(config, o, out, err);
  if (cmd == "perturb") return cmd_perturb(config, o, out, err);
  if (cmd == "sl") return cmd_sl(config, o, out, err);
  if (cmd == "tau0") return cmd_tau0(config, o, out);
  if (cmd == "constants") return cmd_constants(config, o, out);
  throw std::invalid_argument("unknown command '" + cmd + "'");
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectral enclosures for J-non-negative operators: checks, regions and data.", "kencl"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1);

  struct Bound {
    std::map<std::string, std::string> values;
    std::map<std::string, bool> flags;
    std::string config_path;
    std::string run_dir;
  };
  std::map<std::string, Bound> bound;
  std::map<std::string, CLI::App*> subs;
  for (const auto& cmd : io::known_commands()) {
    auto* sub = app.add_subcommand(cmd, "run the " + cmd + " workflow");
    auto& b = bound[cmd];
    sub->add_option("--config", b.config_path, "JSON configuration; flags override its values");
    sub->add_option("--run-dir", b.run_dir, "directory for outputs and run_record.json");
    for (const auto& [key, spec] : io::schema_for(cmd)) {
      std::string help = spec.help;
      if (!spec.default_value.is_null()) help += " (default " + spec.default_value.dump() + ")";
      if (spec.type == io::FieldType::boolean) {
        b.flags[key] = false;
        sub->add_flag("--" + key, b.flags[key], help);
      } else {
        sub->add_option("--" + key, b.values[key], help);
      }
    }
    subs[cmd] = sub;
  }
  std::string record_path, replay_dir;
  auto* replay = app.add_subcommand("replay", "re-run a recorded run and compare output digests");
  replay->add_option("--record", record_path, "run_record.json of the original run")->required();
  replay->add_option("--run-dir", replay_dir, "directory for the replayed outputs");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (replay->parsed()) {
      return cmd_replay(record_path, replay_dir.empty() ? std::nullopt : std::optional<fs::path>(replay_dir), out, err);
    }
    for (const auto& [cmd, sub] : subs) {
      if (!sub->parsed()) continue;
      const auto& b = bound[cmd];
      json raw{{"command", cmd}, {"params", json::object()}};
      if (!b.config_path.empty()) {
        json file = io::read_json(b.config_path);
        io::RunConfig base = io::validate_config(file);
        if (base.command != cmd)
          throw io::ConfigError({"config file is for command '" + base.command + "', not '" + cmd + "'"});
        for (const auto& [k, v] : (file.contains("params") ? file["params"] : file).items())
          if (k != "command") raw["params"][k] = v;
      }
      std::vector<std::string> problems;
      const auto& schema = io::schema_for(cmd);
      for (const auto& [key, text] : b.values) {
        if (sub->count("--" + key) == 0) continue;
        raw["params"][key] = parse_flag(key, schema.at(key), text, problems);
      }
      for (const auto& [key, on] : b.flags)
        if (sub->count("--" + key) > 0) raw["params"][key] = on;
      if (!problems.empty()) throw io::ConfigError(problems);
      io::RunConfig config = io::validate_config(raw);
      return run_with_record(config, b.run_dir.empty() ? std::nullopt : std::optional<fs::path>(b.run_dir), out, err);
    }
    return kUsage;
  } catch (const io::ConfigError& e) {
    err << e.what() << "\n";
    return kUsage;
  } catch (const io::IntegrityError& e) {
    err << "integrity error: " << e.what() << "\n";
    return kVerificationFailure;
  } catch (const QuadratureError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  }
}

}  // namespace kencl::cli
