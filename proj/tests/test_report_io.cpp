#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "kencl/random.hpp"
#include "kencl/report_io.hpp"

using namespace kencl;
using namespace kencl::io;
using nlohmann::json;

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("kencl_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string problems_text(const ConfigError& e) {
  std::string s;
  for (const auto& p : e.problems()) s += p + "\n";
  return s;
}

// A random valid parameter set drawn from the schema itself.
json random_params(const std::string& command, Rng& rng) {
  json params = json::object();
  for (const auto& [key, spec] : schema_for(command)) {
    if (spec.output_path || spec.input_path) continue;
    if (rng.uniform() < 0.4 && (!spec.default_value.is_null() || spec.optional)) continue;
    double lo = spec.min.value_or(-10), hi = spec.max.value_or(lo + 20);
    switch (spec.type) {
      case FieldType::number:
      case FieldType::number_or_auto: {
        double v = lo + (hi - lo) * (0.1 + 0.8 * rng.uniform());
        params[key] = v;
        break;
      }
      case FieldType::integer: {
        long long v = static_cast<long long>(std::ceil(lo)) + rng.integer(0, 3);
        if (spec.max) v = std::min<long long>(v, static_cast<long long>(*spec.max));
        params[key] = v;
        break;
      }
      case FieldType::string:
        if (!spec.choices.empty()) params[key] = spec.choices[rng.integer(0, static_cast<int>(spec.choices.size()) - 1)];
        break;
      case FieldType::boolean:
        params[key] = rng.uniform() < 0.5;
        break;
    }
  }
  return params;
}

}  // namespace

TEST_CASE("defaults are filled") {
  auto c = validate_config(json{{"command", "sl"}, {"params", {{"kind", "step"}, {"depth", 5}, {"p", 2}}}});
  CHECK(c.number("L") == 30);
  CHECK(c.integer("n") == 4000);
  CHECK(c.string("kind") == "step");
  auto flat = validate_config(json{{"command", "sl"}, {"kind", "step"}, {"depth", 5}, {"p", 2}});
  CHECK(flat.params == c.params);
}

TEST_CASE("range violations name their fields") {
  try {
    validate_config(json{{"command", "sl"}, {"params", {{"depth", 5}, {"nonreal-tol", -1e-3}, {"L", -2}}}});
    FAIL("expected a configuration error");
  } catch (const ConfigError& e) {
    auto text = problems_text(e);
    CHECK(text.find("nonreal-tol") != std::string::npos);
    CHECK(text.find("L") != std::string::npos);
    CHECK(e.problems().size() == 2);
  }
  CHECK_THROWS_AS(validate_config(json{{"command", "sl"}, {"params", {{"depth", 5}, {"colour", 1}}}}), ConfigError);
  CHECK_THROWS_AS(validate_config(json{{"command", "nope"}}), ConfigError);
  CHECK_THROWS_AS(validate_config(json{{"command", "sl"}, {"params", {{"depth", 5}, {"n", 4001}}}}), ConfigError);
  CHECK_THROWS_AS(validate_config(json{{"command", "sl"}, {"params", {{"kind", "tabulated"}}}}), ConfigError);
  CHECK_THROWS_AS(validate_config(json{{"command", "matrix-lab"}, {"params", {{"min-dim", 9}, {"max-dim", 3}}}}), ConfigError);
}

TEST_CASE("parse errors carry the line") {
  auto dir = scratch("parse");
  write_file(dir / "bad.json", "{\n  \"command\": \"sl\",\n  \"params\": {\n    \"depth\": ,\n  }\n}\n");
  try {
    load_config(dir / "bad.json");
    FAIL("expected a configuration error");
  } catch (const ConfigError& e) {
    CHECK(problems_text(e).find("line 4") != std::string::npos);
  }
  CHECK_THROWS(load_config(dir / "missing.json"));
}

TEST_CASE("save then load normalizes") {
  auto dir = scratch("roundtrip");
  Rng rng(1234);
  for (int k = 0; k < 300; ++k) {
    auto cmds = known_commands();
    std::string cmd = cmds[rng.integer(0, static_cast<int>(cmds.size()) - 1)];
    json raw{{"command", cmd}, {"params", random_params(cmd, rng)}};
    if (cmd == "sl" && !raw["params"].contains("depth")) raw["params"]["depth"] = 3.0;
    RunConfig normalized;
    try {
      normalized = validate_config(raw);
    } catch (const ConfigError&) {
      continue;  // cross-field rules can reject a random draw
    }
    save_config(normalized, dir / "c.json");
    auto back = load_config(dir / "c.json");
    CHECK(back.to_json() == normalized.to_json());
    CHECK(validate_config(back.to_json()).to_json() == normalized.to_json());
  }
}

TEST_CASE("canonical serialization") {
  json j{{"b", 0.1}, {"a", {1, 2.5, -0.0}}, {"c", "x"}};
  auto text = canonical_json(j);
  CHECK(text == canonical_json(json::parse(text)));
  CHECK(text.find("\"a\"") < text.find("\"b\""));
  CHECK(text.back() == '\n');
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(-0.0) == "0");
  CHECK(format_number(1e300) == "1e+300");
  CHECK_THROWS_AS(canonical_json(json{{"margin", std::numeric_limits<double>::quiet_NaN()}}), std::domain_error);
  CHECK_THROWS_AS(canonical_json(json{{"v", {1.0, std::numeric_limits<double>::infinity()}}}), std::domain_error);
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("reports are deterministic and the manifest detects corruption") {
  auto dir = scratch("manifest");
  RunRecord rec;
  rec.config = validate_config(json{{"command", "constants"}});
  json report{{"value", 1.0 / 3}, {"list", {1, 2, 3}}};
  auto p = write_report(rec, dir, "out/report.json", report);
  auto first = read_file(p);
  RunRecord rec2;
  write_report(rec2, dir, "out/report.json", report);
  CHECK(read_file(p) == first);
  CHECK(rec.outputs[0].sha256 == rec2.outputs[0].sha256);
  CHECK(read_json(p) == report);

  write_run_record(rec, dir);
  auto back = read_run_record(dir / "run_record.json");
  CHECK(back.to_json() == rec.to_json());
  CHECK_NOTHROW(verify_manifest(back, dir));

  std::ofstream(p, std::ios::app) << " ";
  CHECK_THROWS_AS(verify_manifest(back, dir), IntegrityError);
  fs::remove(p);
  CHECK_THROWS_AS(verify_manifest(back, dir), IntegrityError);
}

TEST_CASE("NaN in a verification report is rejected") {
  VerificationReport rep;
  EigenRecord r;
  r.margin = std::numeric_limits<double>::quiet_NaN();
  rep.eigenvalues.push_back(r);
  CHECK_THROWS_AS(rep.to_json(), std::domain_error);
}

TEST_CASE("matrix and problem round-trip") {
  Rng rng(5);
  Matrix m = random_gaussian(rng, 3, 4);
  auto j = matrix_to_json(m);
  CHECK(j["rows"] == 3);
  CHECK(matrix_from_json(json::parse(j.dump())) == m);
  CHECK(matrix_from_json(json{{"rows", 1}, {"cols", 2}, {"data", {1.5, {2, -1}}}})(0, 1) == std::complex<double>(2, -1));
  CHECK_THROWS(matrix_from_json(json{{"rows", 2}, {"cols", 2}, {"data", {1, 2, 3}}}));

  Matrix j2 = signature_matrix({1, -1});
  lab::KreinPerturbationProblem prob({1, -1}, j2, 0.1 * j2);
  auto back = problem_from_json(problem_to_json(prob));
  CHECK(back.signature() == prob.signature());
  CHECK(back.a0() == prob.a0());
  CHECK(back.v() == prob.v());
}

TEST_CASE("CSV layouts") {
  auto csv = constants_csv({2.0});
  CHECK(csv.rfind("p,s_p,f_sp,C_p,im_coef,re_coef,bst_im,bst_abs\n", 0) == 0);
  auto poly = polyline_csv({{1, 2}, {-0.0, 0.5}});
  CHECK(poly == "re,im\n1,2\n0,0.5\n");
}
