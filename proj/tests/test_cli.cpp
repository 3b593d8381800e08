#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kCli = GRADCHAIN_CLI_PATH;

struct RunResult {
  int exit_code;
  std::string out, err;
};

fs::path scratch_dir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "gradchain_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

RunResult run(const std::string& args) {
  const fs::path out = scratch_dir() / "stdout.txt";
  const fs::path err = scratch_dir() / "stderr.txt";
  const std::string cmd = kCli + " " + args + " > " + out.string() + " 2> " + err.string();
  const int raw = std::system(cmd.c_str());
  RunResult result;
  result.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  result.out = slurp(out);
  result.err = slurp(err);
  return result;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> data_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#') lines.push_back(line);
  return lines;
}

std::vector<std::string> split(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) out.push_back(item);
  return out;
}

}  // namespace

TEST_CASE("spectrum command") {
  const fs::path out = scratch_dir() / "spectrum.csv";
  auto r = run("spectrum --n 64 --xi 2 --omega0 1 --format csv -o " + out.string());
  CHECK(r.exit_code == 0);
  auto lines = data_lines(read_file(out));
  REQUIRE(lines.size() == 65);  // header + 64 rows
  CHECK(lines[0] == "m,k,omega");

  // min/max frequency columns match the band edges (even N attains both)
  double lo = 1e300, hi = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const double w = std::stod(split(lines[i])[2]);
    lo = std::min(lo, w);
    hi = std::max(hi, w);
  }
  CHECK(lo == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(hi == doctest::Approx(1.5).epsilon(1e-12));

  SUBCASE("homogeneous chain lists the zero mode at m = 0") {
    const fs::path h = scratch_dir() / "spectrum1.csv";
    run("spectrum --n 16 --xi 1 -o " + h.string());
    auto row = split(data_lines(read_file(h))[1]);
    CHECK(row[0] == "0");
    CHECK(std::stod(row[2]) == 0.0);
  }

  SUBCASE("invalid input exits 2 naming the field") {
    auto bad = run("spectrum --n 1 --xi 2");
    CHECK(bad.exit_code == 2);
    CHECK(bad.err.find("n must be >= 2") != std::string::npos);
  }
}

TEST_CASE("greens sweep") {
  const fs::path out = scratch_dir() / "greens.csv";
  auto r = run("greens --n 64 --xi 2 --omega-min 0.1 --omega-max 2.5 --omega-count 12 -o " +
               out.string());
  CHECK(r.exit_code == 0);
  auto lines = data_lines(read_file(out));

  // regimes appear as ii, then i, then iii with increasing omega
  std::vector<std::string> regimes;
  for (std::size_t i = 1; i < lines.size(); ++i) regimes.push_back(split(lines[i])[1]);
  std::size_t first_i = 0, last_ii = 0, first_iii = 0;
  for (std::size_t i = 0; i < regimes.size(); ++i) {
    if (regimes[i] == "ii") last_ii = i;
    if (regimes[i] == "i" && first_i == 0) first_i = i;
    if (regimes[i] == "iii" && first_iii == 0) first_iii = i;
  }
  CHECK(last_ii < first_i);
  CHECK(first_i < first_iii);

  SUBCASE("band-edge grid points are marked singular, not fatal") {
    const fs::path s = scratch_dir() / "greens_singular.csv";
    auto rs = run("greens --n 32 --xi 2 --omega-min 0.5 --omega-max 1.0 --omega-count 3 -o " +
                  s.string());
    CHECK(rs.exit_code == 0);
    auto rows = data_lines(read_file(s));
    CHECK(split(rows[1])[1] == "singular");
  }

  SUBCASE("oracle verification passes out of band at 1e-8") {
    auto rv = run("greens --n 256 --xi 2 --omega-min 0 --omega-max 0.4 --omega-count 5 "
                  "--verify --tol 1e-8 -o " + (scratch_dir() / "gv.csv").string());
    CHECK(rv.exit_code == 0);
  }

  SUBCASE("verification failure exits 1") {
    auto rv = run("greens --n 16 --xi 2 --omega-min 0.7 --omega-max 1.3 --omega-count 4 "
                  "--verify --tol 1e-12 -o " + (scratch_dir() / "gf.csv").string());
    CHECK(rv.exit_code == 1);
  }

  SUBCASE("time-domain export: causal signal with the causality ratio in the trailer") {
    const fs::path t = scratch_dir() / "greens_time.csv";
    auto rt = run("greens --n 16 --xi 1 --p 2 --q 2 --time-domain -o " + t.string());
    CHECK(rt.exit_code == 0);
    const std::string text = read_file(t);
    auto lines = data_lines(text);
    CHECK(lines[0] == "t,value");
    CHECK(lines.size() > 1000);
    const auto pos = text.find("# causality_ratio: ");
    REQUIRE(pos != std::string::npos);
    CHECK(std::stod(text.substr(pos + 19)) < 1e-3);
  }
}

TEST_CASE("json output round-trips through the documented schema") {
  const fs::path out = scratch_dir() / "greens.json";
  run("greens --n 32 --xi 0.5 --omega-min 0 --omega-max 7 --omega-count 6 --format json -o " +
      out.string());
  json j = json::parse(read_file(out));
  CHECK(j.at("command") == "greens");
  CHECK(j.at("params").at("n") == 32);
  CHECK(j.at("params").at("xi") == 0.5);
  REQUIRE(j.at("results").is_array());
  REQUIRE(j.at("results").size() == 6);
  for (const auto& row : j.at("results")) {
    CHECK(row.contains("omega"));
    CHECK(row.contains("regime"));
    CHECK(row.contains("re"));
    CHECK(row.contains("im"));
  }
  // re-serialization is lossless
  CHECK(json::parse(j.dump()) == j);
}

TEST_CASE("density command") {
  const fs::path out = scratch_dir() / "density.csv";
  auto r = run("density --n 100 --xi 2 --count 50 -o " + out.string());
  CHECK(r.exit_code == 0);
  const std::string text = read_file(out);

  SUBCASE("trailer reports the normalization integral near N") {
    const auto pos = text.find("# integral: ");
    REQUIRE(pos != std::string::npos);
    const double integral = std::stod(text.substr(pos + 12));
    CHECK(std::abs(integral - 100.0) < 1e-8);
  }
  SUBCASE("samples exclude the edges by the configured margin") {
    auto lines = data_lines(text);
    const double first = std::stod(split(lines[1])[0]);
    const double last = std::stod(split(lines.back())[0]);
    CHECK(first >= 0.5 + 1e-6 * (1.5 - 0.5) - 1e-15);
    CHECK(last <= 1.5 - 1e-6 * (1.5 - 0.5) + 1e-15);
  }
  SUBCASE("homogeneous curve matches 2N/(pi sqrt(wD^2 - w^2))") {
    const fs::path h = scratch_dir() / "density1.csv";
    run("density --n 100 --xi 1 --count 20 -o " + h.string());
    auto lines = data_lines(read_file(h));
    for (std::size_t i = 1; i < lines.size(); ++i) {
      const auto cells = split(lines[i]);
      const double w = std::stod(cells[0]), rho = std::stod(cells[1]);
      const double expected = 200.0 / (3.14159265358979324 * std::sqrt(4.0 - w * w));
      CHECK(rho == doctest::Approx(expected).epsilon(1e-10));
    }
  }
}

TEST_CASE("continuum command") {
  const fs::path out = scratch_dir() / "continuum.csv";
  auto r = run("continuum --length 1 --beta 1 --Omega 1 --rho0 1 -o " + out.string());
  CHECK(r.exit_code == 0);

  SUBCASE("observed orders beyond the first rung are >= 0.9") {
    auto lines = data_lines(read_file(out));
    REQUIRE(lines.size() >= 4);
    for (std::size_t i = 2; i < lines.size(); ++i) {
      const auto cells = split(lines[i]);
      for (std::size_t col : {2, 4, 6, 8}) {
        CAPTURE(i);
        CAPTURE(col);
        CHECK(std::stod(cells[col]) >= 0.9);
      }
    }
  }
  SUBCASE("companion sample files are written") {
    CHECK(fs::exists(scratch_dir() / "continuum.greens.csv"));
    CHECK(fs::exists(scratch_dir() / "continuum.density.csv"));
  }
  SUBCASE("ungraded density column is flat at L/(pi Omega)") {
    const fs::path f = scratch_dir() / "flat.csv";
    run("continuum --length 1 --beta 0 --Omega 1 --rho0 1 -o " + f.string());
    auto lines = data_lines(read_file(scratch_dir() / "flat.density.csv"));
    for (std::size_t i = 1; i < lines.size(); ++i)
      CHECK(std::stod(split(lines[i])[1]) ==
            doctest::Approx(1.0 / 3.14159265358979324).epsilon(1e-12));
  }
  SUBCASE("propagating periodic request is a clean error") {
    auto bad = run("continuum --length 1 --beta 1 --Omega 1 --domain periodic -o " +
                   (scratch_dir() / "p.csv").string());
    CHECK(bad.exit_code == 2);
    CHECK(bad.err.find("periodic") != std::string::npos);
  }
}

TEST_CASE("evolve command") {
  const fs::path out = scratch_dir() / "evolve.csv";
  auto r = run("evolve --n 8 --xi 2 --preset random --seed 7 --t-max 40 --samples 64 -o " +
               out.string());
  CHECK(r.exit_code == 0);
  const std::string text = read_file(out);

  SUBCASE("energy drift below 1e-9 and scaling relation logged") {
    const auto pos = text.find("# energy_drift: ");
    REQUIRE(pos != std::string::npos);
    CHECK(std::stod(text.substr(pos + 16)) < 1e-9);
    const auto spos = text.find("# scaling_relation_max_dev: ");
    REQUIRE(spos != std::string::npos);
    CHECK(std::stod(text.substr(spos + 28)) < 1e-10);
  }

  SUBCASE("single-mode preset oscillates at the mode frequency") {
    const fs::path s = scratch_dir() / "mode.csv";
    run("evolve --n 4 --xi 1 --preset single-mode --mode 1 --t-max 6.2831853071795865 "
        "--samples 9 -o " + s.string());
    auto lines = data_lines(read_file(s));
    // omega_1 = sqrt(2) for N=4, xi=1; u_0(t) = cos(w t)
    for (std::size_t i = 1; i < lines.size(); ++i) {
      const auto cells = split(lines[i]);
      const double t = std::stod(cells[0]);
      CHECK(std::stod(cells[1]) ==
            doctest::Approx(std::cos(std::sqrt(2.0) * t)).epsilon(1e-9));
    }
  }

  SUBCASE("identical config and seed give byte-identical output") {
    const fs::path a = scratch_dir() / "det_a.csv";
    const fs::path b = scratch_dir() / "det_b.csv";
    run("evolve --n 6 --xi 0.5 --preset random --seed 123 --samples 32 -o " + a.string());
    run("evolve --n 6 --xi 0.5 --preset random --seed 123 --samples 32 -o " + b.string());
    CHECK(read_file(a) == read_file(b));
    CHECK(!read_file(a).empty());
  }
}

TEST_CASE("verify command") {
  auto r = run("verify --tol 1e-8 --seed 5");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("VERIFY: passed") != std::string::npos);
  CHECK(r.out.find("FAIL") == std::string::npos);
}

TEST_CASE("config file supplies defaults; flags win") {
  const fs::path cfg = scratch_dir() / "cfg.json";
  {
    std::ofstream out(cfg);
    out << R"({"params": {"n": 100, "xi": 2.0, "count": 10}})";
  }
  const fs::path out = scratch_dir() / "cfg_density.csv";
  auto r = run("density --config " + cfg.string() + " -o " + out.string());
  CHECK(r.exit_code == 0);
  const std::string text = read_file(out);
  CHECK(text.find("# n: 100") != std::string::npos);
  CHECK(text.find("# xi: 2") != std::string::npos);
  CHECK(data_lines(text).size() == 11);  // header + count rows

  // explicit flag overrides the config value
  const fs::path out2 = scratch_dir() / "cfg_density2.csv";
  run("density --config " + cfg.string() + " --xi 0.5 -o " + out2.string());
  CHECK(read_file(out2).find("# xi: 0.5") != std::string::npos);
}

TEST_CASE("GRADCHAIN_OUTDIR resolves relative outputs") {
  const fs::path dir = scratch_dir() / "outdir";
  fs::create_directories(dir);
  const std::string cmd = "GRADCHAIN_OUTDIR=" + dir.string() + " " + kCli +
                          " spectrum --n 4 --xi 1 -o via_env.csv > /dev/null 2>&1";
  REQUIRE(std::system(cmd.c_str()) == 0);
  CHECK(fs::exists(dir / "via_env.csv"));
}
