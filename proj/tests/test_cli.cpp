#include "cli.hpp"

#include <doctest.h>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace honestrd;
using nlohmann::json;

namespace {

const std::string data_dir = HONESTRD_TEST_DATA;

struct Run
{
  int code;
  std::string out, err;
};

Run run_cli(std::vector<std::string> args)
{
  args.insert(args.begin(), "honestrd");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string write_temp(const std::string& name, const std::string& text)
{
  const std::string path = "/tmp/honestrd_test_" + name;
  std::ofstream(path) << text;
  return path;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text)
{
  std::vector<std::vector<std::string>> rows;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    std::vector<std::string> f;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ','))
      f.push_back(cell);
    rows.push_back(f);
  }
  return rows;
}

double to_double(const std::string& s)
{
  if (s == "inf")
    return INFINITY;
  if (s == "-inf")
    return -INFINITY;
  double v = 0;
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

} // namespace

TEST_CASE("CSV parsing")
{
  bool has = false;
  std::istringstream a("\xEF\xBB\xBFy, x\n1,-1\n\n2,1\n");
  auto d = cli::parse_csv(a, has);
  CHECK_FALSE(has);
  CHECK(d.x == std::vector<double>{-1, 1});
  CHECK(d.y == std::vector<double>{1, 2});
  CHECK(d.sigma2 == std::vector<double>{1, 1});

  std::istringstream b("x,sigma2\n1,2\n");
  try {
    cli::parse_csv(b, has);
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ParseError);
    CHECK(std::string(e.what()).find("missing column 'y'") != std::string::npos);
  }

  std::istringstream c("x,y\n1,2\n3,abc\n");
  try {
    cli::parse_csv(c, has);
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 3, column y") != std::string::npos);
  }

  std::istringstream e("x,y\n1,2,3\n");
  CHECK_THROWS_AS(cli::parse_csv(e, has), Error);
  std::istringstream f("x,y\n1,1e3\n-2.5E-1,+4\n");
  auto g = cli::parse_csv(f, has);
  CHECK(g.y == std::vector<double>{1000, 4});
  CHECK(g.x[1] == -0.25);
}

TEST_CASE("number formatting is shortest round trip")
{
  CHECK(cli::format_number(0.1) == "0.1");
  CHECK(cli::format_number(-2.5e-12) == "-2.5e-12");
  CHECK(cli::format_number(INFINITY) == "inf");
  CHECK(cli::format_number(-INFINITY) == "-inf");
  CHECK(cli::format_number(NAN) == "nan");
  for (double v : {1.0 / 3.0, 2.0 / 7.0 * 1e-300, 123456789.123456789, -0.0})
    CHECK(to_double(cli::format_number(v)) == v);
}

TEST_CASE("golden toy reports")
{
  for (const auto& [weights, golden] :
       {std::pair{"lp:triangular", "toy_report.json"}, std::pair{"optimal", "toy_report_optimal.json"}}) {
    auto r = run_cli({"analyze", data_dir + "/toy.csv", "--C", "1", "--weights", weights});
    REQUIRE(r.code == 0);
    auto got = json::parse(r.out);
    std::ifstream gf(data_dir + "/" + golden);
    auto want = json::parse(gf);
    got["config_echo"].erase("input");
    want["config_echo"].erase("input");
    CHECK(got.dump() == want.dump());
  }
}

TEST_CASE("report CSV round trips the JSON numbers")
{
  const std::string in = data_dir + "/toy.csv";
  auto j = run_cli({"analyze", in, "--C", "1", "--weights", "optimal"});
  auto c = run_cli({"analyze", in, "--C", "1", "--weights", "optimal", "--format", "csv"});
  REQUIRE(j.code == 0);
  REQUIRE(c.code == 0);
  auto rep = json::parse(j.out);
  auto rows = csv_rows(c.out);
  REQUIRE(rows.size() == 2);
  std::map<std::string, std::string> row;
  for (std::size_t i = 0; i < rows[0].size(); ++i)
    row[rows[0][i]] = rows[1][i];
  auto close12 = [](double a, double b) {
    return a == b || std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b));
  };
  CHECK(close12(to_double(row["estimate"]), rep["estimate"].get<double>()));
  CHECK(close12(to_double(row["maxbias"]), rep["maxbias"].get<double>()));
  CHECK(close12(to_double(row["sd"]), rep["sd"].get<double>()));
  CHECK(close12(to_double(row["ci_lower"]), rep["ci"]["lower"].get<double>()));
  CHECK(close12(to_double(row["ci_upper"]), rep["ci"]["upper"].get<double>()));
  CHECK(close12(to_double(row["onesided_lower"]), rep["ci"]["onesided_lower"].get<double>()));
  CHECK(close12(to_double(row["h_plus"]), rep["h_plus"].get<double>()));
  CHECK(close12(to_double(row["criterion_value"]), rep["criterion"]["value"].get<double>()));
  CHECK(row["criterion_kind"] == "flci");
}

TEST_CASE("input CSV round trip through the formatter")
{
  bool has = false;
  std::ifstream in(data_dir + "/toy.csv");
  auto d = cli::parse_csv(in, has);
  std::ostringstream os;
  os << "x,y,sigma2\n";
  for (std::size_t i = 0; i < d.size(); ++i)
    os << cli::format_number(d.x[i]) << ',' << cli::format_number(d.y[i]) << ','
       << cli::format_number(d.sigma2[i]) << '\n';
  std::istringstream back(os.str());
  auto e = cli::parse_csv(back, has);
  CHECK(e.x == d.x);
  CHECK(e.y == d.y);
  CHECK(e.sigma2 == d.sigma2);
}

TEST_CASE("C grid gives one row per C")
{
  auto r = run_cli({"analyze", data_dir + "/toy.csv", "--C-grid", "0.0002:0.1:5", "--format", "csv"});
  REQUIRE(r.code == 0);
  auto rows = csv_rows(r.out);
  REQUIRE(rows.size() == 6);
  CHECK(to_double(rows[1][0]) == 0.0002);
  CHECK(to_double(rows[5][0]) == 0.1);
  CHECK(to_double(rows[3][0]) == doctest::Approx(std::sqrt(0.0002 * 0.1)));
  // worst-case bias grows with C
  CHECK(to_double(rows[5][2]) >= to_double(rows[1][2]));

  auto j = run_cli({"analyze", data_dir + "/toy.csv", "--C-grid", "0:1:3"});
  REQUIRE(j.code == 0);
  CHECK(json::parse(j.out).size() == 3);
}

TEST_CASE("exit codes")
{
  auto ok = run_cli({"efficiency", "--r-grid", "0.8:1:2", "--format", "csv"});
  CHECK(ok.code == cli::exit_ok);
  auto rows = csv_rows(ok.out);
  REQUIRE(rows.size() == 3);
  CHECK(to_double(rows[1][1]) == doctest::Approx(0.967).epsilon(1e-3));
  CHECK(to_double(rows[1][2]) == doctest::Approx(0.957).epsilon(1e-3));
  CHECK(to_double(rows[2][1]) == doctest::Approx(1.0));
  CHECK(to_double(rows[2][2]) == doctest::Approx(0.850).epsilon(1e-3));

  const auto noy = write_temp("noy.csv", "x,sigma2\n1,1\n-1,1\n");
  auto p = run_cli({"analyze", noy});
  CHECK(p.code == cli::exit_parse);
  CHECK(p.err.find("missing column 'y'") != std::string::npos);

  const auto oneside = write_temp("oneside.csv", "x,y\n1,1\n2,1\n3,1\n");
  auto d = run_cli({"analyze", oneside});
  CHECK(d.code == cli::exit_domain);
  CHECK(d.err.find("core_model") != std::string::npos);

  const auto sparse = write_temp("sparse.csv", "x,y,sigma2\n-1,0,1\n1,0,1\n");
  auto n = run_cli({"analyze", sparse, "--C", "1", "--p", "2"});
  CHECK(n.code == cli::exit_numeric);

  CHECK(run_cli({"analyze", "/nonexistent/file.csv"}).code == cli::exit_io);
  CHECK(run_cli({"analyze"}).code == cli::exit_parse);
  CHECK(run_cli({"analyze", noy, "--criterion", "bogus"}).code == cli::exit_parse);
  CHECK(cli::exit_parse != cli::exit_domain);
  CHECK(cli::exit_domain != cli::exit_numeric);
}

TEST_CASE("the installed tool reports the same exit codes")
{
  const auto noy = write_temp("noy2.csv", "x\n1\n");
  const std::string cmd = std::string(HONESTRD_TOOL) + " analyze " + noy + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  CHECK(WEXITSTATUS(status) == cli::exit_parse);
}

TEST_CASE("lower-bound on noise-free linear data")
{
  std::ostringstream os;
  os << "x,y,sigma2\n";
  for (int i = 0; i < 400; ++i) {
    const double x = -1.0 + (2.0 * i + 1.0) / 400;
    os << x << ',' << (x >= 0 ? 1 + 2 * x : 0.5 * x) << ",0.01\n";
  }
  const auto path = write_temp("linear.csv", os.str());
  auto r = run_cli({"lower-bound", path, "--obs-per-interval", "50"});
  REQUIRE(r.code == 0);
  auto j = json::parse(r.out);
  CHECK(j["plus"]["mu_0.5"].get<double>() == 0.0);
  CHECK(j["minus"]["mu_0.5"].get<double>() == 0.0);

  auto few = run_cli({"lower-bound", path});
  CHECK(few.code == cli::exit_domain);
}

TEST_CASE("lower-bound on a low-noise quadratic")
{
  std::ostringstream os;
  os << "x,y\n";
  unsigned long long s = 12345;
  for (int i = 0; i < 2000; ++i) {
    const double x = -1.0 + (2.0 * i + 1.0) / 2000;
    s = s * 6364136223846793005ULL + 1442695040888963407ULL;
    const double noise = ((s >> 11) * 0x1.0p-53 - 0.5) * 1e-4;
    os << x << ',' << 0.02 * x * x + noise << '\n';
  }
  const auto path = write_temp("quad.csv", os.str());
  auto r = run_cli({"lower-bound", path});
  REQUIRE(r.code == 0);
  const double mu = json::parse(r.out)["plus"]["mu_0.5"].get<double>();
  CHECK(mu > 0.0);
  CHECK(mu <= 0.02);
}

TEST_CASE("simulate is reproducible")
{
  std::vector<std::string> args{"simulate", "--design", "1", "--reps", "3", "--n", "100",
                                "--seed", "7", "--format", "csv"};
  auto a = run_cli(args);
  auto b = run_cli(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  args.push_back("--threads");
  args.push_back("2");
  CHECK(run_cli(args).out == a.out);

  auto one = run_cli({"simulate", "--reps", "1", "--n", "100", "--format", "csv"});
  auto rows = csv_rows(one.out);
  const double cov = to_double(rows[1][9]);
  CHECK_UNARY(cov == 0.0 || cov == 1.0);
}
