#include "cli.hpp"

#include "honestrd/bias_variance.hpp"
#include "honestrd/ci.hpp"
#include "honestrd/lower_bound.hpp"
#include "honestrd/modulus.hpp"
#include "honestrd/simulation.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

namespace honestrd::cli {

using nlohmann::json;

namespace {

std::string trim(std::string s)
{
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep)
{
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep))
    out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep)
    out.emplace_back();
  return out;
}

Error parse_error(const std::string& what)
{
  return Error(ErrorKind::ParseError, "cli", what);
}

double parse_double(const std::string& s, const std::string& where)
{
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+')
    ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || s.empty())
    throw parse_error(where + ": cannot parse '" + s + "' as a number");
  return v;
}

json num(double v)
{
  if (std::isfinite(v))
    return v;
  return nullptr;
}

struct GridSpec
{
  double lo = 0.0, hi = 0.0;
  int k = 0;
};

GridSpec parse_grid(const std::string& s, const std::string& flag)
{
  const auto parts = split(s, ':');
  if (parts.size() != 3)
    throw parse_error(flag + " expects lo:hi:k");
  GridSpec g;
  g.lo = parse_double(parts[0], flag);
  g.hi = parse_double(parts[1], flag);
  const double k = parse_double(parts[2], flag);
  if (k != std::floor(k) || k < 2)
    throw parse_error(flag + ": grid size must be an integer >= 2");
  g.k = static_cast<int>(k);
  if (!(g.lo <= g.hi))
    throw parse_error(flag + ": need lo <= hi");
  return g;
}

// log spacing when lo > 0, linear otherwise
std::vector<double> expand(const GridSpec& g)
{
  std::vector<double> v(g.k);
  for (int i = 0; i < g.k; ++i) {
    const double t = static_cast<double>(i) / (g.k - 1);
    v[i] = g.lo > 0.0 ? std::exp(std::log(g.lo) + t * (std::log(g.hi) - std::log(g.lo)))
                      : g.lo + t * (g.hi - g.lo);
  }
  v.front() = g.lo;
  v.back() = g.hi;
  return v;
}

CriterionKind parse_criterion(const std::string& s)
{
  if (s == "flci")
    return CriterionKind::flci_length;
  if (s == "excess")
    return CriterionKind::excess_length_quantile;
  if (s == "mse")
    return CriterionKind::worst_case_mse;
  throw parse_error("unknown criterion '" + s + "'");
}

struct Common
{
  std::string input;
  std::string family = "taylor";
  int p = 2;
  double C = 0.0;
  std::string c_grid;
  double alpha = 0.05;
  double beta = 0.8;
  std::string criterion = "flci";
  std::string weights = "lp:triangular";
  std::string variance;
  std::uint64_t seed = 1;
  std::string format = "json";
  std::string out;
  double cutoff = 0.0;
};

void add_class_flags(CLI::App* app, Common& c)
{
  app->add_option("--class", c.family, "smoothness class")
    ->check(CLI::IsMember({"taylor", "holder"}));
  app->add_option("--p", c.p, "order of the Taylor class")->check(CLI::PositiveNumber);
  app->add_option("--C", c.C, "smoothness constant")->check(CLI::NonNegativeNumber);
}

void add_output_flags(CLI::App* app, Common& c)
{
  app->add_option("--format", c.format, "output format")->check(CLI::IsMember({"json", "csv"}));
  app->add_option("--out", c.out, "output file (default stdout)");
}

SmoothnessClass make_class(const Common& c, double C)
{
  if (c.family == "holder") {
    if (c.p != 2)
      throw Error(ErrorKind::DomainError, "cli", "the holder class requires --p 2");
    return SmoothnessClass::holder(C);
  }
  return SmoothnessClass::taylor(c.p, C);
}

PerformanceCriterion make_criterion(const Common& c)
{
  PerformanceCriterion pc{parse_criterion(c.criterion), c.alpha, c.beta};
  pc.validate();
  return pc;
}

Design load(const Common& c, bool& has_sigma2)
{
  std::ifstream in(c.input);
  if (!in)
    throw std::runtime_error("cannot open input '" + c.input + "'");
  Design d = parse_csv(in, has_sigma2);
  for (auto& x : d.x)
    x -= c.cutoff;
  return d;
}

VarianceSpec variance_for(const Common& c, bool has_sigma2)
{
  if (c.variance.empty())
    return has_sigma2 ? VarianceSpec{} : VarianceSpec::parse("nn:3");
  const auto v = VarianceSpec::parse(c.variance);
  if (v.mode == VarianceMode::known && !has_sigma2)
    throw parse_error("--variance known needs a sigma2 column");
  return v;
}

json report_json(const EstimateReport& r, const json& echo)
{
  json j;
  j["estimate"] = num(r.estimate);
  j["maxbias"] = num(r.maxbias);
  j["sd"] = num(r.sd);
  j["ci"] = {{"lower", num(r.ci_lower)},
             {"upper", num(r.ci_upper)},
             {"onesided_lower", num(r.onesided_lower)},
             {"onesided_upper", num(r.onesided_upper)}};
  j["h_plus"] = num(r.h_plus);
  j["h_minus"] = num(r.h_minus);
  j["criterion"] = {{"kind", to_string(r.criterion_kind)}, {"value", num(r.criterion_value)}};
  j["config_echo"] = echo;
  return j;
}

const std::vector<std::string> report_columns = {
  "C",  "estimate", "maxbias", "sd",         "ci_lower",       "ci_upper",       "onesided_lower",
  "onesided_upper", "h_plus",  "h_minus",    "criterion_kind", "criterion_value"};

std::string report_csv_row(double C, const EstimateReport& r)
{
  std::ostringstream os;
  os << format_number(C) << ',' << format_number(r.estimate) << ',' << format_number(r.maxbias)
     << ',' << format_number(r.sd) << ',' << format_number(r.ci_lower) << ','
     << format_number(r.ci_upper) << ',' << format_number(r.onesided_lower) << ','
     << format_number(r.onesided_upper) << ',' << format_number(r.h_plus) << ','
     << format_number(r.h_minus) << ',' << to_string(r.criterion_kind) << ','
     << format_number(r.criterion_value);
  return os.str();
}

std::string join(const std::vector<std::string>& v)
{
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i)
    s += (i ? "," : "") + v[i];
  return s;
}

void emit(const Common& c, const std::string& text, std::ostream& out)
{
  if (c.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(c.out);
  if (!f)
    throw std::runtime_error("cannot write '" + c.out + "'");
  f << text;
}

std::string cmd_analyze(const Common& c)
{
  bool has_sigma2 = false;
  const Design d = load(c, has_sigma2);
  const auto crit = make_criterion(c);
  const auto spec = WeightSpec::parse(c.weights);
  const auto var = variance_for(c, has_sigma2);

  std::vector<double> Cs{c.C};
  if (!c.c_grid.empty())
    Cs = expand(parse_grid(c.c_grid, "--C-grid"));

  json echo = {{"command", "analyze"},     {"input", c.input},       {"class", c.family},
               {"p", c.p},                 {"alpha", c.alpha},       {"beta", c.beta},
               {"criterion", c.criterion}, {"weights", spec.name()}, {"variance", var.name()},
               {"cutoff", c.cutoff},       {"n", d.size()}};
  json rows = json::array();
  std::string csv = join(report_columns) + "\n";
  for (double C : Cs) {
    const auto r = analyze(d, make_class(c, C), crit, spec, var);
    json e = echo;
    e["C"] = C;
    rows.push_back(report_json(r, e));
    csv += report_csv_row(C, r) + "\n";
  }
  if (c.format == "csv")
    return csv;
  return (c.c_grid.empty() ? rows[0] : rows).dump(2) + "\n";
}

std::string cmd_lower_bound(const Common& c, int per_interval)
{
  bool has_sigma2 = false;
  Design d = validate_design(load(c, has_sigma2));
  const auto var = variance_for(c, has_sigma2);
  if (var.mode == VarianceMode::nearest_neighbor)
    d.sigma2 = nn_residual_variance(d, var.neighbors);
  else if (var.mode == VarianceMode::ehw)
    throw Error(ErrorKind::DomainError, "cli", "lower-bound supports known or nn:J variance");

  json out = json::object();
  std::string csv = "side,Z,tau,lambda,n1,n2,n3,mu_0.5,mu_alpha,alpha\n";
  for (const Side side : {Side::plus, Side::minus}) {
    const auto scheme = default_scheme(d, side, per_interval);
    const auto st = curvature_stat(d, scheme);
    const double med = lower_ci_C(st, 0.5);
    const double lo = lower_ci_C(st, c.alpha);
    const char* name = side == Side::plus ? "plus" : "minus";
    out[name] = {{"Z", num(st.Z)},
                 {"tau", num(st.tau)},
                 {"lambda", num(st.lambda)},
                 {"n", {st.n1, st.n2, st.n3}},
                 {"endpoints", {scheme.a0, scheme.a1, scheme.a2, scheme.a3}},
                 {"mu_0.5", num(med)},
                 {"mu_alpha", num(lo)}};
    csv += std::string(name) + ',' + format_number(st.Z) + ',' + format_number(st.tau) + ',' +
           format_number(st.lambda) + ',' + std::to_string(st.n1) + ',' + std::to_string(st.n2) +
           ',' + std::to_string(st.n3) + ',' + format_number(med) + ',' + format_number(lo) +
           ',' + format_number(c.alpha) + "\n";
  }
  out["config_echo"] = {{"command", "lower-bound"}, {"input", c.input},
                        {"alpha", c.alpha},         {"variance", var.name()},
                        {"obs_per_interval", per_interval}, {"cutoff", c.cutoff}};
  return c.format == "csv" ? csv : out.dump(2) + "\n";
}

std::string cmd_efficiency(const Common& c, const std::string& r_grid)
{
  json out = json::object();
  std::string csv;
  if (!c.input.empty()) {
    bool has_sigma2 = false;
    const Design d = validate_design(load(c, has_sigma2));
    const auto cls = make_class(c, c.C);
    if (cls.family != ClassFamily::taylor)
      throw Error(ErrorKind::DomainError, "cli", "finite-sample ratios need the taylor class");
    const double one = onesided_adaptation_efficiency(d, cls, c.alpha, c.beta);
    const double two = flci_adaptation_efficiency(d, cls, c.alpha);
    out["finite_sample"] = {{"onesided", num(one)}, {"flci", num(two)}};
    csv = "kind,onesided,flci\nfinite_sample," + format_number(one) + ',' + format_number(two) +
          "\n";
  } else {
    const auto rs = expand(parse_grid(r_grid, "--r-grid"));
    json rows = json::array();
    csv = "r,onesided,flci\n";
    for (double r : rs) {
      const auto e = asymptotic_efficiencies(r, c.alpha, c.beta);
      rows.push_back({{"r", r}, {"onesided", num(e.onesided)}, {"flci", num(e.flci)}});
      csv += format_number(r) + ',' + format_number(e.onesided) + ',' + format_number(e.flci) +
             "\n";
    }
    out["asymptotic"] = rows;
  }
  out["config_echo"] = {{"command", "efficiency"}, {"alpha", c.alpha}, {"beta", c.beta},
                        {"input", c.input},        {"p", c.p},         {"C", c.C}};
  return c.format == "csv" ? csv : out.dump(2) + "\n";
}

struct SimOptions
{
  int design = 4;
  double c_ci = -1.0;
  double sigma2 = 0.1295;
  int n = 500;
  int reps = 1000;
  int threads = 1;
  std::string form = "flci";
};

std::string cmd_simulate(const Common& c, const SimOptions& s)
{
  McDesign mc;
  mc.f = benchmark_function(s.design, c.C);
  mc.sigma2 = s.sigma2;
  mc.n = s.n;
  mc.reps = s.reps;
  mc.seed = c.seed;
  if (!(s.sigma2 > 0.0) || s.n < 8)
    throw Error(ErrorKind::DomainError, "cli", "need sigma2 > 0 and n >= 8");
  McMethod m;
  const double c_ci = s.c_ci >= 0.0 ? s.c_ci : c.C;
  Common cc = c;
  if (c.family.empty())
    cc.family = "holder";
  m.cls = make_class(cc, c_ci);
  m.crit = make_criterion(c);
  m.weights = WeightSpec::parse(c.weights);
  m.variance = c.variance.empty() ? VarianceSpec::parse("nn:3") : VarianceSpec::parse(c.variance);
  m.form = s.form == "onesided" ? CiForm::onesided_lower : CiForm::flci;
  const auto r = run_mc(mc, m, s.threads);

  if (c.format == "csv") {
    std::ostringstream os;
    os << "design,C_data,C_ci,class,sigma2,n,reps,seed,form,coverage,mean_bias,mean_length,"
          "mc_standard_error\n"
       << s.design << ',' << format_number(c.C) << ',' << format_number(c_ci) << ','
       << cc.family << ',' << format_number(s.sigma2) << ',' << s.n << ',' << s.reps << ','
       << c.seed << ',' << s.form << ',' << format_number(r.coverage) << ','
       << format_number(r.mean_bias) << ',' << format_number(r.mean_length) << ','
       << format_number(r.mc_standard_error) << "\n";
    return os.str();
  }
  json j = {{"design", s.design},
            {"C_data", c.C},
            {"C_ci", c_ci},
            {"class", cc.family},
            {"sigma2", s.sigma2},
            {"n", s.n},
            {"reps", s.reps},
            {"seed", c.seed},
            {"form", s.form},
            {"coverage", num(r.coverage)},
            {"mean_bias", num(r.mean_bias)},
            {"mean_length", num(r.mean_length)},
            {"mc_standard_error", num(r.mc_standard_error)}};
  return j.dump(2) + "\n";
}

} // namespace

Design parse_csv(std::istream& in, bool& has_sigma2)
{
  std::string line;
  int lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0)
      line.erase(0, 3);
    if (!trim(line).empty()) {
      header = split(trim(line), ',');
      break;
    }
  }
  if (header.empty())
    throw parse_error("line 1: missing header");
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (col.count(header[i]))
      throw parse_error("line " + std::to_string(lineno) + ": duplicate column '" + header[i] + "'");
    col[header[i]] = i;
  }
  for (const char* need : {"x", "y"})
    if (!col.count(need))
      throw parse_error("line " + std::to_string(lineno) + ": missing column '" + need + "'");
  has_sigma2 = col.count("sigma2") > 0;

  Design d;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty())
      continue;
    const auto f = split(trim(line), ',');
    if (f.size() != header.size())
      throw parse_error("line " + std::to_string(lineno) + ": expected " +
                        std::to_string(header.size()) + " fields, found " +
                        std::to_string(f.size()));
    const std::string where = "line " + std::to_string(lineno);
    d.x.push_back(parse_double(f[col["x"]], where + ", column x"));
    d.y.push_back(parse_double(f[col["y"]], where + ", column y"));
    d.sigma2.push_back(has_sigma2 ? parse_double(f[col["sigma2"]], where + ", column sigma2")
                                  : 1.0);
  }
  return d;
}

std::string format_number(double v)
{
  if (std::isnan(v))
    return "nan";
  if (std::isinf(v))
    return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

int exit_code_for(ErrorKind kind)
{
  switch (kind) {
    case ErrorKind::ParseError: return exit_parse;
    case ErrorKind::NoConvergence:
    case ErrorKind::OptimizationFailed:
    case ErrorKind::SingularMomentMatrix:
    case ErrorKind::DegenerateWeights:
    case ErrorKind::DegenerateDenominator:
    case ErrorKind::InfiniteBias: return exit_numeric;
    default: return exit_domain;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  CLI::App app{"Honest confidence intervals for sharp regression discontinuity designs",
               "honestrd"};
  app.require_subcommand(1);
  Common c;
  SimOptions s;
  int per_interval = 100;
  std::string r_grid = "0.5:1:26";

  auto* an = app.add_subcommand("analyze", "estimate and CIs from a CSV file");
  an->add_option("input", c.input, "CSV with columns x,y[,sigma2]")->required();
  add_class_flags(an, c);
  an->add_option("--C-grid", c.c_grid, "sweep C over lo:hi:k");
  an->add_option("--alpha", c.alpha);
  an->add_option("--beta", c.beta);
  an->add_option("--criterion", c.criterion)->check(CLI::IsMember({"flci", "excess", "mse"}));
  an->add_option("--weights", c.weights, "lp:<kernel> or optimal");
  an->add_option("--variance", c.variance, "known, nn:J or ehw");
  an->add_option("--cutoff", c.cutoff, "subtracted from x");
  add_output_flags(an, c);

  auto* lb = app.add_subcommand("lower-bound", "data-driven lower bound on C");
  lb->add_option("input", c.input)->required();
  lb->add_option("--alpha", c.alpha);
  lb->add_option("--variance", c.variance, "known or nn:J");
  lb->add_option("--obs-per-interval", per_interval)->check(CLI::Range(2, 1 << 30));
  lb->add_option("--cutoff", c.cutoff);
  add_output_flags(lb, c);

  auto* ef = app.add_subcommand("efficiency", "adaptation efficiency bounds");
  ef->add_option("input", c.input, "optional design CSV for finite-sample ratios");
  ef->add_option("--r-grid", r_grid, "rate grid lo:hi:k");
  ef->add_option("--alpha", c.alpha);
  ef->add_option("--beta", c.beta);
  ef->add_option("--p", c.p)->check(CLI::PositiveNumber);
  ef->add_option("--C", c.C)->check(CLI::NonNegativeNumber);
  ef->add_option("--cutoff", c.cutoff);
  add_output_flags(ef, c);

  auto* sm = app.add_subcommand("simulate", "Monte Carlo coverage of the benchmark designs");
  sm->add_option("--design", s.design)->check(CLI::Range(1, 4));
  sm->add_option("--class", c.family)->check(CLI::IsMember({"taylor", "holder"}));
  sm->add_option("--p", c.p)->check(CLI::PositiveNumber);
  sm->add_option("--C", c.C, "smoothness of the simulated function")->check(CLI::NonNegativeNumber);
  sm->add_option("--C-ci", s.c_ci, "C assumed by the interval (default --C)");
  sm->add_option("--sigma2", s.sigma2);
  sm->add_option("--n", s.n);
  sm->add_option("--reps", s.reps)->check(CLI::PositiveNumber);
  sm->add_option("--seed", c.seed);
  sm->add_option("--threads", s.threads)->check(CLI::PositiveNumber);
  sm->add_option("--alpha", c.alpha);
  sm->add_option("--beta", c.beta);
  sm->add_option("--criterion", c.criterion)->check(CLI::IsMember({"flci", "excess", "mse"}));
  sm->add_option("--weights", c.weights);
  sm->add_option("--variance", c.variance);
  sm->add_option("--form", s.form)->check(CLI::IsMember({"flci", "onesided"}));
  add_output_flags(sm, c);

  std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return exit_parse;
  }

  try {
    std::string text;
    if (an->parsed())
      text = cmd_analyze(c);
    else if (lb->parsed())
      text = cmd_lower_bound(c, per_interval);
    else if (ef->parsed())
      text = cmd_efficiency(c, r_grid);
    else {
      if (sm->count("--class") == 0)
        c.family = "holder";
      if (sm->count("--C") == 0)
        c.C = 1.0;
      text = cmd_simulate(c, s);
    }
    emit(c, text, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_io;
  }
  return exit_ok;
}

} // namespace honestrd::cli
