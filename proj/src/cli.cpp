#include "hkcalc/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "hkcalc/calculus.hpp"
#include "hkcalc/cauchy.hpp"
#include "hkcalc/errors.hpp"
#include "hkcalc/mapping.hpp"
#include "hkcalc/spectral.hpp"
#include "hkcalc/unbounded.hpp"
#include "hkcalc/verify.hpp"

namespace hkcalc::cli {

using nlohmann::json;

std::string format_number(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

namespace {

double to_double(const std::string& s) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, v);
  if (r.ec != std::errc{} || r.ptr != end) throw ArgumentError("not a number: '" + s + "'");
  return v;
}

std::vector<double> number_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(to_double(item));
  return out;
}

std::pair<std::string, std::string> split_kind(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) return {s, ""};
  return {s.substr(0, colon), s.substr(colon + 1)};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---- function specifications ----

Complex complex_of(const json& v) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2) return {v[0].get<double>(), v[1].get<double>()};
  throw ArgumentError("expected a number or [re, im], got " + v.dump());
}

PieceEval family(const json& spec) {
  const std::string kind = spec.at("kind").get<std::string>();
  if (kind == "const" || kind == "constant") {
    const Complex c = complex_of(spec.at("value"));
    return [c](double) { return c; };
  }
  if (kind == "identity") return [](double x) { return Complex{x, 0.0}; };
  if (kind == "poly") {
    std::vector<Complex> c;
    for (const auto& v : spec.at("coeffs")) c.push_back(complex_of(v));
    return [c](double x) {
      Complex acc{};
      for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
      return acc;
    };
  }
  if (kind == "sin") {
    const double amp = spec.value("amp", 1.0), freq = spec.value("freq", 1.0), phase = spec.value("phase", 0.0);
    return [=](double x) { return Complex{amp * std::sin(freq * x + phase), 0.0}; };
  }
  if (kind == "exp") {
    const double scale = spec.value("scale", 1.0), rate = spec.value("rate", 1.0);
    return [=](double x) { return Complex{scale * std::exp(rate * x), 0.0}; };
  }
  throw ArgumentError("unknown piece family '" + kind + "'");
}

RegulatedFn from_json(const json& spec, Domain k) {
  if (!spec.is_object()) throw ArgumentError("function specification must be an object");
  if (spec.contains("domain")) {
    const auto& d = spec.at("domain");
    k = Domain::make(d.at(0).get<double>(), d.at(1).get<double>());
  }
  const std::string kind = spec.at("kind").get<std::string>();
  RegulatedFn f = [&] {
    if (kind == "identity") return RegulatedFn::identity(k);
    if (kind == "constant" || kind == "const") return RegulatedFn::constant(k, complex_of(spec.at("value")));
    if (kind == "heaviside") return RegulatedFn::heaviside(spec.at("at").get<double>(), k);
    if (kind == "indicator") {
      const auto closed = spec.value("closed", std::vector<bool>{true, true});
      if (closed.size() != 2) throw ArgumentError("indicator: closed must have two entries");
      const double lo = spec.at("lo").get<double>(), hi = spec.value("hi", lo);
      return RegulatedFn::indicator(Cell::make(lo, hi, closed[0], closed[1]), k);
    }
    if (kind == "thomae") {
      const auto& level = spec.at("level");
      std::size_t n;
      if (level.is_string() && level.get<std::string>() == "inf") n = kUnboundedLevel;
      else if (level.is_number_unsigned() && level.get<std::size_t>() >= 1) n = level.get<std::size_t>();
      else throw ArgumentError("thomae: level must be a positive integer or \"inf\"");
      return spec.contains("domain") ? RegulatedFn::thomae(n, k) : RegulatedFn::thomae(n);
    }
    if (kind == "step") {
      const auto cuts = spec.value("cuts", std::vector<double>{});
      const auto& values = spec.at("values");
      if (values.size() != cuts.size() + 1) throw ArgumentError("step: need one value per cell (cuts + 1)");
      std::vector<Cell> cells;
      std::vector<Complex> vals;
      double lo = k.lo;
      for (std::size_t i = 0; i < cuts.size(); ++i) {
        cells.push_back(Cell::make(lo, cuts[i], true, false));
        vals.push_back(complex_of(values[i]));
        lo = cuts[i];
      }
      cells.push_back(Cell::closed(lo, k.hi));
      vals.push_back(complex_of(values.back()));
      StepFn s = StepFn::make(std::move(cells), std::move(vals));
      if (spec.contains("singletons")) {
        std::vector<std::pair<double, Complex>> pts;
        for (const auto& p : spec.at("singletons")) pts.emplace_back(p.at("at").get<double>(), complex_of(p.at("value")));
        s = s.with_singletons(pts);
      }
      return RegulatedFn::step(std::move(s));
    }
    if (kind == "piecewise") {
      PiecewiseSpec ps;
      ps.k = k;
      const auto breaks = spec.value("breaks", std::vector<double>{});
      for (const auto& p : spec.at("pieces")) ps.pieces.push_back(family(p));
      if (ps.pieces.size() != breaks.size() + 1) throw ArgumentError("piecewise: need breaks + 1 pieces");
      for (std::size_t i = 0; i < breaks.size(); ++i) {
        BreakSpec b{breaks[i], std::nullopt, std::nullopt, ps.pieces[i + 1](breaks[i])};
        if (spec.contains("values")) b.value = complex_of(spec.at("values").at(i));
        ps.breaks.push_back(b);
      }
      return RegulatedFn::piecewise(std::move(ps));
    }
    return RegulatedFn::continuous(k, family(spec), kind);
  }();
  if (spec.contains("atoms")) {
    std::vector<Atom> atoms;
    for (const auto& a : spec.at("atoms")) atoms.push_back({a.at("at").get<double>(), complex_of(a.at("value"))});
    f = RegulatedFn::perturbed(std::move(f), std::move(atoms));
  }
  return f;
}

json short_form(const std::string& s) {
  const auto [kind, arg] = split_kind(s);
  const auto nums = [&] { return number_list(arg); };
  const auto need = [&](std::size_t n) {
    auto v = nums();
    if (v.size() != n) throw ArgumentError("'" + s + "': expected " + std::to_string(n) + " argument(s)");
    return v;
  };
  if (kind == "identity") return {{"kind", "identity"}};
  if (kind == "constant" || kind == "const") return {{"kind", "constant"}, {"value", need(1)[0]}};
  if (kind == "heaviside") return {{"kind", "heaviside"}, {"at", need(1)[0]}};
  if (kind == "indicator") {
    const auto v = need(2);
    return {{"kind", "indicator"}, {"lo", v[0]}, {"hi", v[1]}};
  }
  if (kind == "point") return {{"kind", "indicator"}, {"lo", need(1)[0]}};
  if (kind == "thomae") {
    if (arg == "inf") return {{"kind", "thomae"}, {"level", "inf"}};
    const double n = need(1)[0];
    if (!(n >= 1.0) || n != std::floor(n)) throw ArgumentError("thomae: level must be a positive integer");
    return {{"kind", "thomae"}, {"level", static_cast<std::size_t>(n)}};
  }
  if (kind == "sin") return {{"kind", "sin"}, {"freq", need(1)[0]}};
  if (kind == "exp") return {{"kind", "exp"}, {"rate", need(1)[0]}};
  if (kind == "poly") return {{"kind", "poly"}, {"coeffs", nums()}};
  throw ArgumentError("unknown function '" + s + "'");
}

json function_json(const std::string& spec) {
  if (!spec.empty() && spec.front() == '{') return json::parse(spec);
  if (spec.size() > 5 && spec.ends_with(".json")) return json::parse(read_file(spec));
  return short_form(spec);
}

RegulatedFn function_from(const json& spec, Domain k) {
  return spec.is_string() ? from_json(function_json(spec.get<std::string>()), k) : from_json(spec, k);
}

// ---- output ----

void emit(const CommandPlan& plan, std::ostream& out, const std::string& text) {
  if (plan.out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(plan.out_path, std::ios::binary);
  if (!f) throw ArgumentError("cannot write '" + plan.out_path + "'");
  f << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string complex_cell(Complex z) {
  if (z.imag() == 0.0) return format_number(z.real());
  const std::string im = format_number(z.imag());
  return format_number(z.real()) + (im.front() == '-' ? "" : "+") + im + "i";
}

json points_json(const std::vector<Complex>& pts) {
  json a = json::array();
  for (const auto& z : pts) a.push_back({z.real(), z.imag()});
  return a;
}

// ---- shared model helpers ----

Domain padded_hull(const SpectralMeasure& e) {
  const Domain h = e.hull();
  return Domain::make(h.lo - 1.0, h.hi + 1.0);
}

struct Continuum {
  Domain k;
  std::size_t samples;
};

Continuum parse_continuum(const std::string& model) {
  const auto [kind, arg] = split_kind(model);
  if (kind != "continuum") throw ArgumentError("expected continuum:a,b[,samples], got '" + model + "'");
  const auto v = number_list(arg);
  if (v.size() != 2 && v.size() != 3) throw ArgumentError("continuum model needs a,b[,samples]");
  std::size_t samples = 1000;
  if (v.size() == 3) {
    if (!(v[2] >= 2.0) || v[2] != std::floor(v[2])) throw ArgumentError("continuum samples must be an integer >= 2");
    samples = static_cast<std::size_t>(v[2]);
  }
  return {Domain::make(v[0], v[1]), samples};
}

// ---- subcommands ----

int run_apply(const CommandPlan& plan, std::ostream& out) {
  const auto a = SymOperator::load_csv(plan.matrix_path);
  const auto e = pvm_of(a);
  const auto f = parse_function(plan.fn, padded_hull(e));
  const ComplexMatrix m = apply_calculus(f, e, plan.eps);
  if (plan.format == "csv") {
    std::string text;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      for (std::size_t j = 0; j < m.cols(); ++j) text += (j ? "," : "") + complex_cell(m(i, j));
      text += "\n";
    }
    emit(plan, out, text);
  } else {
    json re = json::array(), im = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
      json r = json::array(), c = json::array();
      for (std::size_t j = 0; j < m.cols(); ++j) {
        r.push_back(m(i, j).real());
        c.push_back(m(i, j).imag());
      }
      re.push_back(r);
      im.push_back(c);
    }
    emit(plan, out, dump({{"function", f.describe()}, {"re", re}, {"im", im}}));
  }
  return 0;
}

int run_spectrum_map(const CommandPlan& plan, std::ostream& out) {
  SpectrumApprox s;
  if (plan.model == "finite") {
    if (plan.matrix_path.empty()) throw ArgumentError("the finite model needs --matrix");
    const auto e = pvm_of(SymOperator::load_csv(plan.matrix_path));
    s = spectral_map(parse_function(plan.fn, padded_hull(e)), e, SpectrumModel::finite());
  } else {
    const auto c = parse_continuum(plan.model);
    const auto e = grid_model(c.k.lo, c.k.hi, plan.grid);
    s = spectral_map(parse_function(plan.fn, c.k), e, SpectrumModel::continuum(c.k, c.samples));
  }
  if (plan.format == "csv") {
    std::string text = "re,im\n";
    for (const auto& z : s.points) text += format_number(z.real()) + "," + format_number(z.imag()) + "\n";
    emit(plan, out, text);
  } else {
    emit(plan, out,
         dump({{"points", points_json(s.points)}, {"resolution", s.resolution}, {"closure_note", s.closure_note}}));
  }
  return 0;
}

std::vector<double> thomae_demo_values() {
  std::vector<double> values;
  for (int q = 2; q <= 8; ++q)
    for (int p = 1; p < q; ++p)
      if (std::gcd(p, q) == 1) values.push_back(static_cast<double>(p) / q);
  values.push_back(1.0 / std::sqrt(2.0));
  std::sort(values.begin(), values.end());
  return values;
}

int run_thomae_demo(const CommandPlan& plan, std::ostream& out) {
  std::vector<std::size_t> levels = plan.levels;
  if (levels.empty())
    for (std::size_t n = 1; n <= 6; ++n) levels.push_back(n);
  const std::size_t top = *std::max_element(levels.begin(), levels.end());
  const auto e = plan.matrix_path.empty() ? diagonal_pvm(thomae_demo_values())
                                          : pvm_of(SymOperator::load_csv(plan.matrix_path));
  const ComplexMatrix ref = apply_calculus(RegulatedFn::thomae(top), e, plan.eps);
  json table = json::array();
  std::string csv = "level,gap,bound\n";
  for (std::size_t n : levels) {
    const double gap = operator_norm(apply_calculus(RegulatedFn::thomae(n), e, plan.eps) - ref);
    const double bound = 1.0 / static_cast<double>(n + 1);
    table.push_back({{"level", n}, {"gap", gap}, {"bound", bound}});
    csv += std::to_string(n) + "," + format_number(gap) + "," + format_number(bound) + "\n";
  }

  const auto t = RegulatedFn::thomae(top);
  const Domain k = t.domain();
  std::vector<double> xs = t.breakpoints(top);
  for (std::size_t i = 0; i <= 1000; ++i) xs.push_back(k.lo + (k.hi - k.lo) * static_cast<double>(i) / 1000.0);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  json samples = json::array();
  std::string samples_csv = "x,value\n";
  for (double x : xs) {
    const double v = t.eval(x).real();
    samples.push_back({x, v});
    samples_csv += format_number(x) + "," + format_number(v) + "\n";
  }
  if (!plan.samples_path.empty()) {
    std::ofstream f(plan.samples_path, std::ios::binary);
    if (!f) throw ArgumentError("cannot write '" + plan.samples_path + "'");
    f << samples_csv;
  }
  if (plan.format == "csv") emit(plan, out, csv);
  else emit(plan, out, dump({{"reference_level", top}, {"table", table}, {"samples", samples}}));
  return 0;
}

int run_mult_norm(const CommandPlan& plan, std::ostream& out) {
  const auto c = parse_continuum(plan.model);
  const auto e = grid_model(c.k.lo, c.k.hi, plan.grid);
  const auto f = parse_function(plan.fn, c.k);
  const double op = operator_norm(apply_calculus(f, e, plan.eps), e.weight());
  double nodes = 0.0;
  for (double x : e.grid_model().nodes) nodes = std::max(nodes, std::abs(f.eval(x)));
  const double sup = sup_norm(f);
  if (plan.format == "csv")
    emit(plan, out,
         "op_norm,sup_norm_nodes,sup_norm\n" + format_number(op) + "," + format_number(nodes) + "," +
             format_number(sup) + "\n");
  else
    emit(plan, out, dump({{"op_norm", op}, {"sup_norm_nodes", nodes}, {"sup_norm", sup}}));
  return 0;
}

UnboundedModel unbounded_model(const std::string& spec) {
  const auto [kind, arg] = split_kind(spec);
  if (kind == "geometric") {
    const double q = to_double(arg);
    if (!(q > 0.0 && q < 1.0)) throw ArgumentError("geometric ratio must lie in (0, 1)");
    return UnboundedModel::atomic(
        [q](std::size_t k) -> std::optional<std::pair<double, double>> {
          return std::pair{static_cast<double>(k + 1), std::pow(q, static_cast<double>(k + 1))};
        },
        spec);
  }
  if (kind == "atomic") {
    std::ifstream in(arg);
    if (!in) throw ArgumentError("cannot open '" + arg + "'");
    return UnboundedModel::atomic_csv(in);
  }
  if (kind == "density") {
    const auto [shape, param] = split_kind(arg);
    const double p = to_double(param);
    if (shape == "power") {
      if (!(p > 0.0)) throw ArgumentError("density power must be positive");
      return UnboundedModel::density([p](double x) { return std::pow(1.0 + x * x, -p); }, {}, spec);
    }
    if (shape == "gauss") {
      if (!(p > 0.0)) throw ArgumentError("gauss width must be positive");
      return UnboundedModel::density(
          [p](double x) { return std::exp(-0.5 * x * x / (p * p)) / (p * std::sqrt(2.0 * M_PI)); }, {}, spec);
    }
  }
  throw ArgumentError("unknown unbounded model '" + spec + "'");
}

ComplexFn unbounded_function(const std::string& spec) {
  const auto [kind, arg] = split_kind(spec);
  if (kind == "identity") return [](double x) { return Complex{x, 0.0}; };
  if (kind == "abs") return [](double x) { return Complex{std::abs(x), 0.0}; };
  if (kind == "power") {
    const double p = to_double(arg);
    return [p](double x) { return Complex{std::pow(std::abs(x), p), 0.0}; };
  }
  if (kind == "constant" || kind == "const") {
    const double c = to_double(arg);
    return [c](double) { return Complex{c, 0.0}; };
  }
  throw ArgumentError("unknown unbounded function '" + spec + "'");
}

int run_domain_test(const CommandPlan& plan, std::ostream& out) {
  const auto v = domain_member(unbounded_function(plan.fn), unbounded_model(plan.model), plan.eps);
  if (plan.format == "csv") {
    std::string text = "radius,partial_sum\n";
    for (std::size_t i = 0; i < v.radii.size(); ++i)
      text += format_number(v.radii[i]) + "," + format_number(v.partial_sums[i]) + "\n";
    emit(plan, out, text);
  } else {
    emit(plan, out,
         dump({{"member", v.member},
               {"value", v.value},
               {"bound_used", v.bound_used},
               {"radii", v.radii},
               {"partial_sums", v.partial_sums}}));
  }
  return 0;
}

int run_cauchy(const CommandPlan& plan, std::ostream& out) {
  const json cfg = json::parse(read_file(plan.config_path));
  const auto& iv = cfg.at("interval");
  const Domain k = Domain::make(iv.at(0).get<double>(), iv.at(1).get<double>());
  const auto s = make_semigroup(function_from(cfg.at("g"), k), cfg.at("grid").get<std::size_t>(),
                                cfg.value("perturbation", std::vector<double>{}));
  const auto& dj = cfg.at("datum");
  const double horizon = dj.at("horizon").get<double>();
  const auto x0f = function_from(dj.at("x0"), k);
  const auto& fj = dj.at("forcing");
  const auto time = function_from(fj.at("time"), Domain::make(0.0, horizon));
  const auto space = function_from(fj.at("space"), k);
  const auto& nodes = s.nodes();
  RealVector x0(nodes.size()), profile(nodes.size());
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    x0[j] = x0f.eval(nodes[j]).real();
    profile[j] = space.eval(nodes[j]).real();
  }
  const Datum d{x0,
                [time, profile](double t) {
                  const double a = time.eval(t).real();
                  RealVector v(profile);
                  for (auto& x : v) x *= a;
                  return v;
                },
                horizon};
  const auto quad = cfg.value("quad_steps", std::size_t{200});
  std::vector<double> times = cfg.value("sample_times", std::vector<double>{});
  if (times.empty())
    for (int i = 0; i <= 20; ++i) times.push_back(horizon * i / 20.0);
  const auto levels = cfg.value("levels", std::vector<std::size_t>{});

  json trajectory = json::array();
  for (double t : times) trajectory.push_back({{"t", t}, {"u", mild_solution(s, d, t, quad)}});
  json report = nullptr;
  std::string csv = "level,measured,bound,ok\n";
  if (!levels.empty()) {
    const auto rep = convergence_report(s, d, levels, times, quad, cfg.value("eps1", 0.5));
    json lv = json::array();
    for (const auto& l : rep.levels) {
      lv.push_back({{"level", l.level},
                    {"cells", l.cells},
                    {"measured", l.measured},
                    {"op_gap", l.op_gap},
                    {"bound", l.bound},
                    {"ok", l.ok}});
      csv += std::to_string(l.level) + "," + format_number(l.measured) + "," + format_number(l.bound) + "," +
             (l.ok ? "true" : "false") + "\n";
    }
    report = {{"x0_norm", rep.x0_norm}, {"forcing_l1", rep.forcing_l1}, {"levels", lv}};
  }
  if (plan.format == "csv") emit(plan, out, csv);
  else emit(plan, out, dump({{"nodes", nodes}, {"trajectory", trajectory}, {"report", report}}));
  return 0;
}

int run_verify(const CommandPlan& plan, std::ostream& out) {
  const auto results = run_battery(plan.seed);
  std::size_t passed = 0;
  std::string text = plan.format == "csv" ? "name,worst,tol,pass\n" : "";
  for (const auto& r : results) {
    passed += r.pass;
    if (plan.format == "csv")
      text += r.name + "," + format_number(r.worst) + "," + format_number(r.tol) + "," + (r.pass ? "true" : "false") +
              "\n";
    else
      text += std::string(r.pass ? "PASS " : "FAIL ") + r.name + " worst=" + format_number(r.worst) +
              " tol=" + format_number(r.tol) + "\n";
  }
  if (plan.format != "csv")
    text += "seed " + std::to_string(plan.seed) + ": " + std::to_string(passed) + "/" +
            std::to_string(results.size()) + " passed\n";
  emit(plan, out, text);
  return passed == results.size() ? 0 : 1;
}

std::string error_type(const std::exception& e) {
  if (dynamic_cast<const DomainError*>(&e)) return "DomainError";
  if (dynamic_cast<const EssentialDiscontinuityError*>(&e)) return "EssentialDiscontinuityError";
  if (dynamic_cast<const ConvergenceError*>(&e)) return "ConvergenceError";
  if (dynamic_cast<const NumericalError*>(&e)) return "NumericalError";
  if (dynamic_cast<const GaugeTooSmallError*>(&e)) return "GaugeTooSmallError";
  if (dynamic_cast<const DivergenceSuspected*>(&e)) return "DivergenceSuspected";
  if (dynamic_cast<const ArgumentError*>(&e)) return "ArgumentError";
  if (dynamic_cast<const json::exception*>(&e)) return "FormatError";
  return "Error";
}

std::uint64_t env_seed() {
  const char* s = std::getenv("GAUGE_SPECTRAL_SEED");
  if (!s || !*s) return 42;
  std::uint64_t v = 0;
  const char* end = s + std::char_traits<char>::length(s);
  const auto r = std::from_chars(s, end, v);
  if (r.ec != std::errc{} || r.ptr != end) throw UsageError("GAUGE_SPECTRAL_SEED is not an unsigned integer");
  return v;
}

}  // namespace

RegulatedFn parse_function(const std::string& spec, Domain k) {
  if (spec.empty()) throw ArgumentError("empty function specification");
  return from_json(function_json(spec), k);
}

CommandPlan parse(const std::vector<std::string>& args) {
  CommandPlan plan;
  plan.seed = env_seed();

  CLI::App app{"Henstock-Kurzweil functional calculus", "hkcalc"};
  app.require_subcommand(1);
  app.fallthrough(false);

  const auto common = [&](CLI::App* sc) {
    sc->add_option("--seed", plan.seed, "Seed (default: $GAUGE_SPECTRAL_SEED or 42)");
    sc->add_option("--out", plan.out_path, "Output file (default: stdout)");
    sc->add_option("--format", plan.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    sc->add_flag("--error-json", plan.error_json, "Report errors as JSON on stderr");
  };
  const auto eps_opt = [&](CLI::App* sc) {
    return sc->add_option("--eps", plan.eps, "Accuracy target")->check(CLI::PositiveNumber);
  };
  const auto grid_opt = [&](CLI::App* sc) {
    sc->add_option("--grid", plan.grid, "Grid nodes for continuum models")->check(CLI::Range(std::size_t{1}, std::size_t{1} << 16));
  };

  auto* apply = app.add_subcommand("apply", "f(A) for a symmetric matrix CSV");
  apply->add_option("--matrix", plan.matrix_path, "Symmetric matrix CSV")->required();
  apply->add_option("--fn", plan.fn, "Function specification")->required();
  eps_opt(apply);
  common(apply);

  auto* smap = app.add_subcommand("spectrum-map", "Spectrum of f(A) by the regulated mapping theorem");
  smap->add_option("--fn", plan.fn, "Function specification")->required();
  std::string smap_model = "finite";
  smap->add_option("--model", smap_model, "finite | continuum:a,b[,samples]");
  smap->add_option("--matrix", plan.matrix_path, "Symmetric matrix CSV (finite model)");
  grid_opt(smap);
  common(smap);

  auto* thomae = app.add_subcommand("thomae-demo", "Operator-norm convergence of truncated Thomae functions");
  thomae->add_option("--levels", plan.levels, "Truncation levels (default 1..6)")->check(CLI::PositiveNumber);
  thomae->add_option("--matrix", plan.matrix_path, "Symmetric matrix CSV (default: diagonal of rationals)");
  thomae->add_option("--samples", plan.samples_path, "Write x,value samples of the top truncation");
  eps_opt(thomae);
  common(thomae);

  auto* mult = app.add_subcommand("mult-norm", "||M_f||_op against ||f||_inf on a grid");
  mult->add_option("--fn", plan.fn, "Function specification")->required();
  std::string mult_model = "continuum:0,1";
  mult->add_option("--model", mult_model, "continuum:a,b");
  grid_opt(mult);
  eps_opt(mult);
  common(mult);

  auto* dom = app.add_subcommand("domain-test", "Membership of x in D(f(A)) for an unbounded model");
  std::string dom_fn = "identity";
  dom->add_option("--model", plan.model, "geometric:q | atomic:path.csv | density:power:p | density:gauss:s")
      ->required();
  dom->add_option("--fn", dom_fn, "identity | abs | power:p | constant:c");
  auto* dom_eps = eps_opt(dom);
  common(dom);

  auto* cauchy = app.add_subcommand("cauchy-solve", "Mild solution and step-semigroup convergence report");
  cauchy->add_option("--config", plan.config_path, "Demo configuration JSON")->required();
  common(cauchy);

  auto* verify = app.add_subcommand("verify", "Seeded invariant battery");
  common(verify);

  if (!args.empty() && !args.front().starts_with("-") && !app.get_subcommand_no_throw(args.front()))
    throw UsageError("unknown subcommand '" + args.front() + "'");
  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    for (auto* sc : app.get_subcommands()) {
      plan.subcommand = sc->get_name();
      plan.help = sc->help();
      return plan;
    }
    plan.help = app.help();
    return plan;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }
  plan.subcommand = app.get_subcommands().front()->get_name();
  if (plan.subcommand == "spectrum-map") plan.model = smap_model;
  if (plan.subcommand == "mult-norm") plan.model = mult_model;
  if (plan.subcommand == "domain-test") {
    plan.fn = dom_fn;
    if (dom_eps->count() == 0) plan.eps = 1e-9;
  }
  if (plan.subcommand == "spectrum-map" && plan.model != "finite") {
    try {
      parse_continuum(plan.model);
    } catch (const ArgumentError& e) {
      throw UsageError(std::string("--model: ") + e.what());
    }
  }
  return plan;
}

int execute(const CommandPlan& plan, std::ostream& out, std::ostream& err) {
  try {
    if (plan.subcommand == "apply") return run_apply(plan, out);
    if (plan.subcommand == "spectrum-map") return run_spectrum_map(plan, out);
    if (plan.subcommand == "thomae-demo") return run_thomae_demo(plan, out);
    if (plan.subcommand == "mult-norm") return run_mult_norm(plan, out);
    if (plan.subcommand == "domain-test") return run_domain_test(plan, out);
    if (plan.subcommand == "cauchy-solve") return run_cauchy(plan, out);
    if (plan.subcommand == "verify") return run_verify(plan, out);
    throw UsageError("unknown subcommand '" + plan.subcommand + "'");
  } catch (const std::exception& e) {
    if (plan.error_json) {
      json j = {{"error", {{"type", error_type(e)}, {"message", e.what()}}}};
      if (const auto* d = dynamic_cast<const DivergenceSuspected*>(&e)) j["error"]["partial_sums"] = d->partial_sums();
      err << j.dump() << "\n";
    } else {
      err << "hkcalc: " << error_type(e) << ": " << e.what() << "\n";
    }
    return 1;
  }
}

}  // namespace hkcalc::cli
