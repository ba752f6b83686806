// Command-line surface for the quartic-quadratic sphere problem: generation,
// solving, certification, region classification, catalogs, and grid export.
// All numeric output is written with 17 significant digits and fixed row
// order, so identical inputs and --seed give byte-identical artifacts.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "qqsphere/diagonal.hpp"
#include "qqsphere/json_io.hpp"
#include "qqsphere/landscape.hpp"
#include "qqsphere/rankone.hpp"
#include "qqsphere/solve.hpp"

using namespace qqs;

namespace {

constexpr const char* kSchema = R"({
  "schema_version": "1.0",
  "documents": {
    "problem": {
      "type": "object",
      "required": ["n", "beta", "field", "A"],
      "properties": {
        "n": {"type": "integer", "minimum": 1},
        "beta": {"type": "number", "exclusiveMinimum": 0},
        "field": {"enum": ["real", "complex"]},
        "A": {
          "type": "object",
          "required": ["re"],
          "properties": {
            "re": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
            "im": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}}
          }
        }
      }
    },
    "point": {
      "type": "object",
      "required": ["re"],
      "properties": {
        "re": {"type": "array", "items": {"type": "number"}},
        "im": {"type": "array", "items": {"type": "number"}}
      }
    },
    "solve_result": {
      "type": "object",
      "required": ["z", "f", "grad_norm", "iters", "polished"]
    },
    "certificate": {
      "type": "object",
      "required": ["grad_norm", "lambda", "mu_min", "h_min_eig", "label", "global",
                   "fourth_order_necessary", "fourth_order_sufficient", "null_dim"]
    },
    "diag_class": {
      "type": "object",
      "required": ["support", "u", "lambda", "f"]
    },
    "rankone_result": {
      "type": "object",
      "required": ["mode", "z", "f_star", "certificate"]
    },
    "region_label": {
      "type": "object",
      "required": ["regime", "r1", "r2", "r3"]
    },
    "catalog_entry": {
      "type": "object",
      "required": ["z", "f", "grad_norm", "mu_min", "label", "is_minimum"]
    },
    "catalog_summary": {
      "type": "object",
      "required": ["n_points", "n_stationary", "n_minima", "n_starts", "dedup_tol"]
    },
    "kl_estimate": {
      "type": "object",
      "required": ["theta_hat", "slope", "eta_hat", "n_samples"]
    },
    "perturbation_trial": {
      "type": "object",
      "required": ["sigma", "lhs", "rhs", "improved", "y"]
    },
    "error": {
      "type": "object",
      "required": ["error", "message"]
    }
  }
})";

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Validation, "FileNotFound", "cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_artifact(const std::string& out, const std::string& content) {
  if (out.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw Error(ErrorKind::Validation, "FileNotWritable", "cannot write " + out);
  f << content;
}

std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out;
}

// point object without the trailing newline, for embedding in larger documents
std::string point_json(const Vec& v, bool with_imag) {
  std::string s = serialize_point(v, with_imag);
  if (!s.empty() && s.back() == '\n') s.pop_back();
  return s;
}

std::string real_array_json(const RealVec& v) {
  std::ostringstream os;
  os << "[";
  for (int i = 0; i < v.size(); ++i) os << (i ? ", " : "") << fmt17(v(i));
  os << "]";
  return os.str();
}

std::string certificate_json(const Problem& p, const Vec& z, double tol,
                             std::uint64_t seed) {
  StationaryCertificate cert = certify_point(p, z, tol, tol);
  std::ostringstream os;
  os << "{\"grad_norm\": " << fmt17(cert.grad_norm) << ", \"lambda\": "
     << fmt17(cert.lambda) << ", \"mu_min\": " << fmt17(cert.mu_min)
     << ", \"h_min_eig\": " << fmt17(cert.h_min_eig) << ", \"label\": \""
     << label_name(cert.label) << "\", \"global\": \"" << global_cert_name(cert.global_ok)
     << "\"";
  if (cert.label != StationaryLabel::NotStationary) {
    FourthOrderConfig cfg;
    cfg.seed = seed;
    FourthOrderVerdict nec = fourth_order_necessary(p, z, cfg);
    FourthOrderVerdict suf = fourth_order_sufficient(p, z, cfg);
    os << ", \"fourth_order_necessary\": \"" << fourth_order_kind_name(nec.kind)
       << "\", \"fourth_order_sufficient\": \"" << fourth_order_kind_name(suf.kind)
       << "\", \"null_dim\": " << nec.null_dim;
    if (nec.witness)
      os << ", \"witness\": {\"condition\": \"" << json_escape(nec.witness->condition)
         << "\", \"violation\": " << fmt17(nec.witness->violation) << ", \"v\": "
         << point_json(nec.witness->v, p.field == Field::Complex) << "}";
  } else {
    os << ", \"fourth_order_necessary\": \"not-applicable\""
       << ", \"fourth_order_sufficient\": \"not-applicable\", \"null_dim\": 0";
  }
  os << "}";
  return os.str();
}

std::string catalog_jsonl(const Problem& p, const CriticalCatalog& cat) {
  std::ostringstream os;
  bool im = p.field == Field::Complex;
  for (const CatalogEntry& e : cat.points) {
    os << "{\"z\": " << point_json(e.z, im) << ", \"f\": " << fmt17(e.f)
       << ", \"grad_norm\": " << fmt17(e.grad_norm) << ", \"mu_min\": " << fmt17(e.mu_min)
       << ", \"label\": \"" << label_name(e.label) << "\", \"is_minimum\": "
       << (e.is_minimum ? "true" : "false") << "}\n";
  }
  os << "{\"n_points\": " << cat.points.size() << ", \"n_stationary\": " << cat.n_stationary
     << ", \"n_minima\": " << cat.n_minima << ", \"n_starts\": " << cat.n_starts
     << ", \"dedup_tol\": " << fmt17(cat.dedup_tol) << "}\n";
  return os.str();
}

std::string region_json(const RegionLabel& lab) {
  std::ostringstream os;
  os << "{\"regime\": \"" << (lab.regime == Regime::LargeBeta ? "large-beta" : "small-beta")
     << "\", \"r1\": " << (lab.r1 ? "true" : "false")
     << ", \"r2\": " << (lab.r2 ? "true" : "false")
     << ", \"r3\": " << (lab.r3 ? "true" : "false");
  if (lab.regime == Regime::LargeBeta)
    os << ", \"balance_inf\": " << fmt17(lab.balance_inf)
       << ", \"min_zk2\": " << fmt17(lab.min_zk2);
  else
    os << ", \"grad_var\": " << fmt17(lab.grad_var)
       << ", \"alpha_min_sq\": " << fmt17(lab.alpha_min_sq);
  os << "}";
  return os.str();
}

struct CommonFlags {
  std::uint64_t seed = 0;
  std::string out;
  int threads = 1;
};

void add_common(CLI::App* cmd, CommonFlags& fl) {
  cmd->add_option("--seed", fl.seed, "RNG seed");
  cmd->add_option("--out", fl.out, "output path (default: stdout)");
  cmd->add_option("--threads", fl.threads, "worker thread cap")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "quartic-quadratic optimization on the sphere: "
      "min (1/2) z*Az + (beta/2) sum |z_k|^4,  ||z|| = 1"};
  app.require_subcommand(0, 1);
  bool print_schema = false;
  app.add_flag("--print-schema", print_schema, "print the embedded output schema and exit");

  // ---- gen
  auto* gen = app.add_subcommand("gen", "generate a problem instance");
  CommonFlags gen_fl;
  std::string gen_kind;
  int gen_n = 3;
  double gen_beta = 1.0;
  gen->add_option("--kind", gen_kind,
                  "diagonal-uniform | rank-one | dense-symmetric | dense-hermitian | figure1")
      ->required();
  gen->add_option("--n", gen_n, "dimension");
  gen->add_option("--beta", gen_beta, "interaction coefficient")->required();
  add_common(gen, gen_fl);

  // ---- solve
  auto* solve = app.add_subcommand("solve", "single seeded descent run with polish");
  CommonFlags solve_fl;
  std::string solve_problem;
  double solve_tol = 1e-10;
  solve->add_option("problem", solve_problem, "problem JSON file")->required();
  solve->add_option("--tol", solve_tol, "gradient norm tolerance");
  add_common(solve, solve_fl);

  // ---- certify
  auto* certify = app.add_subcommand("certify", "optimality certificates at a point");
  CommonFlags cert_fl;
  std::string cert_problem, cert_point;
  double cert_tol = 1e-8;
  certify->add_option("problem", cert_problem, "problem JSON file")->required();
  certify->add_option("point", cert_point, "point JSON file")->required();
  certify->add_option("--tol", cert_tol, "stationarity / PSD tolerance");
  add_common(certify, cert_fl);

  // ---- diag
  auto* diag = app.add_subcommand("diag", "enumerate stationary classes of a diagonal problem");
  CommonFlags diag_fl;
  std::string diag_problem;
  diag->add_option("problem", diag_problem, "problem JSON file")->required();
  add_common(diag, diag_fl);

  // ---- rankone
  auto* rankone = app.add_subcommand("rankone", "solve A = aa* given the vector a");
  CommonFlags r1_fl;
  std::string r1_avec;
  double r1_beta = 1.0;
  int r1_starts = 128;
  rankone->add_option("a", r1_avec, "vector a as a point JSON file")->required();
  rankone->add_option("--beta", r1_beta, "interaction coefficient")->required();
  rankone->add_option("--starts", r1_starts, "multistart budget for the numeric regime");
  add_common(rankone, r1_fl);

  // ---- classify
  auto* classify = app.add_subcommand("classify", "strict-saddle region label for a point");
  CommonFlags cls_fl;
  std::string cls_problem, cls_point;
  double cls_gamma = 1.0;
  classify->add_option("problem", cls_problem, "problem JSON file")->required();
  classify->add_option("point", cls_point, "point JSON file")->required();
  classify->add_option("--gamma", cls_gamma, "margin parameter");
  add_common(classify, cls_fl);

  // ---- count-critical
  auto* count = app.add_subcommand("count-critical", "multistart critical-point catalog");
  CommonFlags cnt_fl;
  std::string cnt_problem;
  int cnt_starts = 1000;
  count->add_option("problem", cnt_problem, "problem JSON file")->required();
  count->add_option("--starts", cnt_starts, "number of descent starts");
  add_common(count, cnt_fl);

  // ---- kl
  auto* kl = app.add_subcommand("kl", "empirical KL exponent at a stationary point");
  CommonFlags kl_fl;
  std::string kl_problem, kl_point;
  kl->add_option("problem", kl_problem, "problem JSON file")->required();
  kl->add_option("point", kl_point, "stationary point JSON file")->required();
  add_common(kl, kl_fl);

  // ---- counterexample
  auto* cex = app.add_subcommand("counterexample",
                                 "flat-saddle family instance (problem + point)");
  CommonFlags cex_fl;
  int cex_n = 5;
  double cex_C = 1.0, cex_eps = 0.25;
  cex->add_option("--n", cex_n, "dimension")->required();
  cex->add_option("--C", cex_C, "scale constant");
  cex->add_option("--eps", cex_eps, "exponent defect in beta = C n^{3/2-eps}");
  add_common(cex, cex_fl);

  // ---- perturb
  auto* perturb = app.add_subcommand("perturb", "diagonal perturbation-bound trial");
  CommonFlags prt_fl;
  std::string prt_problem;
  double prt_sigma = 0.0;
  perturb->add_option("problem", prt_problem, "diagonal problem JSON file")->required();
  perturb->add_option("--sigma", prt_sigma, "noise level")->required();
  add_common(perturb, prt_fl);

  // ---- landscape-grid
  auto* grid = app.add_subcommand("landscape-grid",
                                  "CSV of f over spherical coordinates (n = 3, real)");
  CommonFlags grd_fl;
  std::string grd_problem, grd_res = "400x200";
  grid->add_option("problem", grd_problem, "problem JSON file")->required();
  grid->add_option("--res", grd_res, "phi x theta resolution, e.g. 400x200");
  add_common(grid, grd_fl);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "{\"error\": \"BadInvocation\", \"message\": \""
              << json_escape(e.what()) << "\"}\n";
    return 2;
  }

  try {
    if (print_schema) {
      std::cout << kSchema << "\n";
      return 0;
    }
    if (app.get_subcommands().empty()) {
      std::cerr << "{\"error\": \"BadInvocation\", \"message\": \"no command given\"}\n";
      return 2;
    }

    if (*gen) {
      Problem p = generate_problem(parse_kind(gen_kind), gen_n, gen_beta, gen_fl.seed);
      write_artifact(gen_fl.out, serialize_problem(p));
    } else if (*solve) {
      Problem p = parse_problem(read_file(solve_problem));
      SolverConfig cfg;
      cfg.seed = solve_fl.seed;
      cfg.grad_tol = solve_tol;
      Rng rng(solve_fl.seed, 0x50);
      DescentResult res = gradient_descent(p, detail::random_start(p, rng), cfg);
      bool polished = false;
      if (res.grad_norm > 1e-12 && res.grad_norm <= 1e-4) {
        PolishResult pr = newton_polish(p, res.z, cfg);
        if (pr.converged) {
          res.z = pr.z;
          res.f = objective(p, res.z);
          res.grad_norm = riemannian_grad(p, res.z).norm;
          polished = true;
        }
      }
      std::ostringstream os;
      os << "{\"z\": " << point_json(res.z, p.field == Field::Complex)
         << ", \"f\": " << fmt17(res.f) << ", \"grad_norm\": " << fmt17(res.grad_norm)
         << ", \"iters\": " << res.iters << ", \"polished\": "
         << (polished ? "true" : "false") << "}\n";
      write_artifact(solve_fl.out, os.str());
    } else if (*certify) {
      Problem p = parse_problem(read_file(cert_problem));
      Vec z = parse_point(read_file(cert_point));
      write_artifact(cert_fl.out, certificate_json(p, z, cert_tol, cert_fl.seed) + "\n");
    } else if (*diag) {
      Problem p = parse_problem(read_file(diag_problem));
      auto classes = enumerate_stationary_diagonal(p);
      std::ostringstream os;
      for (const auto& cls : classes) {
        os << "{\"support\": [";
        for (std::size_t i = 0; i < cls.support.size(); ++i)
          os << (i ? ", " : "") << cls.support[i];
        os << "], \"u\": " << real_array_json(cls.u) << ", \"lambda\": "
           << fmt17(cls.lambda) << ", \"f\": " << fmt17(cls.f_value) << "}\n";
      }
      write_artifact(diag_fl.out, os.str());
    } else if (*rankone) {
      Vec a = parse_point(read_file(r1_avec));
      RankOneVector av(a);
      int n = static_cast<int>(a.size());
      SolverConfig cfg;
      cfg.seed = r1_fl.seed;
      RankOneSolution sol = solve_rankone(av, r1_beta, n, cfg, r1_starts);
      Problem p = rankone_problem(av, r1_beta, Field::Complex);
      std::ostringstream os;
      os << "{\"mode\": \""
         << (sol.mode == RankOneMode::Orthogonal ? "orthogonal" : "consistent-numeric")
         << "\", \"z\": " << point_json(sol.z, true) << ", \"f_star\": "
         << fmt17(sol.f_star) << ", \"certificate\": "
         << certificate_json(p, sol.z, 1e-8, r1_fl.seed) << "}\n";
      write_artifact(r1_fl.out, os.str());
    } else if (*classify) {
      Problem p = parse_problem(read_file(cls_problem));
      Vec z = parse_point(read_file(cls_point));
      Thresholds t = thresholds(p, cls_gamma);
      RegionLabel lab;
      if (p.beta >= t.beta_large || !t.beta_small)
        lab = classify_large_beta(p, z, cls_gamma);
      else
        lab = classify_small_beta(p, z, cls_gamma);
      std::ostringstream os;
      os << "{\"label\": " << region_json(lab) << ", \"thresholds\": {\"beta_large\": "
         << fmt17(t.beta_large) << ", \"beta_small\": "
         << (t.beta_small ? fmt17(*t.beta_small) : std::string("null"))
         << ", \"beta_count_lower\": " << fmt17(t.beta_count_lower)
         << ", \"beta_count_exact\": " << fmt17(t.beta_count_exact) << "}}\n";
      write_artifact(cls_fl.out, os.str());
    } else if (*count) {
      Problem p = parse_problem(read_file(cnt_problem));
      SolverConfig cfg;
      cfg.seed = cnt_fl.seed;
      CriticalCatalog cat = multistart(p, cnt_starts, cfg);
      write_artifact(cnt_fl.out, catalog_jsonl(p, cat));
    } else if (*kl) {
      Problem p = parse_problem(read_file(kl_problem));
      Vec z = parse_point(read_file(kl_point));
      KlConfig cfg;
      cfg.seed = kl_fl.seed;
      KlEstimate est = kl_estimate(p, z, cfg);
      std::ostringstream os;
      os << "{\"theta_hat\": " << fmt17(est.theta_hat) << ", \"slope\": "
         << fmt17(est.slope) << ", \"eta_hat\": " << fmt17(est.eta_hat)
         << ", \"n_samples\": " << est.samples.size() << "}\n";
      write_artifact(kl_fl.out, os.str());
    } else if (*cex) {
      Counterexample ce = saddle_counterexample(cex_n, cex_C, cex_eps);
      std::string prob = serialize_problem(ce.problem);
      std::string pt = serialize_point(ce.z, false);
      if (cex_fl.out.empty()) {
        std::cout << prob << pt;
      } else {
        write_artifact(cex_fl.out + ".problem.json", prob);
        write_artifact(cex_fl.out + ".point.json", pt);
      }
    } else if (*perturb) {
      Problem p = parse_problem(read_file(prt_problem));
      PerturbationTrial t = perturbation_check(p, prt_sigma, prt_fl.seed);
      std::ostringstream os;
      os << "{\"sigma\": " << fmt17(t.sigma) << ", \"lhs\": " << fmt17(t.lhs)
         << ", \"rhs\": " << fmt17(t.rhs) << ", \"improved\": "
         << (t.improved ? "true" : "false") << ", \"y\": " << point_json(t.y, true)
         << "}\n";
      write_artifact(prt_fl.out, os.str());
    } else if (*grid) {
      Problem p = parse_problem(read_file(grd_problem));
      if (p.n != 3 || p.field != Field::Real)
        throw Error(ErrorKind::Validation, "GridUnsupported",
                    "landscape-grid requires a real problem with n = 3");
      int rp = 0, rt = 0;
      char x = 0;
      std::istringstream rs(grd_res);
      if (!(rs >> rp >> x >> rt) || x != 'x' || rp < 1 || rt < 1)
        throw Error(ErrorKind::Validation, "BadResolution",
                    "--res must look like 400x200");
      std::ostringstream os;
      os << "phi,theta,f\n";
      for (int i = 0; i < rp; ++i) {
        double phi = M_PI * i / rp;
        for (int j = 0; j < rt; ++j) {
          double theta = 2.0 * M_PI * j / rt;
          Vec z(3);
          z << std::cos(phi), std::sin(phi) * std::cos(theta),
              std::sin(phi) * std::sin(theta);
          os << fmt17(phi) << "," << fmt17(theta) << "," << fmt17(objective(p, z))
             << "\n";
        }
      }
      write_artifact(grd_fl.out, os.str());
    }
  } catch (const Error& e) {
    std::cerr << "{\"error\": \"" << json_escape(e.code()) << "\", \"message\": \""
              << json_escape(e.what()) << "\"}\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "{\"error\": \"Internal\", \"message\": \"" << json_escape(e.what())
              << "\"}\n";
    return 3;
  }
  return 0;
}
