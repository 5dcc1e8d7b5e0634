#include "tpl/runner.hpp"

#include "tpl/errors.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

namespace tpl {

namespace {

class Collector {
 public:
  Collector(RunResult& result, std::string suite, std::string fixture)
      : result_(result), suite_(std::move(suite)), fixture_(std::move(fixture)) {}

  void add(CheckReport r) {
    switch (r.verdict) {
      case Verdict::Pass: ++result_.summary.pass; break;
      case Verdict::Fail: ++result_.summary.fail; break;
      case Verdict::Inconclusive: ++result_.summary.inconclusive; break;
      case Verdict::Skipped: ++result_.summary.skipped; break;
    }
    result_.rows.push_back({suite_, fixture_, std::move(r)});
  }
  void add(std::vector<CheckReport> rs) {
    for (auto& r : rs) add(std::move(r));
  }

 private:
  RunResult& result_;
  std::string suite_;
  std::string fixture_;
};

void run_finite(const Experiment& e, const FiniteChain& chain, RunResult& result, nlohmann::json& detail) {
  const PoincareCertificate cert = e.alpha ? user_certificate(*e.alpha, chain.name()) : poincare_constant(chain);
  detail["certificate"] = to_json(cert);
  nlohmann::json energies = nlohmann::json::array();
  for (const auto& lf : e.fields) {
    nlohmann::json en = to_json(energy_report(chain, lf.field));
    en["field"] = lf.label;
    energies.push_back(std::move(en));
  }
  detail["energy_reports"] = std::move(energies);

  const SuiteParams& p = e.params;
  for (const auto& suite : e.suites) {
    if (suite == "poincare") {
      const ProbeReport probe = equivalence_probe(chain, cert, p.probe_trials, p.probe_dims, p.probe_seed);
      detail["probe"] = to_json(probe);
      if (probe.trials > 0) {
        Collector(result, suite, e.name + "/probe")
            .add(CheckReport::exact(citation::kEquivalence, probe.sup_ratio, cert.alpha, Slack{}, to_json(probe)));
      }
    }
    for (const auto& lf : e.fields) {
      Collector out(result, suite, e.name + "/" + lf.label);
      const FiniteField& f = lf.field;
      if (suite == "poincare") {
        if (f.dim() == 1) {
          std::vector<double> scalar(static_cast<std::size_t>(f.size()));
          for (int z = 0; z < f.size(); ++z) scalar[static_cast<std::size_t>(z)] = f[z](0, 0);
          out.add(check_scalar_poincare(chain, scalar, cert));
        }
        out.add(check_trace_poincare(chain, f, cert));
      } else if (suite == "subadditivity") {
        const SymmetrizedField sym = bivariate_symmetrized(chain, f);
        out.add(check_subadditivity(chain, sym.g));
        out.add(check_bivariate_poincare(chain, sym.g, cert));
      } else if (suite == "chain-rule") {
        for (const auto& phi : p.phis) out.add(check_chain_rule(chain, f, phi));
      } else if (suite == "exp-moment") {
        const double v_f = variance_proxy(chain, f).value;
        out.add(check_exp_moment(chain, f, cert,
                                 p.theta_grid ? *p.theta_grid : default_theta_grid(cert.alpha, v_f, p.theta_points)));
      } else if (suite == "tail") {
        out.add(check_tail_empirical(chain, f, cert, p.lambda_grid));
      } else if (suite == "poly-moment") {
        out.add(check_poly_moment(chain, f, cert, p.q_list));
      } else if (suite == "intdim") {
        for (int q : p.intdim_q) out.add(check_intdim_variant(chain, f, cert, q));
      }
    }
  }
}

void run_gaussian(const Experiment& e, const GaussianModel& model, RunResult& result, nlohmann::json& detail) {
  const PoincareCertificate cert = e.alpha ? user_certificate(*e.alpha, e.name) : ou_certificate();
  detail["certificate"] = to_json(cert);
  const SuiteParams& p = e.params;
  const auto* series = std::get_if<GaussianSeries>(&model);
  nlohmann::json en = series ? to_json(energy_report(*series)) : to_json(energy_report(model_field(model), p.samples));
  en["field"] = e.name;
  detail["energy_reports"] = nlohmann::json::array({en});

  for (const auto& suite : e.suites) {
    Collector out(result, suite, e.name);
    if (suite == "poincare") {
      if (series) {
        out.add(CheckReport::exact(citation::kTracePoincare, matrix_variance(*series).trace(),
                                   cert.alpha * dirichlet_form(*series).trace(), Slack{},
                                   {{"alpha", cert.alpha}, {"d", series->dim()}}));
      } else {
        const EnergyReport r = energy_report(model_field(model), p.samples);
        const double half_var = r.sample_meta->variance_trace_half_width;
        const double half_en = r.sample_meta->dirichlet_trace_half_width;
        mc::Estimate lhs = exact_estimate(r.variance.trace());
        lhs.ci_low = lhs.value - half_var;
        lhs.ci_high = lhs.value + half_var;
        lhs.level = mc::Estimate{}.level;
        mc::Estimate rhs = exact_estimate(cert.alpha * r.dirichlet.trace());
        rhs.ci_low = rhs.value - cert.alpha * half_en;
        rhs.ci_high = rhs.value + cert.alpha * half_en;
        rhs.level = mc::Estimate{}.level;
        out.add(CheckReport::estimated(citation::kTracePoincare, lhs, rhs,
                                       {{"alpha", cert.alpha}, {"d", model_dim(model)}, {"seed", p.samples.seed}}));
      }
    } else if (suite == "exp-moment") {
      const double v_f = p.certified_v_f ? *p.certified_v_f : (series ? variance_proxy(*series).value : 0.0);
      const auto grid = p.theta_grid ? *p.theta_grid : default_theta_grid(cert.alpha, v_f, p.theta_points);
      out.add(check_exp_moment(model, cert, grid, p.samples, p.certified_v_f));
    } else if (suite == "tail") {
      out.add(check_tail_empirical(model, cert, p.lambda_grid, p.samples, p.certified_v_f));
    } else if (suite == "poly-moment") {
      out.add(check_poly_moment(model, cert, p.q_list, p.samples));
    } else if (suite == "chaos") {
      const auto& chaos = std::get<GaussianChaos>(model);
      if (chaos.dim() == 1) {
        out.add(check_chaos_scalar(chaos, p.q_list, p.samples));
      } else {
        for (auto r : check_poly_moment(model, ou_certificate(), p.q_list, p.samples)) {
          r.citation = citation::kGaussianChaos;
          r.context["one_step"] = true;
          out.add(std::move(r));
        }
      }
    }
  }
}

}  // namespace

void apply_overrides(ExperimentConfig& cfg, const RunOverrides& o) {
  for (const auto& s : o.suites) {
    if (std::find(known_suites().begin(), known_suites().end(), s) == known_suites().end()) {
      throw ConfigError("--suite", 0, "unknown suite \"" + s + "\"");
    }
  }
  if (o.format && *o.format != "csv" && *o.format != "json" && *o.format != "both") {
    throw ConfigError("--format", 0, "format must be csv, json, or both");
  }
  if (o.samples && *o.samples == 0) throw ConfigError("--samples", 0, "sample count must be >= 1");
  for (auto& e : cfg.experiments) {
    if (o.seed) {
      e.params.samples.seed = *o.seed;
      e.params.probe_seed = *o.seed;
    }
    if (o.samples) e.params.samples.n_samples = *o.samples;
    if (!o.suites.empty()) {
      std::erase_if(e.suites, [&](const std::string& s) {
        return std::find(o.suites.begin(), o.suites.end(), s) == o.suites.end();
      });
    }
  }
  if (o.out_dir) cfg.output.dir = *o.out_dir;
  if (o.format) cfg.output.format = *o.format;
}

RunResult run_experiments(const ExperimentConfig& cfg) {
  RunResult result;
  for (const auto& e : cfg.experiments) {
    nlohmann::json detail{{"name", e.name}, {"model", e.model_kind}, {"suites", e.suites}};
    if (const auto* chain = std::get_if<FiniteChain>(&e.model)) {
      detail["states"] = chain->n_states();
      run_finite(e, *chain, result, detail);
    } else {
      run_gaussian(e, std::get<GaussianModel>(e.model), result, detail);
    }
    result.details.push_back(std::move(detail));
  }
  return result;
}

std::vector<std::string> write_reports(const RunResult& result, const OutputSpec& out) {
  std::filesystem::create_directories(out.dir);
  std::vector<std::string> written;
  const std::filesystem::path base = std::filesystem::path(out.dir) / out.basename;
  if (out.format == "csv" || out.format == "both") {
    const std::string path = base.string() + ".csv";
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path);
    write_csv(os, result.rows);
    written.push_back(path);
  }
  if (out.format == "json" || out.format == "both") {
    const std::string path = base.string() + ".json";
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path);
    const nlohmann::json doc{{"rows", rows_to_json(result.rows)},
                             {"experiments", result.details},
                             {"summary",
                              {{"pass", result.summary.pass},
                               {"fail", result.summary.fail},
                               {"inconclusive", result.summary.inconclusive},
                               {"skipped", result.summary.skipped}}}};
    os << doc.dump(2) << '\n';
    written.push_back(path);
  }
  return written;
}

int exit_code(const RunSummary& s) { return s.fail == 0 ? 0 : 1; }

}  // namespace tpl
