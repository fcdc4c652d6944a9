#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "fomlab/config.hpp"
#include "fomlab/report.hpp"

namespace fomlab {

struct RunReport {
    json body;          // full report, canonical key order
    int exit_code = 0;  // 0 ok, 3 convergence failure with partial report
};

namespace detail {

inline double require(const std::optional<double>& v, const char* key) {
    if (!v) throw ConfigError(key, std::string("missing required ") + key);
    return *v;
}
inline const Model& require_model(const RunConfig& cfg) {
    if (!cfg.model) throw ConfigError("model", "this command needs a model");
    return *cfg.model;
}
inline const Prior& require_prior(const RunConfig& cfg) {
    if (!cfg.prior) throw ConfigError("prior", "this command needs a prior");
    return *cfg.prior;
}

inline BfiForm bfi_form_of(const RunConfig& cfg) {
    if (!cfg.form || *cfg.form == "conditional_form") return BfiForm::conditional_form;
    if (*cfg.form == "posterior_form") return BfiForm::posterior_form;
    throw ConfigError("task.form", "bfi form must be conditional_form or posterior_form");
}
inline CeForm ce_form_of(const RunConfig& cfg) {
    if (!cfg.form || *cfg.form == "h0_only") return CeForm::h0_only;
    if (*cfg.form == "two_expectation") return CeForm::two_expectation;
    throw ConfigError("task.form", "entropy form must be h0_only or two_expectation");
}
inline Estimator estimator_of(const RunConfig& cfg) {
    if (!cfg.estimator || *cfg.estimator == "posterior_mean") return Estimator::posterior_mean;
    if (*cfg.estimator == "mle") return Estimator::mle;
    throw ConfigError("task.estimator", "estimator must be posterior_mean or mle");
}
inline ClaimId claim_of(const RunConfig& cfg) {
    if (!cfg.claim) throw ConfigError("task.claim", "expansions needs task.claim");
    const std::map<std::string, ClaimId> names = {
        {"detectability_sq", ClaimId::detectability_sq},
        {"ce_avg", ClaimId::ce_avg},
        {"si_pointwise", ClaimId::si_pointwise},
        {"si_avg", ClaimId::si_avg},
        {"ce_directional_vector", ClaimId::ce_directional_vector},
        {"h_of_y", ClaimId::h_of_y},
    };
    const auto it = names.find(*cfg.claim);
    if (it == names.end()) throw ConfigError("task.claim", "unknown claim '" + *cfg.claim + "'");
    return it->second;
}

inline DetectionTask task_of(const RunConfig& cfg) {
    const double t0 = require(cfg.theta0, "task.theta0");
    const double t1 = require(cfg.theta1, "task.theta1");
    if (cfg.prior) return DetectionTask::with_prior(*cfg.prior, t0, t1);
    return DetectionTask::equal_odds(t0, t1);
}

inline json expansion_json(const RunConfig& cfg, ClaimId claim) {
    const Model& model = require_model(cfg);
    const Prior* prior = cfg.prior ? &*cfg.prior : nullptr;
    if (claim == ClaimId::ce_directional_vector) {
        if (cfg.direction.empty()) throw ConfigError("task.u", "vector claim needs task.u");
        std::vector<Prior> comps(static_cast<std::size_t>(model.param_dim()), require_prior(cfg));
        return to_json(expansion_report(model, prior, cfg.theta, claim, cfg.method, cfg.numerics,
                                        cfg.direction, &comps));
    }
    return to_json(expansion_report(model, prior, cfg.theta, claim, cfg.method, cfg.numerics));
}

inline json dispatch(const RunConfig& cfg) {
    json res;
    const NumericsOptions& opt = cfg.numerics;
    switch (cfg.command) {
        case Command::fi: {
            const double theta = require(cfg.theta, "task.theta");
            res["fisher"] = to_json(fisher_scalar(require_model(cfg), theta, cfg.method, opt));
            break;
        }
        case Command::bfi: {
            res["bayesian_fisher"] = to_json(
                bayesian_fi(require_model(cfg), require_prior(cfg), bfi_form_of(cfg), cfg.method, opt));
            break;
        }
        case Command::fim: {
            const Model& model = require_model(cfg);
            std::vector<Prior> comps(static_cast<std::size_t>(model.param_dim()), require_prior(cfg));
            res["bayesian_fim"] = to_json(bayesian_fim(model, comps, cfg.method, opt));
            break;
        }
        case Command::roc:
        case Command::auc: {
            const RocCurve roc = roc_auc(require_model(cfg), task_of(cfg), cfg.method, opt);
            res["roc"] = to_json(roc, cfg.command == Command::roc);
            break;
        }
        case Command::mpe: {
            const double t0 = require(cfg.theta0, "task.theta0");
            const double t1 = require(cfg.theta1, "task.theta1");
            res["mpe"] = to_json(mpe(require_model(cfg), require_prior(cfg), t0, t1, cfg.method, opt));
            res["task"] = to_json(DetectionTask::with_prior(require_prior(cfg), t0, t1));
            break;
        }
        case Command::entropy: {
            const DetectionTask task = task_of(cfg);
            const InfoValue ce =
                conditional_entropy(require_model(cfg), task, ce_form_of(cfg), cfg.method, opt);
            res["conditional_entropy"] = to_json(ce.value);
            res["form"] = to_string(ce_form_of(cfg));
            res["binary_entropy"] = binary_entropy(task.y);
            res["task"] = to_json(task);
            break;
        }
        case Command::si: {
            const DetectionTask task = task_of(cfg);
            const Model& model = require_model(cfg);
            const InfoValue direct = shannon_info(model, task, cfg.method, opt);
            const InfoValue ce =
                conditional_entropy(model, task, CeForm::h0_only, cfg.method, opt);
            const double h = binary_entropy(task.y);
            res["shannon_info"] = to_json(direct.value);
            res["h_minus_ce"] = h - ce.value.value;
            res["consistency_diff"] = direct.value.value - (h - ce.value.value);
            res["task"] = to_json(task);
            break;
        }
        case Command::emse: {
            res["emse"] = to_json(
                emse(require_model(cfg), require_prior(cfg), estimator_of(cfg), cfg.method, opt));
            res["estimator"] = cfg.estimator ? *cfg.estimator : "posterior_mean";
            break;
        }
        case Command::bounds: {
            BoundKind kind = BoundKind::van_trees;
            if (cfg.bound) {
                if (*cfg.bound == "crb") kind = BoundKind::crb;
                else if (*cfg.bound == "van_trees") kind = BoundKind::van_trees;
                else if (*cfg.bound == "ziv_zakai_standard") kind = BoundKind::ziv_zakai_standard;
                else if (*cfg.bound == "ziv_zakai_expectation") kind = BoundKind::ziv_zakai_expectation;
                else throw ConfigError("task.bound", "unknown bound '" + *cfg.bound + "'");
            }
            res["bound_report"] = to_json(bound_report(require_model(cfg), require_prior(cfg),
                                                       estimator_of(cfg), kind, cfg.method, opt,
                                                       cfg.theta));
            break;
        }
        case Command::zivzakai: {
            const Estimate s =
                ziv_zakai(require_model(cfg), require_prior(cfg), ZzForm::standard, cfg.method, opt);
            const Estimate e = ziv_zakai(require_model(cfg), require_prior(cfg), ZzForm::expectation,
                                         cfg.method, opt);
            res["standard"] = to_json(s);
            res["expectation"] = to_json(e);
            res["rel_difference"] = std::fabs(s.value - e.value) / std::max(std::fabs(s.value), 1e-300);
            break;
        }
        case Command::expansions: {
            res["expansion"] = expansion_json(cfg, claim_of(cfg));
            break;
        }
        case Command::regularity: {
            const double theta = require(cfg.theta, "task.theta");
            res["regularity"] = to_json(regularity_checks(require_model(cfg), require_prior(cfg),
                                                          theta, opt.mc_samples, opt.seed, opt));
            break;
        }
        case Command::all: {
            const Model& model = require_model(cfg);
            const Prior& prior = require_prior(cfg);
            const double theta = require(cfg.theta, "task.theta");
            const DetectionTask task = task_of(cfg);
            res["fi"] = to_json(fisher_scalar(model, theta, cfg.method, opt));
            res["bfi_conditional"] = to_json(
                bayesian_fi(model, prior, BfiForm::conditional_form, cfg.method, opt));
            res["bfi_posterior"] = to_json(
                bayesian_fi(model, prior, BfiForm::posterior_form, cfg.method, opt));
            res["roc"] = to_json(roc_auc(model, task, cfg.method, opt), false);
            res["mpe"] = to_json(mpe(model, prior, task.theta0, task.theta1, cfg.method, opt));
            res["conditional_entropy_h0_only"] =
                to_json(conditional_entropy(model, task, CeForm::h0_only, cfg.method, opt).value);
            res["conditional_entropy_two_expectation"] = to_json(
                conditional_entropy(model, task, CeForm::two_expectation, cfg.method, opt).value);
            res["shannon_info"] = to_json(shannon_info(model, task, cfg.method, opt).value);
            res["binary_entropy"] = binary_entropy(task.y);
            res["emse_posterior_mean"] =
                to_json(emse(model, prior, Estimator::posterior_mean, cfg.method, opt));
            res["van_trees"] = to_json(bound_report(model, prior, Estimator::posterior_mean,
                                                    BoundKind::van_trees, cfg.method, opt));
            const Estimate zs = ziv_zakai(model, prior, ZzForm::standard, cfg.method, opt);
            const Estimate ze = ziv_zakai(model, prior, ZzForm::expectation, cfg.method, opt);
            res["ziv_zakai_standard"] = to_json(zs);
            res["ziv_zakai_expectation"] = to_json(ze);
            res["ziv_zakai_rel_difference"] =
                std::fabs(zs.value - ze.value) / std::max(std::fabs(zs.value), 1e-300);
            res["regularity"] =
                to_json(regularity_checks(model, prior, theta, opt.mc_samples, opt.seed, opt));
            for (const ClaimId claim :
                 {ClaimId::detectability_sq, ClaimId::si_pointwise, ClaimId::h_of_y, ClaimId::ce_avg,
                  ClaimId::si_avg}) {
                res[std::string("expansion_") + to_string(claim)] = expansion_json(cfg, claim);
            }
            break;
        }
    }
    return res;
}

}  // namespace detail

/// Execute a validated config: dispatch, assemble the report (config echo,
/// results, version, wall time) and write it atomically when a path is set.
inline RunReport run(const RunConfig& cfg) {
    RunReport report;
    const auto start = std::chrono::steady_clock::now();
    const std::vector<std::string> warnings;

    json body;
    body["artifact_version"] = kVersion;
    body["command"] = cfg.command_name;
    body["config"] = cfg.echo;
    try {
        body["results"] = detail::dispatch(cfg);
    } catch (const ConvergenceError& e) {
        body["error"] = {{"kind", "convergence"}, {"message", e.what()},
                         {"best_estimate", e.best_estimate}};
        report.exit_code = 3;
    }
    body["warnings"] = warnings;
    const auto stop = std::chrono::steady_clock::now();
    body["wall_time_sec"] = std::chrono::duration<double>(stop - start).count();
    report.body = std::move(body);

    if (!cfg.output_path.empty()) {
        namespace fs = std::filesystem;
        const fs::path target(cfg.output_path);
        const fs::path tmp = target.string() + ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw DataError("cannot open output file " + tmp.string());
            if (cfg.output_format == "csv") {
                if (cfg.command != Command::roc)
                    throw ConfigError("output.format", "csv output is only defined for roc");
                const RocCurve roc =
                    roc_auc(*cfg.model, detail::task_of(cfg), cfg.method, cfg.numerics);
                roc.to_csv(out);
            } else {
                out << report.body.dump(2) << "\n";
            }
        }
        fs::rename(tmp, target);
    }
    return report;
}

}  // namespace fomlab
