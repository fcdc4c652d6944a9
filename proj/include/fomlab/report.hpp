#pragma once

#include <json.hpp>

#include "fomlab/bounds.hpp"
#include "fomlab/core.hpp"
#include "fomlab/expansions.hpp"
#include "fomlab/fisher.hpp"
#include "fomlab/info.hpp"
#include "fomlab/observer.hpp"

namespace fomlab {

using json = nlohmann::json;  // key-ordered dump gives canonical output

inline json to_json(const Estimate& e) {
    json j;
    j["value"] = e.value;
    j["std_error"] = e.std_error;
    j["method"] = to_string(e.method);
    j["effort"] = e.effort;
    if (e.seed) j["seed"] = *e.seed;
    return j;
}

inline json to_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.n; ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.n; ++j) row.push_back(m.at(i, j));
        rows.push_back(row);
    }
    return rows;
}

inline json to_json(const FisherResult& r) {
    json j;
    j["value"] = to_json(r.value);
    if (r.matrix) {
        j["matrix"] = to_json(*r.matrix);
        j["min_eigenvalue"] = *std::min_element(symmetric_eigenvalues(*r.matrix).begin(),
                                                symmetric_eigenvalues(*r.matrix).end());
    }
    if (r.form) j["form"] = to_string(*r.form);
    if (r.theta) j["theta"] = *r.theta;
    return j;
}

inline json to_json(const DetectionTask& t) {
    json j;
    j["theta0"] = t.theta0;
    j["theta1"] = t.theta1;
    j["y"] = t.y;
    j["pr0"] = t.pr0;
    j["pr1"] = t.pr1;
    return j;
}

inline json to_json(const RocCurve& r, bool include_points = true) {
    json j;
    j["auc"] = to_json(r.auc);
    j["detectability"] = r.detectability;
    if (include_points) {
        json pts = json::array();
        for (const auto& p : r.points) pts.push_back(json::array({p.fpf, p.tpf}));
        j["points"] = pts;
    }
    return j;
}

inline json to_json(const BoundReport& b) {
    json j;
    j["bound_kind"] = to_string(b.bound_kind);
    j["emse"] = to_json(b.emse);
    j["bound_value"] = to_json(b.bound_value);
    j["satisfied"] = b.satisfied;
    j["slack"] = b.slack;
    j["method"] = to_string(b.method);
    if (b.seed)
        j["seed"] = *b.seed;
    else
        j["seed"] = nullptr;
    return j;
}

inline json to_json(const ExpansionFit& f) {
    json j;
    j["claim_id"] = to_string(f.claim);
    j["grid"] = f.grid;
    json vals = json::array();
    for (const auto& v : f.values) vals.push_back(to_json(v));
    j["values"] = vals;
    j["fitted_curvature"] = to_json(f.fitted_curvature);
    j["predicted_curvature"] = f.predicted_curvature;
    j["rel_error"] = f.rel_error;
    j["quadratic_coefficient_fitted"] = f.coeff_fitted;
    if (f.coeff_display)
        j["quadratic_coefficient_paper_display"] = *f.coeff_display;
    else
        j["quadratic_coefficient_paper_display"] = nullptr;
    return j;
}

inline json to_json(const RegularityReport& r) {
    json j;
    j["lr_d1_mean"] = to_json(r.lr_d1_mean);
    j["lr_d2_mean"] = to_json(r.lr_d2_mean);
    j["ce_first_diff"] = r.ce_first_diff;
    j["h_first_diff"] = r.h_first_diff;
    j["fd_step"] = r.fd_step;
    json checks = json::array();
    for (const auto& c : r.checks) {
        json cj;
        cj["name"] = c.name;
        cj["value"] = c.value;
        cj["threshold"] = c.threshold;
        cj["pass"] = c.pass;
        checks.push_back(cj);
    }
    j["checks"] = checks;
    j["all_pass"] = r.all_pass;
    return j;
}

inline json to_json(const AveragedMetrics& a) {
    json j;
    j["avg_ce"] = to_json(a.avg_ce);
    j["avg_si"] = to_json(a.avg_si);
    j["excluded_mass"] = a.excluded_mass;
    j["trunc_lo"] = a.trunc_lo;
    j["trunc_hi"] = a.trunc_hi;
    return j;
}

}  // namespace fomlab
