#include "eot/eot.h"

#include <cstring>
#include <exception>
#include <new>
#include <optional>
#include <string>

#include "eot/error.hpp"
#include "eot/limits.hpp"
#include "eot/multimarginal.hpp"
#include "eot/oracle.hpp"
#include "eot/sinkhorn.hpp"

struct eot_instance {
  eot::Instance inst;
};

struct eot_report {
  eot::SolveReport rep;
};

struct eot_study {
  eot::EpsStudyReport rep;
};

namespace {

thread_local std::string last_error;

eot_status fail(eot_status status, const char* what) {
  last_error = what;
  return status;
}

template <class F>
eot_status guarded(F&& body) {
  try {
    last_error.clear();
    return body();
  } catch (const eot::Error& e) {
    return fail(static_cast<eot_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(EOT_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(EOT_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(EOT_ERR_INTERNAL, "unknown failure");
  }
}

eot::SolveOptions convert(const eot_solve_options* in) {
  eot::SolveOptions o;
  if (!in) return o;
  o.tol_potential = in->tol_potential;
  o.tol_marginal = in->tol_marginal;
  o.max_iters = in->max_iters;
  if (in->eps_schedule && in->eps_schedule_len > 0) {
    o.eps_schedule.assign(in->eps_schedule, in->eps_schedule + in->eps_schedule_len);
  }
  o.threads = in->threads == 0 ? 1 : in->threads;
  return o;
}

eot::CtildeOptions convert(const eot_ctilde_options& in) {
  eot::CtildeOptions o;
  o.samples = in.samples;
  o.eta = in.eta;
  o.seed = in.seed;
  o.plateau_tol = in.plateau_tol;
  return o;
}

eot::RadiusSchedule schedule_of(const eot_ctilde_options& in) {
  if (in.radii && in.radii_len > 0) {
    return eot::RadiusSchedule(std::vector<double>(in.radii, in.radii + in.radii_len));
  }
  return eot::RadiusSchedule::geometric();
}

eot_ctilde_options ctilde_defaults() {
  eot_ctilde_options o;
  eot_ctilde_options_default(&o);
  return o;
}

eot::CostSpec named_cost(const char* name, double exponent) {
  if (!name) throw eot::Error(eot::ErrorCode::InvalidArgument, "cost name is null");
  if (std::strcmp(name, "power-distance") == 0) return eot::CostSpec::power_distance(exponent);
  return eot::CostSpec::custom(name);
}

eot_status solve_into(const eot_instance* inst, double epsilon, const eot_solve_options* opts,
                      eot_report** out, bool multi) {
  if (!inst || !out) return fail(EOT_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    const eot::SolveOptions o = convert(opts);
    const eot::Epsilon eps(epsilon);
    auto* r = new eot_report{multi ? eot::mm_sinkhorn(inst->inst, eps, o)
                                   : eot::sinkhorn_solve(inst->inst, eps, o)};
    *out = r;
    if (!r->rep.converged) {
      return fail(EOT_ERR_MAX_ITERS, "iteration limit reached before the tolerances were met");
    }
    return EOT_OK;
  });
}

}  // namespace

extern "C" {

const char* eot_last_error(void) { return last_error.c_str(); }

const char* eot_status_string(eot_status status) {
  if (status == EOT_OK) return "ok";
  if (status == EOT_ERR_INTERNAL) return "internal error";
  return eot::to_string(static_cast<eot::ErrorCode>(status));
}

int eot_status_is_validation(eot_status status) {
  if (status == EOT_OK || status == EOT_ERR_INTERNAL) return 0;
  return eot::Error(static_cast<eot::ErrorCode>(status), "").is_validation() ? 1 : 0;
}

eot_status eot_instance_from_json(const char* text, eot_instance** out) {
  if (!text || !out) return fail(EOT_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *out = new eot_instance{eot::parse_instance_json(text)};
    return EOT_OK;
  });
}

eot_status eot_instance_from_file(const char* path, eot_instance** out) {
  if (!path || !out) return fail(EOT_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *out = new eot_instance{eot::load_instance_file(path)};
    return EOT_OK;
  });
}

eot_status eot_instance_from_matrix(const double* mu, size_t n, const double* nu, size_t m,
                                    const double* cost, eot_instance** out) {
  if (!out || (n > 0 && !mu) || (m > 0 && !nu) || (n * m > 0 && !cost)) {
    return fail(EOT_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    std::vector<eot::DiscreteMeasure> measures{
        eot::make_indexed_measure(std::vector<double>(mu, mu + n)),
        eot::make_indexed_measure(std::vector<double>(nu, nu + m))};
    eot::CostTensor c({n, m}, std::vector<double>(cost, cost + n * m));
    *out = new eot_instance{eot::Instance::from_cost(std::move(measures), std::move(c))};
    return EOT_OK;
  });
}

eot_status eot_instance_counterexample(size_t n, eot_instance** out) {
  if (!out) return fail(EOT_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *out = new eot_instance{eot::counterexample_instance(n)};
    return EOT_OK;
  });
}

void eot_instance_free(eot_instance* inst) { delete inst; }

size_t eot_instance_num_marginals(const eot_instance* inst) {
  return inst ? inst->inst.num_marginals() : 0;
}

size_t eot_instance_marginal_size(const eot_instance* inst, size_t i) {
  if (!inst || i >= inst->inst.num_marginals()) return 0;
  return inst->inst.measure(i).size();
}

size_t eot_instance_dimension(const eot_instance* inst, size_t i) {
  if (!inst || i >= inst->inst.num_marginals()) return 0;
  return inst->inst.measure(i).dimension();
}

double eot_instance_K(const eot_instance* inst) { return inst ? inst->inst.K() : 0.0; }

const char* eot_instance_digest(const eot_instance* inst) {
  return inst ? inst->inst.digest().c_str() : "";
}

const double* eot_instance_cost(const eot_instance* inst, size_t* len) {
  if (!inst) return nullptr;
  const auto data = inst->inst.cost().data();
  if (len) *len = data.size();
  return data.data();
}

void eot_solve_options_default(eot_solve_options* opts) {
  if (!opts) return;
  const eot::SolveOptions d;
  opts->tol_potential = d.tol_potential;
  opts->tol_marginal = d.tol_marginal;
  opts->max_iters = d.max_iters;
  opts->eps_schedule = nullptr;
  opts->eps_schedule_len = 0;
  opts->threads = d.threads;
}

eot_status eot_solve(const eot_instance* inst, double epsilon, const eot_solve_options* opts,
                     eot_report** out) {
  return solve_into(inst, epsilon, opts, out, false);
}

eot_status eot_mm_solve(const eot_instance* inst, double epsilon, const eot_solve_options* opts,
                        eot_report** out) {
  return solve_into(inst, epsilon, opts, out, true);
}

void eot_report_free(eot_report* report) { delete report; }

double eot_report_epsilon(const eot_report* r) { return r ? r->rep.epsilon : 0.0; }
double eot_report_dual(const eot_report* r) { return r ? r->rep.dual_value : 0.0; }
double eot_report_primal(const eot_report* r) { return r ? r->rep.primal_value : 0.0; }
double eot_report_gap(const eot_report* r) { return r ? r->rep.gap : 0.0; }
double eot_report_marginal_residual(const eot_report* r) { return r ? r->rep.marginal_residual : 0.0; }
double eot_report_K(const eot_report* r) { return r ? r->rep.K : 0.0; }
size_t eot_report_iterations(const eot_report* r) { return r ? r->rep.iterations : 0; }
size_t eot_report_total_iterations(const eot_report* r) { return r ? r->rep.total_iterations : 0; }
int eot_report_converged(const eot_report* r) { return r && r->rep.converged ? 1 : 0; }

size_t eot_report_num_potentials(const eot_report* r) { return r ? r->rep.potentials.size() : 0; }

const double* eot_report_potential(const eot_report* r, size_t i, size_t* len) {
  if (!r || i >= r->rep.potentials.size()) return nullptr;
  if (len) *len = r->rep.potentials[i].size();
  return r->rep.potentials[i].data();
}

const double* eot_report_plan(const eot_report* r, size_t* len) {
  if (!r) return nullptr;
  if (len) *len = r->rep.plan.weights.size();
  return r->rep.plan.weights.data();
}

const size_t* eot_report_plan_shape(const eot_report* r, size_t* rank) {
  if (!r) return nullptr;
  if (rank) *rank = r->rep.plan.shape.size();
  return r->rep.plan.shape.data();
}

size_t eot_report_trace_length(const eot_report* r) { return r ? r->rep.trace.size() : 0; }

eot_status eot_report_trace_row(const eot_report* r, size_t k, eot_trace_row* row) {
  if (!r || !row) return fail(EOT_ERR_INVALID_ARGUMENT, "null argument");
  if (k >= r->rep.trace.size()) return fail(EOT_ERR_INVALID_ARGUMENT, "trace index out of range");
  const eot::TraceRow& t = r->rep.trace[k];
  *row = {t.iter, t.dual, t.primal, t.gap, t.marginal_residual, t.elapsed_ms};
  return EOT_OK;
}

eot_status eot_exact_oracle(const eot_instance* inst, double* value, double* plan_out) {
  if (!inst || !value) return fail(EOT_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const eot::Instance& in = inst->inst;
    const eot::OracleResult res =
        in.num_marginals() == 2 ? eot::exact_ot_oracle(in.cost(), in.measure(0), in.measure(1))
                                : eot::mm_exact_oracle(in.cost(), in.measures());
    *value = res.value;
    if (plan_out) std::copy(res.plan.weights.begin(), res.plan.weights.end(), plan_out);
    return EOT_OK;
  });
}

void eot_ctilde_options_default(eot_ctilde_options* opts) {
  if (!opts) return;
  const eot::CtildeOptions d;
  opts->samples = d.samples;
  opts->eta = d.eta;
  opts->seed = d.seed;
  opts->plateau_tol = d.plateau_tol;
  opts->box_lo = 0.0;
  opts->box_hi = 1.0;
  opts->radii = nullptr;
  opts->radii_len = 0;
}

eot_status eot_ctilde_estimate(const char* cost_name, double exponent, size_t dim, const double* x,
                               const double* y, const eot_ctilde_options* opts, double* value) {
  if (!x || !y || !value) return fail(EOT_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const eot_ctilde_options o = opts ? *opts : ctilde_defaults();
    const eot::PairCost cost = eot::analytic_pair_cost(named_cost(cost_name, exponent));
    const eot::UniformBoxSampler box(o.box_lo, o.box_hi, dim);
    *value = eot::ctilde_estimate(cost, box, box, eot::Point(x, x + dim), eot::Point(y, y + dim),
                                  schedule_of(o), convert(o))
                 .value;
    return EOT_OK;
  });
}

eot_status eot_ctilde_tabulate(const eot_instance* inst, const eot_ctilde_options* opts, double* out) {
  if (!inst || !out) return fail(EOT_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const eot::Instance& in = inst->inst;
    if (in.num_marginals() != 2) {
      throw eot::Error(eot::ErrorCode::DimensionMismatch, "c~ tables need two marginals");
    }
    const eot_ctilde_options o = opts ? *opts : ctilde_defaults();
    const eot::PairCost cost = eot::analytic_pair_cost(in.spec());
    const eot::UniformBoxSampler first(o.box_lo, o.box_hi, in.measure(0).dimension());
    const eot::UniformBoxSampler second(o.box_lo, o.box_hi, in.measure(1).dimension());
    const eot::CostMatrix table = eot::ctilde_tabulate(cost, first, second, in.measure(0),
                                                       in.measure(1), schedule_of(o), convert(o));
    std::copy(table.data().begin(), table.data().end(), out);
    return EOT_OK;
  });
}

uint64_t eot_derive_seed(uint64_t base, uint64_t a, uint64_t b) { return eot::derive_seed(base, a, b); }

eot_status eot_eps_study(const eot_instance* inst, const double* eps_list, size_t len,
                         const eot_solve_options* opts, const double* ctilde_cost, eot_study** out) {
  if (!inst || !out || (len > 0 && !eps_list)) return fail(EOT_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    const eot::Instance& in = inst->inst;
    std::optional<eot::CostMatrix> table;
    if (ctilde_cost) {
      if (in.num_marginals() != 2) {
        throw eot::Error(eot::ErrorCode::DimensionMismatch, "epsilon study needs two marginals");
      }
      const std::size_t n = in.measure(0).size(), m = in.measure(1).size();
      table.emplace(std::vector<std::size_t>{n, m}, std::vector<double>(ctilde_cost, ctilde_cost + n * m));
    }
    *out = new eot_study{eot::eps_limit_study(in, std::span<const double>(eps_list, len), convert(opts),
                                              table ? &*table : nullptr)};
    return EOT_OK;
  });
}

void eot_study_free(eot_study* study) { delete study; }

size_t eot_study_length(const eot_study* s) { return s ? s->rep.rows.size() : 0; }

eot_status eot_study_row_at(const eot_study* s, size_t k, eot_study_row* row) {
  if (!s || !row) return fail(EOT_ERR_INVALID_ARGUMENT, "null argument");
  if (k >= s->rep.rows.size()) return fail(EOT_ERR_INVALID_ARGUMENT, "study index out of range");
  const eot::EpsStudyRow& r = s->rep.rows[k];
  *row = {r.epsilon, r.dual, r.primal, r.gap, r.oracle_gap, r.kantorovich_residual, r.iterations,
          r.converged ? 1 : 0};
  return EOT_OK;
}

double eot_study_oracle_value(const eot_study* s) { return s ? s->rep.oracle_value : 0.0; }

int eot_study_uses_ctilde(const eot_study* s) {
  return s && s->rep.oracle_cost == eot::OracleCost::CtildeTabulated ? 1 : 0;
}

eot_status eot_sha256_hex(const void* data, size_t len, char* out) {
  if ((!data && len > 0) || !out) return fail(EOT_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const std::string hex = eot::sha256_hex({static_cast<const std::byte*>(data), len});
    std::memcpy(out, hex.c_str(), hex.size() + 1);
    return EOT_OK;
  });
}

eot_status eot_coulomb_lipschitz_bound(double M, double alpha, double epsilon, double K, double* L,
                                       double* transform_lipschitz) {
  if (!L || !transform_lipschitz) return fail(EOT_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const eot::LipschitzBound b = eot::coulomb_lipschitz_bound(M, alpha, epsilon, K);
    *L = b.L;
    *transform_lipschitz = b.transform_lipschitz;
    return EOT_OK;
  });
}

}  // extern "C"
