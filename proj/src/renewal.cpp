#include "toff/renewal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "toff/error.hpp"

namespace toff {
namespace {

void require_rate(double rate, const char* field) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    std::ostringstream msg;
    msg << field << " must be finite and > 0, got " << rate;
    throw DomainError(msg.str());
  }
}

// Transform values shared by every case expectation.
struct Kernel {
  double es;       // session rate
  double em;       // macro rate
  double ef;       // femto rate
  double fm;       // f*_m(eta_s)
  double ff;       // f*_f(eta_s)
  double cm;       // 1 - f*_m(eta_s)
  double cf;       // 1 - f*_f(eta_s)
  double q;        // f*_m f*_f
  double denom;    // (1 - q)^2

  explicit Kernel(const ScenarioParams& p)
      : es(p.session_rate),
        em(p.macro_rate()),
        ef(p.femto_rate()),
        fm(p.macro.laplace(es)),
        ff(p.femto.laplace(es)),
        cm(p.macro.laplace_complement(es)),
        cf(p.femto.laplace_complement(es)),
        q(fm * ff) {
    const double one_minus_q = -std::expm1(p.macro.log_laplace(es) + p.femto.log_laplace(es));
    denom = one_minus_q * one_minus_q;
  }

  // Crossing-count weights with the geometric series already summed, one per
  // sub-case: the common factor of every E[X ; sub-case | start cell].
  double w11() const { return em / es * ff * cm * cm / denom; }
  double w12() const { return em / es * cf * cm / denom; }
  double w21() const { return ef / es * cf * cm / denom; }
  double w22() const { return ef / es * fm * cf * cf / denom; }
};

double relative_gap(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

}  // namespace

void ScenarioParams::validate() const {
  require_rate(session_rate, "session_rate");
  require_rate(threshold_rate, "threshold_rate");
}

ScenarioParams ScenarioParams::with_threshold_rate(double rate) const {
  ScenarioParams copy = *this;
  copy.threshold_rate = rate;
  return copy;
}

CaseProbabilities case_probabilities(const ScenarioParams& p) {
  p.validate();
  const double em = p.macro_rate();
  const double ef = p.femto_rate();
  const double case1 = ef / (ef + em);
  return {case1, 1.0 - case1};
}

double baseline_handover_count(const ScenarioParams& p) {
  p.validate();
  const double em = p.macro_rate();
  const double ef = p.femto_rate();
  return 2.0 * em * ef / (p.session_rate * (em + ef));
}

HandoverSuccess handover_success_probs(const ScenarioParams& p) {
  p.validate();
  const double es = p.session_rate;
  const double h = p.threshold_rate;
  const double cf = p.femto.laplace_complement(es);
  if (!(cf > 0.0)) {
    throw DomainError("femto law gives f*_f(session_rate) = 1; beta is undefined");
  }
  const double alpha = p.femto.laplace_drop(es, h);
  const double gap = p.femto.secant_gap(es, h);
  const double y2 = p.femto.residual_weighted_moment(es);
  const double beta = h * es * (es * p.femto.mean() * y2 + gap) / ((es + h) * cf);
  return {alpha, beta};
}

double crossing_count_pmf(const ScenarioParams& p, StartCell start, unsigned crossings) {
  p.validate();
  const Kernel k(p);
  const bool macro_start = start == StartCell::Macro;
  // Probability that the session outlives the residual of the start cell.
  const double leave = macro_start ? p.macro.residual_laplace(k.es) : p.femto.residual_laplace(k.es);
  if (crossings == 0) return 1.0 - leave;
  // After leaving, the UE is in the other cell; an even count means the
  // session ends back in the start cell.
  const double f_other = macro_start ? k.ff : k.fm;
  const double c_other = macro_start ? k.cf : k.cm;
  const double c_start = macro_start ? k.cm : k.cf;
  const unsigned i = crossings / 2;
  if (crossings % 2 == 0) return leave * f_other * c_start * std::pow(k.q, i - 1);
  return leave * c_other * std::pow(k.q, i);
}

double crossing_count_mean(const ScenarioParams& p, StartCell start) {
  p.validate();
  const Kernel k(p);
  const bool macro_start = start == StartCell::Macro;
  const double leave = macro_start ? p.macro.residual_laplace(k.es) : p.femto.residual_laplace(k.es);
  const double f_other = macro_start ? k.ff : k.fm;
  const double c_other = macro_start ? k.cf : k.cm;
  const double c_start = macro_start ? k.cm : k.cf;
  // sum 2i q^(i-1) = 2/(1-q)^2 ; sum (2i+1) q^i = (1+q)/(1-q)^2
  return leave * (2.0 * f_other * c_start + c_other * (1.0 + k.q)) / k.denom;
}

OffloadTimeMeans offload_time_means(const ScenarioParams& p) {
  p.validate();
  const double es = p.session_rate;
  const double h = p.threshold_rate;
  const ResidenceLaw& femto = p.femto;

  const double ff = femto.laplace(es);
  const double cf = femto.laplace_complement(es);
  const double y1 = femto.weighted_moment(es);
  const double y2 = femto.residual_weighted_moment(es);
  const double residual_survive = femto.residual_laplace(es);

  OffloadTimeMeans m{};
  m.xi = y1 / ff;
  m.tau = residual_survive > 0.0 ? y2 / residual_survive : 0.0;
  m.sigma = m.tau;

  const HandoverSuccess probs = handover_success_probs(p);
  const double gap = femto.secant_gap(es, h);
  m.alpha_phi = gap / ff;
  m.phi = probs.alpha > 0.0 ? m.alpha_phi / probs.alpha : 0.0;
  m.beta_rho = es * (h * femto.mean() * y2 - gap) / ((es + h) * cf);
  m.rho = probs.beta > 0.0 ? m.beta_rho / probs.beta : 0.0;
  return m;
}

Expectation to_handover_count(const ScenarioParams& p) {
  const Kernel k(p);
  const auto [alpha, beta] = handover_success_probs(p);
  const auto [case1, case2] = case_probabilities(p);
  CaseValues c;
  c.case_1_1 = k.w11() * (1.0 + alpha);
  c.case_1_2 = k.w12() * (beta + (1.0 + alpha - beta) * k.q);
  c.case_2_1 = k.w21() * (1.0 + alpha * k.q);
  c.case_2_2 = k.w22() * (1.0 + beta + (alpha - beta) * k.q);
  return {c.combine(case1, case2), c};
}

Expectation baseline_offload_time(const ScenarioParams& p) {
  const Kernel k(p);
  const OffloadTimeMeans m = offload_time_means(p);
  const auto [case1, case2] = case_probabilities(p);
  CaseValues c;
  c.case_1_1 = k.w11() * m.xi;
  c.case_1_2 = k.w12() * (m.sigma + (m.xi - m.sigma) * k.q);
  c.case_2_1 = k.w21() * (m.tau + (m.xi - m.tau) * k.q);
  c.case_2_2 = k.w22() * (m.tau + m.sigma + (m.xi - m.tau - m.sigma) * k.q);
  return {c.combine(case1, case2), c};
}

Expectation to_offload_time(const ScenarioParams& p) {
  const Kernel k(p);
  const OffloadTimeMeans m = offload_time_means(p);
  const auto [case1, case2] = case_probabilities(p);
  const double ap = m.alpha_phi;
  const double br = m.beta_rho;
  CaseValues c;
  c.case_1_1 = k.w11() * ap;
  c.case_1_2 = k.w12() * (br + (ap - br) * k.q);
  c.case_2_1 = k.w21() * (m.tau + (ap - m.tau) * k.q);
  c.case_2_2 = k.w22() * (m.tau + br + (ap - m.tau - br) * k.q);
  return {c.combine(case1, case2), c};
}

double theta(const ScenarioParams& p) {
  const double nb = baseline_handover_count(p);
  return (nb - to_handover_count(p).total) / nb;
}

double lambda(const ScenarioParams& p) {
  return to_offload_time(p).total / baseline_offload_time(p).total;
}

double theta_closed_form(const ScenarioParams& p) {
  p.validate();
  const double es = p.session_rate;
  const double eo = p.threshold_rate;
  return (es + eo * p.femto.laplace(es + eo)) / (2.0 * (es + eo));
}

double lambda_closed_form(const ScenarioParams& p) {
  p.validate();
  const double es = p.session_rate;
  const double eo = p.threshold_rate;
  const double ef = p.femto_rate();
  const double ff = p.femto.laplace(es);
  const double y1 = p.femto.weighted_moment(es);
  const double y2 = p.femto.residual_weighted_moment(es);
  // eta_o - (eta_s + eta_o) f*_f(eta_s) + eta_s f*_f(eta_s + eta_o)
  //   = eta_o (1 - f*_f(eta_s)) - eta_s (f*_f(eta_s) - f*_f(eta_s + eta_o))
  const double drop = ff * p.femto.laplace_drop(es, eo);
  const double numer =
      ef * (eo * p.femto.laplace_complement(es) - es * drop) + es * es * (es + eo) * y2;
  const double denom = es * (es + eo) * (ef * y1 + 2.0 * es * y2);
  return numer / denom;
}

AnalyticReport analyze(const ScenarioParams& p) {
  p.validate();
  AnalyticReport r;
  const Kernel k(p);

  const auto probs = case_probabilities(p);
  r.prob_case1 = probs.case1;
  r.prob_case2 = probs.case2;

  const auto [alpha, beta] = handover_success_probs(p);
  r.alpha = alpha;
  r.beta = beta;

  const OffloadTimeMeans m = offload_time_means(p);
  r.tau = m.tau;
  r.sigma = m.sigma;
  r.xi = m.xi;
  r.phi = m.phi;
  r.rho = m.rho;

  r.crossing_ratio = k.q;
  const double share = k.ef * k.em / (k.es * (k.ef + k.em) * k.denom);
  r.x1 = share * k.ff * k.cm * k.cm;
  r.x2 = share * k.cf * k.cm;
  r.x3 = share * k.fm * k.cf * k.cf;
  r.y1 = p.femto.weighted_moment(k.es);
  r.y2 = p.femto.residual_weighted_moment(k.es);

  r.e_nb = baseline_handover_count(p);
  const Expectation nt = to_handover_count(p);
  const Expectation tb = baseline_offload_time(p);
  const Expectation tt = to_offload_time(p);
  r.e_nt = nt.total;
  r.e_tb = tb.total;
  r.e_tt = tt.total;
  r.handovers_to = nt.per_case;
  r.offload_baseline = tb.per_case;
  r.offload_to = tt.per_case;

  r.theta = (r.e_nb - r.e_nt) / r.e_nb;
  r.lambda = r.e_tt / r.e_tb;
  r.theta_closed_form = theta_closed_form(p);
  r.lambda_closed_form = lambda_closed_form(p);

  // E[t_s ; t_s < psi_f] = (1 - f*_psi(eta_s) - eta_s Y2) / eta_s
  r.zero_crossing_offload =
      r.prob_case2 * (1.0 - p.femto.residual_laplace(k.es) - k.es * r.y2) / k.es;

  try {
    verify_closed_forms(r);
  } catch (const ConsistencyError& e) {
    r.warnings.emplace_back(e.what());
  }
  return r;
}

void verify_closed_forms(const AnalyticReport& report, double rel_tol) {
  std::ostringstream msg;
  msg.precision(12);
  const double theta_gap = relative_gap(report.theta, report.theta_closed_form);
  const double lambda_gap = relative_gap(report.lambda, report.lambda_closed_form);
  if (theta_gap > rel_tol) {
    msg << "theta case sum " << report.theta << " vs closed form " << report.theta_closed_form
        << " (relative gap " << theta_gap << ")";
  }
  if (lambda_gap > rel_tol) {
    if (msg.tellp() > 0) msg << "; ";
    msg << "lambda case sum " << report.lambda << " vs closed form "
        << report.lambda_closed_form << " (relative gap " << lambda_gap << ")";
  }
  if (msg.tellp() > 0) throw ConsistencyError(msg.str());
}

}  // namespace toff
