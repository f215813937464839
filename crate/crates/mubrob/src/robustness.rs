//! Orchestration: computes eta* by the cheapest reliable route.
//!
//! Order of preference:
//! 1. certificate path — dual ansatz for the upper bound, educated-guess
//!    parent POVM verified against it (exact when it succeeds);
//! 2. SDP — interior-point solve of the robustness program, with a bisection
//!    fallback on eta if the solver hits its iteration cap;
//! 3. bounds only — the analytic sandwich [eta_low, eta_up].

use crate::bounds::{compute_lambda, eta_low_recursive, DEFAULT_TIE_TOL};
use crate::parent::{
    check_parent, dual_ansatz, parent_guess_from_lambda, PARENT_RESIDUAL_TOL,
};
use crate::report::{
    CertificateInfo, Method, RobustnessReport, SdpInfo, Timings, Tolerances,
};
use crate::sdp::{
    build_primal_budget, solve_sdp_max_iter, Constraint, SdpStatus, DEFAULT_BLOCK_BUDGET,
    DEFAULT_GAP_TOL, DEFAULT_MAX_ITER,
};
use crate::mub::MeasurementSet;
use crate::{Error, Result};
use std::time::Instant;

#[derive(Debug, Clone)]
pub struct RobustnessOptions {
    pub gap_tol: f64,
    pub tie_tol: f64,
    pub sdp_block_budget: u64,
    pub sdp_max_iter: usize,
    /// when false, never run the SDP (bounds/certificate only)
    pub allow_sdp: bool,
    /// when false, skip the parent-POVM certificate attempt
    pub allow_certificate: bool,
}

impl Default for RobustnessOptions {
    fn default() -> Self {
        RobustnessOptions {
            gap_tol: DEFAULT_GAP_TOL,
            tie_tol: DEFAULT_TIE_TOL,
            sdp_block_budget: DEFAULT_BLOCK_BUDGET,
            sdp_max_iter: DEFAULT_MAX_ITER,
            allow_sdp: true,
            allow_certificate: true,
        }
    }
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn pairwise_unbiased(m: &MeasurementSet) -> bool {
    let Some(vectors) = &m.vectors else { return false };
    let d = m.dim as f64;
    for x in 0..m.k() {
        for y in (x + 1)..m.k() {
            for va in &vectors[x] {
                for vb in &vectors[y] {
                    let ov: crate::linalg::C64 =
                        va.iter().zip(vb).map(|(a, b)| a.conj() * b).sum();
                    if (ov.norm_sqr() - 1.0 / d).abs() > 1e-8 {
                        return false;
                    }
                }
            }
        }
    }
    true
}

pub fn robustness(m: &MeasurementSet, opts: &RobustnessOptions) -> Result<RobustnessReport> {
    let total = Instant::now();
    let d = m.dim;
    let k = m.k();
    let mut timings = Timings::default();
    let tolerances = Tolerances {
        gap_tol: opts.gap_tol,
        tie_tol: opts.tie_tol,
        parent_residual_tol: PARENT_RESIDUAL_TOL,
    };

    // analytic sandwich: eta >= 1/k always (G^(1)); the recursive bound
    // applies to pairwise-unbiased rank-one sets with k <= d + 1
    let bounds_t = Instant::now();
    let mut lower = 1.0 / k as f64;
    if k <= d + 1 && pairwise_unbiased(m) {
        if let Ok(low) = eta_low_recursive(k, d) {
            lower = lower.max(low.value);
        }
    }
    let cert = dual_ansatz(m)?;
    let upper = cert.value;
    timings.bounds_ms = Some(ms(bounds_t));
    let mut certificate = CertificateInfo {
        lambda: cert.lambda,
        scalar_residual: cert.scalar_residual,
        min_tuple_eigenvalue: cert.min_tuple_eigenvalue,
        parent_marginal_residual: None,
    };

    // certificate path: guess a parent POVM at the noise level eta_up; if its
    // marginals verify, primal and dual objectives meet and eta* = eta_up
    if opts.allow_certificate {
        let cert_t = Instant::now();
        let lam = compute_lambda(m, opts.tie_tol)?;
        let verified = parent_guess_from_lambda(m, &lam, opts.tie_tol)
            .and_then(|g| check_parent(&g, m).map(|eta| (g, eta)));
        timings.certificate_ms = Some(ms(cert_t));
        if let Ok((g, eta)) = verified {
            let mut residual = 0.0f64;
            for (x, ops) in m.operators.iter().enumerate() {
                for (a, op) in ops.iter().enumerate() {
                    let mut model = op.matrix().scale_re(eta);
                    model.add_assign_scaled(
                        &crate::linalg::CMat::identity(d),
                        (1.0 - eta) * op.trace_re() / d as f64,
                    );
                    residual = residual.max(g.marginal(x, a).sub(&model).max_abs());
                }
            }
            certificate.parent_marginal_residual = Some(residual);
            timings.total_ms = ms(total);
            return Ok(RobustnessReport {
                d,
                k,
                eta,
                method: Method::Certificate,
                lower: lower.max(eta),
                upper,
                gap: upper - eta,
                certificate: Some(certificate),
                sdp: None,
                tolerances,
                timings,
            });
        }
    }

    // SDP path
    if opts.allow_sdp {
        match build_primal_budget(m, opts.sdp_block_budget) {
            Ok(p) => {
                let sdp_t = Instant::now();
                let sol = solve_sdp_max_iter(&p, opts.gap_tol, opts.sdp_max_iter)?;
                let (eta, info) = match sol.status {
                    SdpStatus::Optimal => (
                        sol.eta(),
                        SdpInfo {
                            iterations: sol.iterations,
                            gap: sol.gap.abs(),
                            status: "optimal".into(),
                        },
                    ),
                    _ => {
                        // bisection fallback on eta with feasibility subproblems
                        let eta = bisect_eta(m, lower, upper, opts)?;
                        (
                            eta,
                            SdpInfo {
                                iterations: sol.iterations,
                                gap: 5e-5,
                                status: "max-iter; bisection fallback".into(),
                            },
                        )
                    }
                };
                timings.sdp_ms = Some(ms(sdp_t));
                timings.total_ms = ms(total);
                return Ok(RobustnessReport {
                    d,
                    k,
                    eta,
                    method: Method::Sdp,
                    lower: lower.max(eta - opts.gap_tol.max(info.gap)),
                    upper: upper.min(eta + opts.gap_tol.max(info.gap)),
                    gap: info.gap,
                    certificate: Some(certificate),
                    sdp: Some(info),
                    tolerances,
                    timings,
                });
            }
            Err(Error::BudgetExceeded(_)) => {} // fall through to bounds-only
            Err(e) => return Err(e),
        }
    }

    timings.total_ms = ms(total);
    Ok(RobustnessReport {
        d,
        k,
        eta: upper,
        method: Method::BoundsOnly,
        lower,
        upper,
        gap: upper - lower,
        certificate: Some(certificate),
        sdp: None,
        tolerances,
        timings,
    })
}

/// Feasibility test: is the noisy set at level eta jointly measurable?
/// Reuses the primal encoding with eta pinned by an extra constraint; the
/// interior point drives the primal residual to zero iff feasible.
fn eta_feasible(m: &MeasurementSet, eta: f64, opts: &RobustnessOptions) -> Result<bool> {
    let mut p = build_primal_budget(m, opts.sdp_block_budget)?;
    let meta = p.meta.as_ref().unwrap();
    let eta_block = meta.eta_block as u32;
    p.constraints.push(Constraint {
        terms: vec![(eta_block, crate::sdp::SparseHerm::scalar_entry(1.0))],
    });
    p.b.push(eta);
    // a numerically failing solve on the pinned problem signals infeasibility
    // (the robustness primal itself is always feasible at eta = 0)
    match solve_sdp_max_iter(&p, 1e-7, opts.sdp_max_iter) {
        Ok(sol) => Ok(sol.status == SdpStatus::Optimal),
        Err(Error::SdpFailure(_)) => Ok(false),
        Err(e) => Err(e),
    }
}

fn bisect_eta(
    m: &MeasurementSet,
    mut lo: f64,
    mut hi: f64,
    opts: &RobustnessOptions,
) -> Result<f64> {
    while hi - lo > 5e-5 {
        let mid = 0.5 * (lo + hi);
        if eta_feasible(m, mid, opts)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mub::{build_for_dim, to_measurements};

    fn first_k(d: u64, k: usize) -> MeasurementSet {
        let m = build_for_dim(d).unwrap();
        to_measurements(&m, &(0..k).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn certificate_path_pair_d7() {
        let rep = robustness(&first_k(7, 2), &RobustnessOptions::default()).unwrap();
        assert_eq!(rep.method, Method::Certificate);
        let expect = (5.0 + 7f64.sqrt()) / 12.0;
        assert!((rep.eta - expect).abs() < 1e-9, "eta {}", rep.eta);
        assert!(rep.lower <= rep.eta + 1e-12 && rep.eta <= rep.upper + 1e-12);
    }

    #[test]
    fn sdp_path_d4_k3() {
        let opts = RobustnessOptions { allow_certificate: false, ..Default::default() };
        let rep = robustness(&first_k(4, 3), &opts).unwrap();
        assert_eq!(rep.method, Method::Sdp);
        assert!((rep.eta - 0.5469).abs() < 5e-4, "eta {}", rep.eta);
        assert!(rep.lower <= rep.eta && rep.eta <= rep.upper);
    }

    #[test]
    fn d4_k3_certificate_fails_over_to_sdp() {
        // d=4, k=3 is a non-tight cell: the guess must not verify, and the
        // orchestrator should land on the SDP with eta < eta_up
        let rep = robustness(&first_k(4, 3), &RobustnessOptions::default()).unwrap();
        assert_eq!(rep.method, Method::Sdp);
        assert!((rep.eta - 0.5469).abs() < 5e-4, "eta {}", rep.eta);
    }

    #[test]
    fn bounds_only_when_sdp_disallowed() {
        let opts = RobustnessOptions {
            allow_certificate: false,
            allow_sdp: false,
            ..Default::default()
        };
        let rep = robustness(&first_k(4, 3), &opts).unwrap();
        assert_eq!(rep.method, Method::BoundsOnly);
        assert!(rep.lower < rep.upper);
        assert!(rep.lower > 0.5 && rep.upper < 0.56);
    }

    #[test]
    fn bisection_fallback_matches_sdp_value() {
        let m = first_k(2, 3);
        let opts = RobustnessOptions::default();
        let eta = bisect_eta(&m, 0.4, 0.7, &opts).unwrap();
        assert!((eta - 1.0 / 3f64.sqrt()).abs() < 5e-5, "eta {eta}");
    }

    #[test]
    fn sandwich_invariant_small_cases() {
        for d in [2u64, 3, 4, 5] {
            for k in 2..=(d as usize + 1) {
                let rep = robustness(&first_k(d, k), &RobustnessOptions::default()).unwrap();
                let low = eta_low_recursive(k, d as usize).unwrap().value;
                assert!(
                    low <= rep.eta + 1e-6 && rep.eta <= rep.upper + 1e-6,
                    "(d,k)=({d},{k}): {low} {} {}",
                    rep.eta,
                    rep.upper
                );
            }
        }
    }
}
