//! The invariant suite run by `salem verify`.

use salem_core::energy::{energy_check_from_table, energy_table, l2r_check_from_table};
use salem_core::norms::{ball_condition_report, holder_chain_check, mass_check, QuadraturePlan};
use salem_core::spectral::{
    f_mu_hat, parseval_relative_error, telescope_check, trivial_bound_check, FrequencyPlan,
};
use salem_core::{Construction, Error};

use crate::manifest::CheckRecord;

#[derive(Debug, Clone)]
pub struct SuiteOptions {
    /// Every `k` below this is checked; `samples` more are drawn beyond it.
    pub dense: i64,
    pub samples: usize,
    pub sample_max: i64,
    pub energy_orders: Vec<u32>,
    pub l2r_order: u32,
    pub holder_ps: Vec<f64>,
    pub quadrature: QuadraturePlan,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            dense: 1 << 16,
            samples: 512,
            sample_max: 1 << 40,
            energy_orders: vec![2, 3],
            l2r_order: 3,
            holder_ps: vec![2.0, 3.0, 4.0],
            quadrature: QuadraturePlan::default(),
        }
    }
}

fn failed_with(mut check: CheckRecord, e: &Error) -> CheckRecord {
    check.fail(e.to_string());
    check
}

/// Runs every check; stops after the structural one if that fails, since
/// nothing downstream is meaningful on a malformed construction.
pub fn run_suite(construction: &Construction, opts: &SuiteOptions) -> Vec<CheckRecord> {
    let mut out = Vec::new();
    let mut structure = CheckRecord::new(
        "construction-invariants",
        "construction",
        "cardinalities, ranges, nesting and structured nesting of every level",
    );
    if let Err(e) = construction.check_invariants() {
        if let Error::Invariant { name, level, .. } = &e {
            structure.witness = Some(format!("{name} at level {level}"));
        }
        out.push(failed_with(structure, &e));
        return out;
    }
    out.push(structure);

    out.push(parseval(construction, opts));
    out.push(normalization(construction, opts));
    out.push(telescoping(construction, opts));
    out.push(trivial_decay(construction, opts));
    out.push(mass_identity(construction, opts));
    out.extend(energy_bounds(construction, opts));
    out.push(holder_chain(construction, opts));
    out.push(ball_condition(construction, opts));
    out
}

fn parseval(c: &Construction, _: &SuiteOptions) -> CheckRecord {
    let mut check = CheckRecord::new(
        "parseval",
        "spectral",
        "sum_k<P |S(k)|^2 = P |A_j| to relative 1e-6",
    );
    for level in &c.levels {
        match parseval_relative_error(&level.atoms, c.params.scale(level.j)) {
            Ok(err) => check.record(err <= 1e-6, 1.0 - err / 1e-6, || format!("j={}", level.j)),
            Err(e) => return failed_with(check, &e),
        }
    }
    check
}

fn normalization(c: &Construction, _: &SuiteOptions) -> CheckRecord {
    let mut check = CheckRecord::new(
        "normalization",
        "spectral",
        "(f_ell dmu_j)^(0) = t^(-ell/2) to 1e-12",
    );
    for j in 0..=c.j_max() {
        for ell in 0..=j {
            let expected = 1.0 / c.params.sqrt_t_pow(ell) as f64;
            match f_mu_hat(c, j, ell, 0) {
                Ok(z) => {
                    let err = (z - expected).norm();
                    check.record(err <= 1e-12, 1.0 - err / 1e-12, || format!("j={j} ell={ell}"));
                }
                Err(e) => return failed_with(check, &e),
            }
        }
    }
    check
}

fn plan(opts: &SuiteOptions, salt: u64) -> FrequencyPlan {
    FrequencyPlan::with_sample(opts.dense, opts.samples, opts.sample_max, salt)
}

fn telescoping(c: &Construction, opts: &SuiteOptions) -> CheckRecord {
    let mut check = CheckRecord::new(
        "telescoping-decay",
        "spectral",
        "|c_{j+1}(k) - c_j(k)| <= 2 c_rot min(1, N^(j+1)/|k|) t^(-(j+1)/2) ln(8 N^(j+1)) for mu and f_ell",
    );
    let constant = 2.0 * c.params.c_rot;
    for j in 1..c.j_max() {
        let plan = plan(opts, c.params.seed ^ j as u64);
        for ell in 0..=j {
            match telescope_check(c, j, ell, constant, &plan) {
                Ok(b) => check.record(b.passed(), b.slack(), || {
                    format!("j={j} ell={ell} k={}", b.witness_k)
                }),
                Err(e) => return failed_with(check, &e),
            }
        }
    }
    check
}

fn trivial_decay(c: &Construction, opts: &SuiteOptions) -> CheckRecord {
    let mut check = CheckRecord::new(
        "trivial-decay",
        "spectral",
        "|(f_ell dmu_h)^(k)| <= N^h t^(-ell/2) / (pi |k|)",
    );
    for h in 0..=c.j_max() {
        let plan = plan(opts, c.params.seed ^ (h as u64) << 8);
        for ell in 0..=h {
            match trivial_bound_check(c, h, ell, &plan) {
                Ok(b) => check.record(b.passed(), b.slack(), || {
                    format!("h={h} ell={ell} k={}", b.witness_k)
                }),
                Err(e) => return failed_with(check, &e),
            }
        }
    }
    check
}

fn mass_identity(c: &Construction, _: &SuiteOptions) -> CheckRecord {
    let mut check = CheckRecord::new(
        "mass-identity",
        "norms",
        "mu_j(F_ell) = t^(-ell/2) exactly, by counting atoms",
    );
    for j in 0..=c.j_max() {
        for ell in 0..=j {
            match mass_check(c, j, ell) {
                Ok(m) => check.record(m.exact(), if m.exact() { 0.0 } else { -1.0 }, || {
                    format!("j={j} ell={ell} count={} expected={}", m.count, m.expected_count)
                }),
                Err(e) => return failed_with(check, &e),
            }
        }
    }
    check
}

/// Energy lower bound, sumset bound and the exact `L^{2r}` lower bound,
/// sharing one sum table per `(j, ell, r)`.
fn energy_bounds(c: &Construction, opts: &SuiteOptions) -> [CheckRecord; 3] {
    let mut energy = CheckRecord::new(
        "energy-lower-bound",
        "energy",
        "M_{F_ell cap A_j} >= r^(-ell-1) t^((2r-1) ell/2) (t^(2r)/N)^(j-ell)",
    );
    let mut sumset = CheckRecord::new(
        "sumset-bound",
        "energy",
        "|r (F_ell cap A_j)| <= (r sqrt(t))^ell r N^(j-ell)",
    );
    let mut l2r = CheckRecord::new(
        "l2r-lower-bound",
        "energy",
        "||(f_ell dmu_j)^||_2r^2r >= C_2r N^ell r^(-ell-1) t^(-ell(2r+1)/2)",
    );
    let mut orders = opts.energy_orders.clone();
    if !orders.contains(&opts.l2r_order) {
        orders.push(opts.l2r_order);
    }
    for &r in &orders {
        for j in 0..=c.j_max() {
            for ell in 0..=j {
                let outcome = energy_table(c, j, ell, r).and_then(|table| {
                    let e = energy_check_from_table(&c.params, j, ell, &table)?;
                    let l = if r == opts.l2r_order {
                        Some(l2r_check_from_table(&c.params, j, ell, &table)?)
                    } else {
                        None
                    };
                    Ok((e, l))
                });
                let (e, l) = match outcome {
                    Ok(v) => v,
                    Err(e) => {
                        return [failed_with(energy, &e), failed_with(sumset, &e), failed_with(l2r, &e)]
                    }
                };
                if opts.energy_orders.contains(&r) {
                    energy.record(e.bound_holds && e.holder_floor_holds, e.slack, || {
                        format!("j={j} ell={ell} r={r} M={}", e.m)
                    });
                    let bound: f64 = e.sumset_bound.parse().unwrap_or(f64::INFINITY);
                    sumset.record(e.sumset_holds, 1.0 - e.support_size as f64 / bound, || {
                        format!("j={j} ell={ell} r={r} support={}", e.support_size)
                    });
                }
                if let Some(l) = l {
                    l2r.record(l.holds && l.diagonal_holds, l.slack, || format!("j={j} ell={ell} r={r}"));
                }
            }
        }
    }
    [energy, sumset, l2r]
}

fn holder_chain(c: &Construction, opts: &SuiteOptions) -> CheckRecord {
    let mut check = CheckRecord::new(
        "holder-chain",
        "norms",
        "||phi||_2r^2r <= ||phi||_p^p t^(-ell(2r-p)/2), and the implied L^p floor",
    );
    let j = c.j_max().min(3);
    let ell = 1.min(j);
    for &p in &opts.holder_ps {
        match holder_chain_check(c, j, ell, p, opts.l2r_order, &opts.quadrature) {
            Ok(h) => check.record(h.passed(), h.slack, || format!("j={j} ell={ell} p={p}")),
            Err(e) => return failed_with(check, &e),
        }
    }
    check
}

fn ball_condition(c: &Construction, _: &SuiteOptions) -> CheckRecord {
    let mut check = CheckRecord::new(
        "ball-condition",
        "norms",
        "mu_j(I) / |I|^alpha = 1 on surviving N-adic intervals and <= 2 on adjacent pairs",
    );
    match ball_condition_report(c, c.j_max()) {
        Ok(b) => {
            check.record(b.adic_exact(), 1.0 - b.adic_sup, || "N-adic intervals".into());
            check.record(b.window_sup <= 2.0, 1.0 - b.window_sup / 2.0, || "adjacent pairs".into());
        }
        Err(e) => return failed_with(check, &e),
    }
    check
}
