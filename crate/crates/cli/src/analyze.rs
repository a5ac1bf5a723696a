//! `salem analyze`: CSV and JSON reports for a stored construction.

use std::path::{Path, PathBuf};

use serde::Serialize;

use salem_core::energy::{energy_check, l2r_check};
use salem_core::norms::{
    ball_condition_report, energy_integral, holder_chain_check, lp_norm_quadrature, mass_check,
    restriction_ratio, write_ratio_csv, QuadraturePlan,
};
use salem_core::spectral::{
    decay_report, series_bound_check, telescope_check, trivial_bound_check, FrequencyPlan,
    SpectrumTable, Weight,
};
use salem_core::thresholds::{p_mock_decreasing, Thresholds};
use salem_core::Construction;

use crate::error::CliError;
use crate::manifest::{CheckRecord, RunManifest};
use crate::store::{write_atomic, write_json};

#[derive(Debug, Clone)]
pub struct AnalyzeOptions {
    pub spectrum: bool,
    pub decay: bool,
    pub energy: bool,
    pub norms: bool,
    pub ratio: bool,
    pub j_min: usize,
    pub j_max: Option<usize>,
    pub ell_max: usize,
    pub k_max: i64,
    pub decay_k_max: i64,
    pub beta: f64,
    pub orders: Vec<u32>,
    pub ps: Vec<f64>,
    pub qs: Vec<f64>,
    pub quadrature: QuadraturePlan,
}

#[derive(Serialize)]
struct Named<T: Serialize> {
    check: &'static str,
    passed: bool,
    #[serde(flatten)]
    value: T,
}

fn named<T: Serialize>(check: &'static str, passed: bool, value: T) -> Named<T> {
    Named { check, passed, value }
}

struct Outputs<'a> {
    dir: &'a Path,
    names: Vec<String>,
}

impl Outputs<'_> {
    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        write_json(&self.dir.join(name), value)?;
        self.names.push(name.into());
        Ok(())
    }

    fn bytes(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        write_atomic(&self.dir.join(name), bytes)?;
        self.names.push(name.into());
        Ok(())
    }
}

fn weights(j: usize, ell_max: usize) -> Vec<Weight> {
    std::iter::once(Weight::Mu)
        .chain((1..=j.min(ell_max)).map(Weight::FEll))
        .collect()
}

pub fn run(
    c: &Construction,
    opts: &AnalyzeOptions,
    out_dir: &Path,
    manifest: &mut RunManifest,
) -> Result<(), CliError> {
    std::fs::create_dir_all(out_dir)?;
    let j_hi = opts.j_max.unwrap_or(c.j_max()).min(c.j_max());
    let js: Vec<usize> = (opts.j_min..=j_hi).collect();
    let mut out = Outputs {
        dir: out_dir,
        names: Vec::new(),
    };
    let mut checks = Vec::new();

    if opts.spectrum {
        for &j in &js {
            for w in weights(j, opts.ell_max) {
                let table = SpectrumTable::new(c, j, w)?;
                let spectrum = table.spectrum((0..opts.k_max).collect());
                let mut bytes = Vec::new();
                spectrum.write_csv(&mut bytes)?;
                out.bytes(&format!("spectrum_j{j}_{}.csv", w.label()), &bytes)?;
            }
        }
    }

    if opts.decay {
        let mut tele = CheckRecord::new("telescoping-decay", "spectral", "level-to-level coefficient change");
        let mut triv = CheckRecord::new("trivial-decay", "spectral", "N^h t^(-ell/2) / (pi |k|) envelope");
        let mut bounds = Vec::new();
        let plan = FrequencyPlan::with_sample(opts.decay_k_max, 512, 1 << 40, c.params.seed);
        for &j in &js {
            for ell in 0..=j.min(opts.ell_max) {
                if j >= 1 && j < c.j_max() {
                    let b = telescope_check(c, j, ell, 2.0 * c.params.c_rot, &plan)?;
                    tele.record(b.passed(), b.slack(), || format!("j={j} ell={ell} k={}", b.witness_k));
                    bounds.push(b);
                }
                let b = trivial_bound_check(c, j, ell, &plan)?;
                triv.record(b.passed(), b.slack(), || format!("j={j} ell={ell} k={}", b.witness_k));
                bounds.push(b);
            }
        }
        let mut reports = Vec::new();
        for &j in js.iter().filter(|&&j| j > 0) {
            let spectrum = SpectrumTable::new(c, j, Weight::Mu)?.spectrum((1..=opts.decay_k_max).collect());
            reports.push(decay_report(&spectrum, opts.beta)?);
        }
        let ks: Vec<i64> = (0..40).map(|e| 1i64 << e).collect();
        let series = series_bound_check(&c.params, opts.beta, &ks)?;
        #[derive(Serialize)]
        struct Decay<'a, B, R, S> {
            beta: f64,
            bounds: &'a [B],
            reports: &'a [R],
            series: &'a [S],
        }
        out.json(
            "decay.json",
            &Decay {
                beta: opts.beta,
                bounds: &bounds,
                reports: &reports,
                series: &series,
            },
        )?;
        checks.push(tele);
        checks.push(triv);
    }

    if opts.energy {
        let mut energy_rec = CheckRecord::new("energy-lower-bound", "energy", "additive energy lower bound");
        let mut l2r_rec = CheckRecord::new("l2r-lower-bound", "energy", "exact L^2r norm lower bound");
        let mut energy = Vec::new();
        let mut l2r = Vec::new();
        for &r in &opts.orders {
            for &j in &js {
                for ell in 0..=j.min(opts.ell_max) {
                    let e = energy_check(c, j, ell, r)?;
                    energy_rec.record(e.passed(), e.slack, || format!("j={j} ell={ell} r={r}"));
                    energy.push(named("energy-lower-bound", e.passed(), e));
                    let l = l2r_check(c, j, ell, r)?;
                    if l.in_hypothesis {
                        l2r_rec.record(l.holds, l.slack, || format!("j={j} ell={ell} r={r}"));
                    }
                    l2r.push(named("l2r-lower-bound", l.holds, l));
                }
            }
        }
        #[derive(Serialize)]
        struct Energy<A, B> {
            energy: Vec<A>,
            l2r: Vec<B>,
        }
        out.json("energy.json", &Energy { energy, l2r })?;
        checks.push(energy_rec);
        checks.push(l2r_rec);
    }

    if opts.norms {
        let mut mass = Vec::new();
        let mut lp = Vec::new();
        let mut holder = Vec::new();
        let mut holder_rec = CheckRecord::new("holder-chain", "norms", "L^2r bounded through L^p and L^inf");
        let quad_ps: Vec<f64> = opts.ps.iter().copied().filter(|&p| p > 1.0).collect();
        for &j in &js {
            for ell in 0..=j.min(opts.ell_max) {
                mass.push(mass_check(c, j, ell)?);
                if !quad_ps.is_empty() {
                    lp.extend(lp_norm_quadrature(c, j, ell, &quad_ps, &opts.quadrature)?);
                }
                if ell >= 1 {
                    let r = opts.orders.iter().copied().max().unwrap_or(3);
                    for &p in opts.ps.iter().filter(|&&p| p <= 2.0 * r as f64) {
                        let h = holder_chain_check(c, j, ell, p, r, &opts.quadrature)?;
                        holder_rec.record(h.passed(), h.slack, || format!("j={j} ell={ell} p={p} r={r}"));
                        holder.push(h);
                    }
                }
            }
        }
        let ball = ball_condition_report(c, j_hi)?;
        let mut ball_rec = CheckRecord::new("ball-condition", "norms", "mu(I) / |I|^alpha");
        ball_rec.record(ball.adic_exact() && ball.window_sup <= 2.0, 1.0 - ball.window_sup / 2.0, || {
            format!("j={j_hi}")
        });
        let cutoffs: Vec<u64> = (0..=8).map(|e| 1u64 << (2 * e)).collect();
        let mut energy_integrals = Vec::new();
        for gamma in [0.5, 0.9] {
            energy_integrals.push((gamma, energy_integral(c, j_hi, gamma, &cutoffs, 4)?));
        }
        #[derive(Serialize)]
        struct Norms<A, B, C, D, E> {
            mass: A,
            lp: B,
            holder: C,
            ball: D,
            energy_integral: E,
        }
        out.json(
            "norms.json",
            &Norms {
                mass,
                lp,
                holder,
                ball,
                energy_integral: energy_integrals
                    .into_iter()
                    .map(|(gamma, rows)| serde_json::json!({ "gamma": gamma, "rows": rows }))
                    .collect::<Vec<_>>(),
            },
        )?;
        checks.push(holder_rec);
        checks.push(ball_rec);
    }

    if opts.ratio {
        let mut reports = Vec::new();
        for ell in 0..=j_hi.min(opts.ell_max) {
            for &p in &opts.ps {
                for &q in &opts.qs {
                    reports.push(restriction_ratio(c, j_hi, ell, p, q, &opts.quadrature)?);
                }
            }
        }
        let mut csv = Vec::new();
        write_ratio_csv(&reports, &mut csv)?;
        out.bytes("ratio.csv", &csv)?;
        let thresholds = Thresholds::new(c.params.alpha.value);
        let betas: Vec<f64> = (1..=100).map(|i| i as f64 / 100.0).collect();
        out.json(
            "ratio.json",
            &serde_json::json!({
                "j": j_hi,
                "thresholds": thresholds,
                "p_mock_decreasing": p_mock_decreasing(thresholds.alpha, &betas),
                "reports": reports,
            }),
        )?;
    }

    manifest.outputs = out.names;
    manifest.checks = checks;
    Ok(())
}

pub fn default_out(dir: &Path) -> PathBuf {
    dir.join("analysis")
}
