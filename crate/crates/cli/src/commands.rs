//! The six subcommands. Each figure-style command evaluates the library on
//! a fixed, origin-anchored output grid (node times are integer multiples of
//! the step, so t = 0 and omega = 0 rows are exact) and emits one table per
//! artifact; `verify` runs the cross-module identity suite and reports one
//! line per check.

use std::path::Path;

use anyhow::{bail, Context, Result};
use catfilter_core::fock::{
    apply_annihilation, apply_squeeze, loss_commutation_check, pair_apply_ratio_check,
    squeezed_single_photon_check, subtract_via_tap, FockState,
};
use catfilter_core::filter::{
    closed_hr_r, closed_hr_rr, filter_response, filter_scan, mode_match_filtered_closed,
    FilterParams,
};
use catfilter_core::signal::Signal;
use catfilter_core::wavepacket::{
    equiv_loss_curve, equivalent_loss, lorentz_wavepacket, mode_match, pair_mode_ladder,
    wavepacket_variances,
};
use catfilter_core::OpoParams;

use crate::config::RunConfig;
use crate::table::Table;

/// Uniform grid of integer multiples of `step` from `lo * step` to
/// `hi * step` inclusive; anchoring on multiples keeps the origin exact.
fn step_grid(lo: i64, hi: i64, step: f64) -> impl Iterator<Item = f64> {
    (lo..=hi).map(move |k| k as f64 * step)
}

/// Linear interpolation of a sampled signal's real part.
fn interp_real(sig: &Signal<f64>, t: f64) -> f64 {
    let grid = sig.sample_grid().expect("interpolation needs a sampled signal");
    let values = sig.sample_values().expect("interpolation needs a sampled signal");
    let pos = (t - grid.start) / grid.step;
    let idx = pos.floor() as i64;
    if idx < 0 || idx + 1 >= grid.count as i64 {
        return 0.0;
    }
    let frac = pos - idx as f64;
    let (a, b) = (values[idx as usize].re, values[idx as usize + 1].re);
    a + (b - a) * frac
}

fn eps_label(eps: f64) -> String {
    format!("{eps}")
}

fn write(table: &Table, dir: &Path, json: bool) -> Result<()> {
    table.write(dir, json).with_context(|| format!("writing {} under {dir:?}", table.name))
}

/// Squeezing spectra, one file per pump ratio, on omega in
/// `[-6 gamma, 6 gamma]` with 241 rows.
pub fn cmd_spectrum(cfg: &RunConfig) -> Result<()> {
    for &eps in &cfg.epsilon_list {
        let p = OpoParams::new(cfg.gamma, eps)?;
        let mut t = Table::new(
            format!("spectrum_eps{}", eps_label(eps)),
            vec!["omega", "v_plus", "v_minus", "v_plus_db", "r_tilde", "phi"],
        );
        for w in step_grid(-120, 120, 0.05 * cfg.gamma) {
            let s = p.spectrum(w);
            t.push(vec![s.omega, s.v_plus, s.v_minus, p.squeezing_db(w), s.r_tilde, s.phi]);
        }
        write(&t, &cfg.output_dir, cfg.json)?;
    }
    Ok(())
}

/// Normalized two-photon correlation traces on `|t| <= 8 / gamma`,
/// 1601 rows. A zero pump ratio selects the weak-pump limit shape.
pub fn cmd_correlation(cfg: &RunConfig) -> Result<()> {
    for &eps in &cfg.epsilon_list {
        let mut t = Table::new(format!("correlation_eps{}", eps_label(eps)), vec!["t", "value"]);
        let trace: Box<dyn Fn(f64) -> f64> = if eps == 0.0 {
            let closed = Signal::both_side_exp(cfg.gamma)?.normalize()?;
            Box::new(move |x| closed.eval_real(x).expect("closed trace evaluates everywhere"))
        } else {
            let p = OpoParams::new(cfg.gamma, eps)?;
            let sampled = p.correlation_time()?;
            let values = sampled.sample_values().expect("correlation samples");
            let peak = values.iter().map(|v| v.re.abs()).fold(0.0f64, f64::max);
            let im_max = values.iter().map(|v| v.im.abs()).fold(0.0f64, f64::max);
            if im_max > 1e-9 * peak {
                bail!("correlation trace has imaginary part {im_max:.3e} above 1e-9 of peak");
            }
            Box::new(move |x| interp_real(&sampled, x))
        };
        for time in step_grid(-800, 800, 0.01 / cfg.gamma) {
            t.push(vec![time, trace(time)]);
        }
        write(&t, &cfg.output_dir, cfg.json)?;
    }
    Ok(())
}

/// Equivalent-loss curves over the wavepacket-bandwidth axis, all pump
/// ratios in one table.
pub fn cmd_equivloss(cfg: &RunConfig) -> Result<()> {
    let axis = cfg.rel_range.axis();
    let mut t = Table::new("equivloss", vec!["gamma_rel", "L", "epsilon_over_gamma"]);
    for &eps in &cfg.epsilon_list {
        let p = OpoParams::new(cfg.gamma, eps)?;
        for (rel, loss) in equiv_loss_curve(&p, &axis)? {
            t.push(vec![rel, loss, eps / cfg.gamma]);
        }
    }
    write(&t, &cfg.output_dir, cfg.json)
}

/// Heralded mode functions on `t in [-15, 5] / gamma`: the filtered set
/// (single- and double-pass convolutions and the bare reversed response) at
/// the configured filter bandwidth, the bare unfiltered pair, and the
/// leading pair-ladder coefficients.
pub fn cmd_modefuncs(cfg: &RunConfig) -> Result<()> {
    let (g, gg) = (cfg.gamma, cfg.big_gamma);
    let hr_r = closed_hr_r(g, gg)?;
    let hr_rr = closed_hr_rr(g, gg)?;
    let hr = filter_response(&FilterParams::new(gg, 1)?)?.time_reverse()?.normalize()?;
    let mut filtered = Table::new("modefuncs", vec!["t", "n_hr_r", "n_hr_rr", "n_hr"]);
    for time in step_grid(-750, 250, 0.02 / g) {
        filtered.push(vec![
            time,
            hr_r.eval_real(time)?,
            hr_rr.eval_real(time)?,
            hr.eval_real(time)?,
        ]);
    }
    write(&filtered, &cfg.output_dir, cfg.json)?;

    let n_r = Signal::both_side_exp(g)?.normalize()?;
    let n_rr = n_r.convolve(&n_r)?.normalize()?;
    let mut bare = Table::new("modefuncs_bare", vec!["t", "n_r", "n_rr"]);
    for time in step_grid(-750, 250, 0.02 / g) {
        bare.push(vec![time, n_r.eval_real(time)?, n_rr.eval_real(time)?]);
    }
    write(&bare, &cfg.output_dir, cfg.json)?;

    // ladder coefficients for the bare mode seeded by the first pump ratio
    let eps = cfg.epsilon_list[0];
    let p = OpoParams::new(g, eps)?;
    let ladder = pair_mode_ladder(&n_r, &p.correlation_weak_pump(), 3)?;
    let mut coeffs =
        Table::new("ladder", vec!["k", "c_kk_re", "c_kk_im", "c_kk1_re", "c_kk1_im"]);
    for (k, (diag, off)) in
        ladder.diag_coeffs.iter().zip(&ladder.offdiag_coeffs).enumerate()
    {
        coeffs.push(vec![k as f64, diag.re, diag.im, off.re, off.im]);
    }
    write(&coeffs, &cfg.output_dir, cfg.json)
}

/// Filter-bandwidth scan of the mode-matching rate: closed form and the
/// independent convolution route side by side over the inverse-bandwidth
/// axis.
pub fn cmd_modematch(cfg: &RunConfig) -> Result<()> {
    let p = OpoParams::new(cfg.gamma, cfg.epsilon_list[0])?;
    let axis = cfg.rel_range.axis();
    let mut t =
        Table::new("modematch", vec!["inv_gamma_rel", "m_closed", "m_numeric", "discrepancy"]);
    for report in filter_scan(&p, &axis)? {
        t.push(vec![
            report.gamma_rel_inv,
            report.m_closed,
            report.m_numeric,
            report.discrepancy,
        ]);
    }
    write(&t, &cfg.output_dir, cfg.json)
}

struct Check {
    name: &'static str,
    value: f64,
    tol: f64,
}

impl Check {
    fn passes(&self) -> bool {
        self.value.is_finite() && self.value <= self.tol
    }
}

/// Straight-line fit quality helper for the tap-linearity check: returns
/// `(slope, 1 - R^2)`.
fn linear_fit_deficit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let ss_res: f64 =
        xs.iter().zip(ys).map(|(x, y)| (y - (slope * x + intercept)).powi(2)).sum();
    let mean = sy / n;
    let ss_tot: f64 = ys.iter().map(|y| (y - mean).powi(2)).sum();
    (slope, ss_res / ss_tot)
}

/// Cross-module identity suite. Prints one line per check with its deviation
/// and tolerance; returns whether every check passed.
pub fn cmd_verify(cfg: &RunConfig, inject_failure: bool) -> Result<bool> {
    let g = cfg.gamma;
    let mut checks: Vec<Check> = Vec::new();

    let bse = Signal::both_side_exp(g)?;
    checks.push(Check {
        name: "bare_mode_match",
        value: (mode_match(&bse, &bse)? - 0.9).abs(),
        tol: 1e-6,
    });

    let packet = lorentz_wavepacket(1.0, g)?;
    let v_mid = wavepacket_variances(&packet, &OpoParams::new(g, 0.3 * g)?)?;
    checks.push(Check {
        name: "equiv_loss_at_unity",
        value: (equivalent_loss(&v_mid)? - 0.1).abs(),
        tol: 5e-3,
    });
    let v_weak = wavepacket_variances(&packet, &OpoParams::new(g, 0.01 * g)?)?;
    checks.push(Check {
        name: "weak_pump_loss_oracle",
        value: (equivalent_loss(&v_weak)? - 0.1).abs(),
        tol: 1e-3,
    });

    let p_mid = OpoParams::new(g, 0.3 * g)?;
    let p_high = OpoParams::new(g, 0.7 * g)?;
    checks.push(Check {
        name: "antisqueezing_db_mid",
        value: (p_mid.squeezing_db(0.0) - 5.38).abs(),
        tol: 0.05,
    });
    checks.push(Check {
        name: "antisqueezing_db_high",
        value: (p_high.squeezing_db(0.0) - 15.07).abs(),
        tol: 0.05,
    });
    let product_dev = (0..1000)
        .map(|k| {
            let w = (-10.0 + 20.0 * k as f64 / 999.0) * g;
            let s = p_high.spectrum(w);
            (s.v_plus * s.v_minus - 1.0).abs()
        })
        .fold(0.0f64, f64::max);
    checks.push(Check { name: "uncertainty_product", value: product_dev, tol: 1e-12 });

    checks.push(Check {
        name: "filtered_match_narrow_limit",
        value: (mode_match_filtered_closed(1e-4_f64)? - 1.0).abs(),
        tol: 1e-3,
    });
    checks.push(Check {
        name: "filtered_match_broad_limit",
        value: (mode_match_filtered_closed(1e4_f64)? - 0.9).abs(),
        tol: 1e-3,
    });
    let hr_r = closed_hr_r(g, cfg.big_gamma)?;
    let hr_rr = closed_hr_rr(g, cfg.big_gamma)?;
    checks.push(Check {
        name: "filtered_overlap_closed",
        value: (hr_r.overlap_report(&hr_rr)?.overlap
            - mode_match_filtered_closed(cfg.big_gamma / g)?)
        .abs(),
        tol: 1e-9,
    });
    let continuity = [&hr_r, &hr_rr]
        .iter()
        .map(|s| (s.eval_real(-1e-12).unwrap() - s.eval_real(1e-12).unwrap()).abs())
        .fold(0.0f64, f64::max);
    checks.push(Check { name: "piecewise_continuity", value: continuity, tol: 1e-9 });

    let scan = filter_scan(&p_mid, &[0.25, 1.0, 2.5, 5.0, 10.0])?;
    let scan_dev = scan.iter().map(|r| r.discrepancy).fold(0.0f64, f64::max);
    checks.push(Check { name: "scan_dual_route", value: scan_dev, tol: 1e-6 });

    let parseval = (bse.norm()? - bse.fourier()?.norm()?).abs();
    checks.push(Check { name: "parseval_probe", value: parseval, tol: 1e-8 });

    checks.push(Check {
        name: "fock_squeezed_photon",
        value: 1.0 - squeezed_single_photon_check(0.5_f64, cfg.cutoff)?,
        tol: 1e-8,
    });
    let vac = FockState::vacuum(1, cfg.cutoff)?;
    let sq = apply_squeeze(&vac, 0, 0.3)?;
    checks.push(Check {
        name: "fock_loss_commutation",
        value: loss_commutation_check(&sq, 0.2)?,
        tol: 1e-9,
    });
    let (p30, p21) = pair_apply_ratio_check(1.0_f64, 1.0)?;
    checks.push(Check { name: "fock_pair_ratio", value: (p30 / p21 - 0.75).abs(), tol: 1e-10 });

    let sq_half = apply_squeeze(&vac, 0, 0.5)?;
    let direct = apply_annihilation(&sq_half, 0)?.normalize()?;
    let taps = [1e-2, 1e-3, 1e-4];
    let dists: Vec<f64> = taps
        .iter()
        .map(|&r| {
            let herald = subtract_via_tap(&sq_half, r)?;
            Ok((1.0 - herald.state.fidelity(&direct)?).max(0.0).sqrt())
        })
        .collect::<Result<_>>()?;
    let (slope, deficit) = linear_fit_deficit(&taps, &dists);
    checks.push(Check {
        name: "fock_tap_linearity",
        value: if slope > 0.0 { deficit } else { f64::INFINITY },
        tol: 1e-3,
    });

    if inject_failure {
        checks.push(Check { name: "injected_failure", value: 1.0, tol: 1e-12 });
    }

    let mut failed = 0usize;
    for c in &checks {
        let verdict = if c.passes() { "PASS" } else { "FAIL" };
        println!("check {}: value={:.3e} tol={:.1e} {verdict}", c.name, c.value, c.tol);
        if !c.passes() {
            failed += 1;
        }
    }
    println!("verify: {} checks, {} failed", checks.len(), failed);
    Ok(failed == 0)
}
