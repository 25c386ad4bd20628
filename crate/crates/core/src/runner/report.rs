//! CSV and text artifacts of a run.

use std::fmt::Write as _;

use crate::diagnostics::{CriteriaSeries, SeriesSummary};
use crate::fronts::SaddleReport;

/// Seventeen significant digits: enough to round-trip any `f64`.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

const BASE_COLUMNS: [&str; 10] = [
    "t",
    "sup_grad_u",
    "I_grad_u",
    "sup_omega",
    "I_omega",
    "sup_grad_theta",
    "I_grad_theta",
    "II_grad_theta",
    "sup_lap_theta",
    "I_lap_theta",
];

const FRONT_COLUMNS: [&str; 17] = [
    "sup_u_strip",
    "I_u",
    "area",
    "delta_min",
    "delta_max",
    "dA_dt",
    "end_flux",
    "area_flux_residual",
    "curve_stream_residual_plus",
    "curve_stream_residual_minus",
    "a_tilde",
    "b_tilde",
    "window_valid",
    "window_area",
    "window_dA_dt",
    "window_dA_dt_sign",
    "strip_spacing_x2",
];

/// Column names of `diagnostics.csv` for `fronts` front pairs.
pub fn diagnostics_header(fronts: usize) -> Vec<String> {
    let mut cols: Vec<String> = BASE_COLUMNS.iter().map(|s| s.to_string()).collect();
    for k in 0..fronts {
        cols.extend(FRONT_COLUMNS.iter().map(|c| format!("front{k}_{c}")));
    }
    cols
}

/// One row per diagnostic time, fixed column order.
pub fn diagnostics_csv(series: &CriteriaSeries, summary: &SeriesSummary) -> String {
    let fronts = summary.fronts.len();
    let mut out = diagnostics_header(fronts).join(",");
    out.push('\n');
    let at = |v: &Option<Vec<f64>>, i: usize| v.as_ref().map(|v| v[i]);
    for (i, r) in series.records().iter().enumerate() {
        let mut row = vec![
            num(r.t),
            num(r.sup_grad_u),
            num(summary.i_gradu[i]),
            opt(r.bkm.sup_omega),
            opt(at(&summary.i_omega, i)),
            opt(r.bkm.sup_grad_theta),
            opt(at(&summary.i_grad_theta, i)),
            opt(at(&summary.ii_grad_theta, i)),
            opt(r.bkm.sup_lap_theta),
            opt(at(&summary.i_lap_theta, i)),
        ];
        for (rec, fs) in r.fronts.iter().zip(&summary.fronts) {
            let flux = fs.area_flux.get(i);
            let curve = fs.curve_stream.get(i);
            let w = &fs.monitor.rows[i];
            row.extend([
                num(rec.strip.sup_speed),
                num(fs.i_u[i]),
                num(rec.thickness.area),
                num(rec.thickness.delta_min),
                num(rec.delta_max),
                opt(flux.map(|f| f.lhs)),
                num(rec.trace.end_flux()),
                opt(flux.map(|f| f.residual)),
                opt(curve.map(|c| c.plus)),
                opt(curve.map(|c| c.minus)),
                num(w.a_tilde),
                num(w.b_tilde),
                u8::from(w.valid).to_string(),
                opt(w.area),
                opt(w.dadt),
                w.sign.to_string(),
                num(rec.strip.spacing_x2),
            ]);
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Long format: `t,front,x1,f_plus,f_minus`.
pub fn fronts_csv(series: &CriteriaSeries) -> String {
    let mut out = String::from("t,front,x1,f_plus,f_minus\n");
    for r in series.records() {
        for (k, f) in r.fronts.iter().enumerate() {
            let p = &f.pair;
            for j in 0..p.len() {
                let _ = writeln!(out, "{},{k},{},{},{}", num(r.t), num(p.x1[j]), num(p.f_plus[j]), num(p.f_minus[j]));
            }
        }
    }
    out
}

/// `t,id,x1,x2` for every recorded particle position.
pub fn particles_csv(tracks: &[(f64, Vec<[f64; 2]>)]) -> String {
    let mut out = String::from("t,id,x1,x2\n");
    for (t, positions) in tracks {
        for (id, x) in positions.iter().enumerate() {
            let _ = writeln!(out, "{},{id},{},{}", num(*t), num(x[0]), num(x[1]));
        }
    }
    out
}

fn last(v: &Option<Vec<f64>>) -> Option<f64> {
    v.as_ref().and_then(|v| v.last().copied())
}

/// Human-readable summary: run status, per-front criteria, blow-up integrals
/// and saddle suggestions. `notes` are printed as warnings under the status.
pub fn verdict_text(
    model: &str,
    status: &str,
    notes: &[String],
    summary: &SeriesSummary,
    saddles: &SaddleReport,
) -> String {
    let mut s = String::new();
    let t_end = summary.times.last().copied().unwrap_or(0.0);
    let _ = writeln!(s, "model: {model}");
    let _ = writeln!(s, "status: {status}");
    for note in notes {
        let _ = writeln!(s, "warning: {note}");
    }
    let _ = writeln!(s, "diagnostic times: {} (last t = {})", summary.times.len(), num(t_end));
    let _ = writeln!(s);

    for (k, f) in summary.fronts.iter().enumerate() {
        let m = &f.monitor;
        let _ = writeln!(s, "[front {k}]");
        let _ = writeln!(s, "verdict: {}", m.verdict);
        let _ = writeln!(s, "controlled velocity growth, strip integral of sup|u| up to T: {}", num(m.i_u_total));
        let _ = writeln!(s, "area identity, max |dA/dt - end flux|: {}", num(f.max_area_flux_residual()));
        let _ = writeln!(s, "stream function along curves, max |d psi/dx1 - df/dt|: {}", num(f.max_curve_stream_residual()));
        let _ = writeln!(
            s,
            "shrinking window: t* = {}, A(t*) = {}, min windowed dA/dt = {}",
            opt(m.t_star),
            opt(m.area_at_t_star),
            opt(m.min_dadt)
        );
        let _ = writeln!(
            s,
            "thickness: delta_min {} -> {}, max delta {}",
            num(m.delta_min_initial),
            num(m.delta_min_final),
            num(f.delta_max)
        );
        let _ = writeln!(
            s,
            "thickness lower bound delta_min(0) exp(-int sup|grad u|): {} violation(s)",
            f.delta_bound_violations.len()
        );
        let _ = writeln!(s);
    }

    let _ = writeln!(s, "[blow-up integrals at T]");
    let _ = writeln!(s, "int sup|grad u| dt: {}", opt(summary.i_gradu.last().copied()));
    if let Some(v) = last(&summary.i_omega) {
        let _ = writeln!(s, "int sup|omega| dt: {}", num(v));
    }
    if let Some(v) = last(&summary.i_grad_theta) {
        let _ = writeln!(s, "int sup|grad theta| dt: {}", num(v));
    }
    if let Some(v) = last(&summary.ii_grad_theta) {
        let _ = writeln!(s, "double integral of sup|grad theta|: {}", num(v));
    }
    if let Some(v) = last(&summary.i_lap_theta) {
        let _ = writeln!(s, "int sup|lap theta| dt: {}", num(v));
    }
    let _ = writeln!(s, "cumulative integrals non-decreasing: {}", summary.integrals_monotone);
    let _ = writeln!(s);

    let c = &summary.collision;
    let _ = writeln!(s, "[particle collision bound]");
    let _ = writeln!(
        s,
        "pairs {}, checks {}, violations {}, min separation ratio {}",
        c.pairs,
        c.checks,
        c.violations.len(),
        num(c.min_ratio)
    );
    for v in c.violations.iter().take(20) {
        let _ = writeln!(s, "  pair {} at t = {}: {} < {}", v.pair, num(v.t), num(v.separation), num(v.bound));
    }
    let _ = writeln!(s);

    let _ = writeln!(s, "[saddles of the initial scalar]");
    if saddles.is_empty() {
        let _ = writeln!(s, "none found");
    }
    for sd in &saddles.saddles {
        let _ = writeln!(
            s,
            "x = ({}, {}), value {}, hessian det {}",
            num(sd.location[0]),
            num(sd.location[1]),
            num(sd.value),
            num(sd.hessian_det)
        );
    }
    s
}
