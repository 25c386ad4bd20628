use super::{
    accumulate_integral, area_flux_residual_from_traces, collision_bound, curve_stream_residual_from_traces,
    delta_lower_bound, shrink_window_monitor, AreaFluxSample, BkmSample, CollisionReport, CurveStreamSample,
    MonitorOptions, ShrinkWindowReport, StreamTrace, StripSup,
};
use crate::error::{Error, Result};
use crate::fronts::{FrontGraphPair, Thickness};

/// Everything measured on one front pair at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontRecord {
    pub pair: FrontGraphPair,
    pub strip: StripSup,
    pub trace: StreamTrace,
    /// Thickness over the whole window `[a, b]`.
    pub thickness: Thickness,
    pub delta_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriteriaRecord {
    pub t: f64,
    /// Grid maximum of the Frobenius norm of `∇u`.
    pub sup_grad_u: f64,
    pub bkm: BkmSample,
    pub fronts: Vec<FrontRecord>,
    /// Declared particle pair distances.
    pub separations: Vec<f64>,
}

/// Time-ordered diagnostic records of a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CriteriaSeries {
    records: Vec<CriteriaRecord>,
}

impl CriteriaSeries {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn records(&self) -> &[CriteriaRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    /// Appends a record; times must increase and the front and pair counts
    /// must match earlier records.
    pub fn push(&mut self, record: CriteriaRecord) -> Result<()> {
        if let Some(last) = self.records.last() {
            if !(record.t > last.t) {
                return Err(Error::NonMonotoneTime { index: self.records.len() });
            }
            if last.fronts.len() != record.fronts.len() || last.separations.len() != record.separations.len() {
                return Err(Error::InvalidArgument("records disagree on the number of fronts or pairs".into()));
            }
        }
        self.records.push(record);
        Ok(())
    }

    fn integral(&self, value: impl Fn(&CriteriaRecord) -> Option<f64>) -> Result<Option<Vec<f64>>> {
        let samples: Option<Vec<(f64, f64)>> = self.records.iter().map(|r| value(r).map(|v| (r.t, v))).collect();
        samples.map(|s| accumulate_integral(&s)).transpose()
    }

    pub fn summarize(&self, opts: &SummaryOptions) -> Result<SeriesSummary> {
        let times = self.times();
        let i_gradu = self.integral(|r| Some(r.sup_grad_u))?.unwrap_or_default();
        let i_omega = self.integral(|r| r.bkm.sup_omega)?;
        let i_grad_theta = self.integral(|r| r.bkm.sup_grad_theta)?;
        let ii_grad_theta = match &i_grad_theta {
            Some(inner) => Some(accumulate_integral(
                &times.iter().copied().zip(inner.iter().copied()).collect::<Vec<_>>(),
            )?),
            None => None,
        };
        let i_lap_theta = self.integral(|r| r.bkm.sup_lap_theta)?;

        let n_fronts = self.records.first().map_or(0, |r| r.fronts.len());
        let mut fronts = Vec::with_capacity(n_fronts);
        for k in 0..n_fronts {
            let recs: Vec<&FrontRecord> = self.records.iter().map(|r| &r.fronts[k]).collect();
            let pairs: Vec<FrontGraphPair> = recs.iter().map(|f| f.pair.clone()).collect();
            let traces: Vec<StreamTrace> = recs.iter().map(|f| f.trace.clone()).collect();
            let sup: Vec<f64> = recs.iter().map(|f| f.strip.sup_speed).collect();
            let delta_min: Vec<f64> = recs.iter().map(|f| f.thickness.delta_min).collect();
            let i_u = accumulate_integral(&times.iter().copied().zip(sup.iter().copied()).collect::<Vec<_>>())?;
            fronts.push(FrontSummary {
                i_u,
                area_flux: area_flux_residual_from_traces(&pairs, &traces)?,
                curve_stream: curve_stream_residual_from_traces(&pairs, &traces)?,
                monitor: shrink_window_monitor(&sup, &pairs, opts.monitor)?,
                delta_bound_violations: delta_lower_bound(&times, &delta_min, &i_gradu, opts.delta_tol),
                delta_max: recs.iter().map(|f| f.delta_max).fold(0.0, f64::max),
            });
        }

        let separations: Vec<Vec<f64>> = self.records.iter().map(|r| r.separations.clone()).collect();
        let collision = collision_bound(&times, &i_gradu, &separations, opts.collision_tol)?;

        let monotone = |v: &Option<Vec<f64>>| v.as_ref().is_none_or(|v| v.windows(2).all(|w| w[1] >= w[0]));
        let integrals_monotone = monotone(&Some(i_gradu.clone()))
            && monotone(&i_omega)
            && monotone(&i_grad_theta)
            && monotone(&ii_grad_theta)
            && monotone(&i_lap_theta)
            && fronts.iter().all(|f| f.i_u.windows(2).all(|w| w[1] >= w[0]));

        Ok(SeriesSummary {
            times,
            i_gradu,
            i_omega,
            i_grad_theta,
            ii_grad_theta,
            i_lap_theta,
            fronts,
            collision,
            integrals_monotone,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryOptions {
    pub monitor: MonitorOptions,
    pub collision_tol: f64,
    pub delta_tol: f64,
}

impl Default for SummaryOptions {
    fn default() -> Self {
        Self { monitor: MonitorOptions::default(), collision_tol: 0.02, delta_tol: 0.02 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontSummary {
    /// `∫_0^t sup_strip |u|` at every record.
    pub i_u: Vec<f64>,
    pub area_flux: Vec<AreaFluxSample>,
    pub curve_stream: Vec<CurveStreamSample>,
    pub monitor: ShrinkWindowReport,
    /// Times where the thickness fell below its exponential lower bound.
    pub delta_bound_violations: Vec<f64>,
    pub delta_max: f64,
}

impl FrontSummary {
    pub fn max_area_flux_residual(&self) -> f64 {
        self.area_flux.iter().map(|r| r.residual.abs()).fold(0.0, f64::max)
    }

    pub fn max_curve_stream_residual(&self) -> f64 {
        self.curve_stream.iter().map(CurveStreamSample::max).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSummary {
    pub times: Vec<f64>,
    pub i_gradu: Vec<f64>,
    pub i_omega: Option<Vec<f64>>,
    pub i_grad_theta: Option<Vec<f64>>,
    /// `∫_0^t ∫_0^s sup|∇θ| dr ds`.
    pub ii_grad_theta: Option<Vec<f64>>,
    pub i_lap_theta: Option<Vec<f64>>,
    pub fronts: Vec<FrontSummary>,
    pub collision: CollisionReport,
    pub integrals_monotone: bool,
}
