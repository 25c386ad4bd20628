//! Doubly-periodic fields on the 2π torus and their exact spectral calculus.
//!
//! Grid values are stored row-major with x1 as the slow index: the value at
//! node `(i, j)` sits at `i * n2 + j` and lives at `(i * dx1, j * dx2)`.
//! Spectral coefficients use the same layout, with slot `i` carrying the
//! signed wavenumber returned by [`GridSpec::wavenumber1`].

mod fft;
pub mod sample;

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use sample::{
    sample_offgrid, sample_vector_offgrid, LinearInTime, SampleMode, ScalarGrid, ScalarSource,
    VelocityGrid, VelocitySource,
};

/// Zero-mean tolerance used by the elliptic inversions, relative to the
/// largest coefficient (or absolute when coefficients are below one).
pub const GAUGE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridSpec {
    n1: usize,
    n2: usize,
}

impl GridSpec {
    pub const MIN_POINTS: usize = 8;

    pub fn new(n1: usize, n2: usize) -> Result<Self> {
        let ok = |n: usize| n >= Self::MIN_POINTS && n.is_multiple_of(2);
        if ok(n1) && ok(n2) {
            Ok(Self { n1, n2 })
        } else {
            Err(Error::InvalidGrid { n1, n2 })
        }
    }

    pub fn square(n: usize) -> Result<Self> {
        Self::new(n, n)
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    /// Number of nodes, `n1 * n2`.
    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx1(&self) -> f64 {
        TAU / self.n1 as f64
    }

    pub fn dx2(&self) -> f64 {
        TAU / self.n2 as f64
    }

    pub fn dx_min(&self) -> f64 {
        self.dx1().min(self.dx2())
    }

    /// Area of one grid cell.
    pub fn cell_area(&self) -> f64 {
        self.dx1() * self.dx2()
    }

    pub fn x1(&self, i: usize) -> f64 {
        i as f64 * self.dx1()
    }

    pub fn x2(&self, j: usize) -> f64 {
        j as f64 * self.dx2()
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n2 + j
    }

    /// Signed wavenumber of storage slot `i` along x1, in `[-n1/2, n1/2 - 1]`.
    pub fn wavenumber1(&self, i: usize) -> i64 {
        signed_wavenumber(i, self.n1)
    }

    pub fn wavenumber2(&self, j: usize) -> i64 {
        signed_wavenumber(j, self.n2)
    }

    /// Storage slot of wavevector `(k1, k2)`, if it is representable.
    pub fn slot(&self, k1: i64, k2: i64) -> Option<usize> {
        let h1 = (self.n1 / 2) as i64;
        let h2 = (self.n2 / 2) as i64;
        if k1 < -h1 || k1 >= h1 || k2 < -h2 || k2 >= h2 {
            return None;
        }
        let i = k1.rem_euclid(self.n1 as i64) as usize;
        let j = k2.rem_euclid(self.n2 as i64) as usize;
        Some(self.index(i, j))
    }

    /// Two-thirds rule: a mode survives dealiasing iff `|k1| <= n1/3` and `|k2| <= n2/3`.
    pub fn retains(&self, k1: i64, k2: i64) -> bool {
        3 * k1.unsigned_abs() as usize <= self.n1 && 3 * k2.unsigned_abs() as usize <= self.n2
    }

    /// Largest `|k|^2` among retained modes.
    pub fn retained_k_max_sq(&self) -> f64 {
        let k1 = (self.n1 / 3) as f64;
        let k2 = (self.n2 / 3) as f64;
        k1 * k1 + k2 * k2
    }

    fn wavevectors(&self) -> impl Iterator<Item = (usize, i64, i64)> + '_ {
        (0..self.n1).flat_map(move |i| {
            let k1 = self.wavenumber1(i);
            (0..self.n2).map(move |j| (self.index(i, j), k1, self.wavenumber2(j)))
        })
    }
}

fn signed_wavenumber(slot: usize, n: usize) -> i64 {
    if slot < n / 2 {
        slot as i64
    } else {
        slot as i64 - n as i64
    }
}

/// Point values of a real doubly-periodic field.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl RealField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), got: values.len() });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_raw(grid: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: GridSpec, value: f64) -> Self {
        Self { grid, values: vec![value; grid.len()] }
    }

    /// Samples `f(x1, x2)` at every node.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.n1() {
            let x1 = grid.x1(i);
            for j in 0..grid.n2() {
                values.push(f(x1, grid.x2(j)));
            }
        }
        Self { grid, values }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Domain integral of the squared field (grid quadrature, exact for band-limited fields).
    pub fn integral_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_area()
    }

    pub fn max_abs_diff(&self, other: &RealField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Pointwise product.
    pub fn mul(&self, other: &RealField) -> Result<RealField> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Ok(RealField::from_raw(self.grid, values))
    }

    pub fn to_spectral(&self) -> SpectralField {
        let mut coeffs: Vec<Complex64> =
            self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft::forward(&mut coeffs, self.grid.n1, self.grid.n2);
        SpectralField { grid: self.grid, coeffs }
    }
}

/// Fourier coefficients of a real field, normalized so that the `k = 0`
/// coefficient is the mean value.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Derivative {
    D1,
    D2,
    Laplacian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Elliptic {
    /// `(-Δ)^{-1}`: divides coefficients by `|k|^2`.
    NegInvLaplacian,
    /// `(-Δ)^{-1/2}`: divides coefficients by `|k|`.
    NegInvSqrtLaplacian,
}

impl SpectralField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self { grid, coeffs: vec![Complex64::default(); grid.len()] }
    }

    /// Builds a field from wavevector coefficients; unlisted modes are zero.
    pub fn from_modes(grid: GridSpec, modes: &[((i64, i64), Complex64)]) -> Result<Self> {
        let mut f = Self::zeros(grid);
        for &((k1, k2), c) in modes {
            let slot = grid.slot(k1, k2).ok_or_else(|| {
                Error::InvalidArgument(format!("wavevector ({k1}, {k2}) not representable"))
            })?;
            f.coeffs[slot] = c;
        }
        Ok(f)
    }

    pub(crate) fn from_raw(grid: GridSpec, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), grid.len());
        Self { grid, coeffs }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient at wavevector `(k1, k2)`; zero for modes the grid cannot hold.
    pub fn coeff(&self, k1: i64, k2: i64) -> Complex64 {
        self.grid.slot(k1, k2).map_or(Complex64::default(), |s| self.coeffs[s])
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Largest `|c(-k) - conj(c(k))|` over wavevectors whose mirror is representable.
    pub fn hermitian_defect(&self) -> f64 {
        let g = self.grid;
        g.wavevectors()
            .filter_map(|(s, k1, k2)| g.slot(-k1, -k2).map(|m| (self.coeffs[m] - self.coeffs[s].conj()).norm()))
            .fold(0.0, f64::max)
    }

    pub fn to_real(&self) -> RealField {
        let mut data = self.coeffs.clone();
        fft::inverse(&mut data, self.grid.n1, self.grid.n2);
        RealField::from_raw(self.grid, data.into_iter().map(|c| c.re).collect())
    }

    /// Applies `f(k1, k2, c)` to every coefficient.
    pub fn map_modes(&self, f: impl Fn(i64, i64, Complex64) -> Complex64) -> SpectralField {
        let mut coeffs = self.coeffs.clone();
        for (s, k1, k2) in self.grid.wavevectors() {
            coeffs[s] = f(k1, k2, coeffs[s]);
        }
        SpectralField { grid: self.grid, coeffs }
    }

    /// Spectral derivative. Odd derivatives drop the unpaired Nyquist mode so
    /// the result stays Hermitian.
    pub fn derivative(&self, op: Derivative) -> SpectralField {
        let h1 = -((self.grid.n1 / 2) as i64);
        let h2 = -((self.grid.n2 / 2) as i64);
        match op {
            Derivative::D1 => self.map_modes(|k1, _, c| {
                if k1 == h1 {
                    Complex64::default()
                } else {
                    c * Complex64::new(0.0, k1 as f64)
                }
            }),
            Derivative::D2 => self.map_modes(|_, k2, c| {
                if k2 == h2 {
                    Complex64::default()
                } else {
                    c * Complex64::new(0.0, k2 as f64)
                }
            }),
            Derivative::Laplacian => self.map_modes(|k1, k2, c| c * -((k1 * k1 + k2 * k2) as f64)),
        }
    }

    /// Inverts `-Δ` or `(-Δ)^{1/2}` in the zero-mean gauge.
    pub fn invert_elliptic(&self, kind: Elliptic) -> Result<SpectralField> {
        self.check_gauge("field")?;
        Ok(self.map_modes(|k1, k2, c| {
            let k_sq = (k1 * k1 + k2 * k2) as f64;
            if k_sq == 0.0 {
                Complex64::default()
            } else {
                match kind {
                    Elliptic::NegInvLaplacian => c / k_sq,
                    Elliptic::NegInvSqrtLaplacian => c / k_sq.sqrt(),
                }
            }
        }))
    }

    pub(crate) fn check_gauge(&self, field: &'static str) -> Result<()> {
        let scale = self.coeffs.iter().fold(1.0_f64, |m, c| m.max(c.norm()));
        let mean = self.coeffs[0].norm();
        if mean > GAUGE_TOL * scale {
            Err(Error::Gauge { field, mean: self.coeffs[0].re })
        } else {
            Ok(())
        }
    }

    /// Two-thirds rule truncation.
    pub fn dealias(&self) -> SpectralField {
        let g = self.grid;
        self.map_modes(|k1, k2, c| if g.retains(k1, k2) { c } else { Complex64::default() })
    }

    pub(crate) fn dealias_in_place(&mut self) {
        let g = self.grid;
        for (s, k1, k2) in g.wavevectors() {
            if !g.retains(k1, k2) {
                self.coeffs[s] = Complex64::default();
            }
        }
    }

    /// Sum of squared coefficient magnitudes; equals the mean square of the
    /// grid values (Parseval).
    pub fn power(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn scale(&self, factor: f64) -> SpectralField {
        SpectralField { grid: self.grid, coeffs: self.coeffs.iter().map(|c| c * factor).collect() }
    }
}

/// Velocity components on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub u1: RealField,
    pub u2: RealField,
}

impl VectorField {
    pub fn new(u1: RealField, u2: RealField) -> Result<Self> {
        if u1.grid() != u2.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { u1, u2 })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self { u1: RealField::zeros(grid), u2: RealField::zeros(grid) }
    }

    pub fn grid(&self) -> GridSpec {
        self.u1.grid()
    }

    /// `max |u|` over grid nodes.
    pub fn max_speed(&self) -> f64 {
        self.u1
            .values()
            .iter()
            .zip(self.u2.values())
            .fold(0.0, |m, (a, b)| m.max(a.hypot(*b)))
    }

    /// Largest magnitude of the spectral divergence on the grid.
    pub fn max_divergence(&self) -> f64 {
        let d1 = self.u1.to_spectral().derivative(Derivative::D1);
        let d2 = self.u2.to_spectral().derivative(Derivative::D2);
        let coeffs = d1.coeffs.iter().zip(&d2.coeffs).map(|(a, b)| a + b).collect();
        SpectralField::from_raw(self.grid(), coeffs).to_real().max_abs()
    }

    pub fn is_finite(&self) -> bool {
        self.u1.is_finite() && self.u2.is_finite()
    }
}

/// `u = ∇⊥ψ = (-∂ψ/∂x2, ∂ψ/∂x1)`.
pub fn perp_gradient(psi: &SpectralField) -> VectorField {
    let u1 = psi.derivative(Derivative::D2).scale(-1.0).to_real();
    let u2 = psi.derivative(Derivative::D1).to_real();
    VectorField { u1, u2 }
}

/// Pointwise Frobenius norm of the velocity gradient of `u = ∇⊥ψ`.
///
/// With `u1 = -ψ_2`, `u2 = ψ_1` the Jacobian entries are `-ψ_12, -ψ_22, ψ_11, ψ_12`.
pub fn velocity_gradient_norm(psi: &SpectralField) -> RealField {
    let p1 = psi.derivative(Derivative::D1);
    let p11 = p1.derivative(Derivative::D1).to_real();
    let p12 = p1.derivative(Derivative::D2).to_real();
    let p22 = psi.derivative(Derivative::D2).derivative(Derivative::D2).to_real();
    let values = p11
        .values()
        .iter()
        .zip(p12.values())
        .zip(p22.values())
        .map(|((a, b), c)| (a * a + 2.0 * b * b + c * c).sqrt())
        .collect();
    RealField::from_raw(psi.grid(), values)
}

/// Pseudo-spectral product `a * b`, truncated by the two-thirds rule.
pub fn dealiased_product(a: &RealField, b: &RealField) -> Result<SpectralField> {
    let mut p = a.mul(b)?.to_spectral();
    p.dealias_in_place();
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> GridSpec {
        GridSpec::square(n).unwrap()
    }

    #[test]
    fn grid_rejects_odd_and_small() {
        assert!(GridSpec::new(6, 8).is_err());
        assert!(GridSpec::new(9, 8).is_err());
        assert!(GridSpec::new(8, 10).is_ok());
    }

    #[test]
    fn wavenumbers_cover_half_open_band() {
        let g = grid(8);
        let ks: Vec<i64> = (0..8).map(|i| g.wavenumber1(i)).collect();
        assert_eq!(ks, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        assert_eq!(g.slot(-4, 0), Some(g.index(4, 0)));
        assert_eq!(g.slot(4, 0), None);
    }

    #[test]
    fn rejects_non_finite_values() {
        let g = grid(8);
        let mut v = vec![0.0; 64];
        v[5] = f64::NAN;
        assert_eq!(RealField::new(g, v), Err(Error::NonFinite { index: 5 }));
        assert!(RealField::new(g, vec![0.0; 3]).is_err());
    }

    #[test]
    fn constant_field_has_only_mean_mode() {
        let f = RealField::constant(grid(16), 1.0).to_spectral();
        assert!((f.coeff(0, 0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let rest: f64 = f.coeffs().iter().skip(1).map(|c| c.norm()).sum();
        assert!(rest < 1e-14);
    }

    #[test]
    fn cosine_splits_into_two_half_modes() {
        let f = RealField::from_fn(grid(32), |x1, _| x1.cos()).to_spectral();
        assert!((f.coeff(1, 0).norm() - 0.5).abs() < 1e-14);
        assert!((f.coeff(-1, 0).norm() - 0.5).abs() < 1e-14);
        let total: f64 = f.coeffs().iter().map(|c| c.norm()).sum();
        assert!((total - 1.0).abs() < 1e-13);
    }

    #[test]
    fn derivative_examples() {
        let g = grid(32);
        let c = RealField::constant(g, 3.0).to_spectral().derivative(Derivative::D1).to_real();
        assert!(c.max_abs() < 1e-14);

        let s = RealField::from_fn(g, |x1, _| x1.sin()).to_spectral();
        let ds = s.derivative(Derivative::D1).to_real();
        assert!((ds.at(0, 0) - 1.0).abs() < 1e-12);

        let f = RealField::from_fn(g, |_, x2| (2.0 * x2).cos());
        let lap = f.to_spectral().derivative(Derivative::Laplacian).to_real();
        let expect = RealField::from_fn(g, |_, x2| -4.0 * (2.0 * x2).cos());
        assert!(lap.max_abs_diff(&expect) < 1e-12);
    }

    #[test]
    fn elliptic_examples() {
        let g = grid(32);
        let cos1 = RealField::from_fn(g, |x1, _| x1.cos());
        let psi = cos1.to_spectral().invert_elliptic(Elliptic::NegInvLaplacian).unwrap().to_real();
        assert!(psi.max_abs_diff(&cos1) < 1e-13);

        let qg = cos1
            .to_spectral()
            .invert_elliptic(Elliptic::NegInvSqrtLaplacian)
            .unwrap()
            .scale(-1.0)
            .to_real();
        let expect = RealField::from_fn(g, |x1, _| -x1.cos());
        assert!(qg.max_abs_diff(&expect) < 1e-13);

        let z = SpectralField::zeros(g).invert_elliptic(Elliptic::NegInvLaplacian).unwrap();
        assert_eq!(z.power(), 0.0);
    }

    #[test]
    fn elliptic_rejects_nonzero_mean() {
        let f = RealField::from_fn(grid(16), |x1, _| 1.0 + x1.cos()).to_spectral();
        match f.invert_elliptic(Elliptic::NegInvLaplacian) {
            Err(Error::Gauge { mean, .. }) => assert!((mean - 1.0).abs() < 1e-14),
            other => panic!("expected gauge error, got {other:?}"),
        }
    }

    #[test]
    fn perp_gradient_examples() {
        let g = grid(32);
        let u = perp_gradient(&RealField::from_fn(g, |_, x2| x2.sin()).to_spectral());
        let expect = RealField::from_fn(g, |_, x2| -x2.cos());
        assert!(u.u1.max_abs_diff(&expect) < 1e-13);
        assert!(u.u2.max_abs() < 1e-13);

        let u0 = perp_gradient(&RealField::constant(g, 2.0).to_spectral());
        assert!(u0.max_speed() < 1e-14);

        let psi = RealField::from_fn(g, |x1, x2| x1.sin() * x2.sin()).to_spectral();
        let u = perp_gradient(&psi);
        assert!(u.u1.at(0, 0).abs() < 1e-13 && u.u2.at(0, 0).abs() < 1e-13);
        let grad = velocity_gradient_norm(&psi);
        assert!((grad.at(0, 0) - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn dealias_examples() {
        let g = grid(64);
        let low = SpectralField::from_modes(g, &[((1, 0), Complex64::new(0.5, 0.0))]).unwrap();
        assert_eq!(low.dealias(), low);
        let high = SpectralField::from_modes(g, &[((31, 0), Complex64::new(0.5, 0.0))]).unwrap();
        assert_eq!(high.dealias().power(), 0.0);

        let s = RealField::from_fn(g, |x1, _| x1.sin());
        let prod = dealiased_product(&s, &s).unwrap().to_real();
        let expect = RealField::from_fn(g, |x1, _| 0.5 - 0.5 * (2.0 * x1).cos());
        assert!(prod.max_abs_diff(&expect) < 1e-12);
    }

    #[test]
    fn nyquist_dropped_by_odd_derivative() {
        let g = grid(8);
        let f = RealField::from_fn(g, |x1, _| (4.0 * x1).cos()).to_spectral();
        assert!(f.derivative(Derivative::D1).power() < 1e-28);
        assert!(f.derivative(Derivative::D1).hermitian_defect() < 1e-15);
        let lap = f.derivative(Derivative::Laplacian).to_real();
        assert!((lap.at(0, 0) + 16.0).abs() < 1e-12);
    }
}
