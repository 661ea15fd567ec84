//! Spatial grid and wave-function representation.
//!
//! The grid is periodic: `n_points` samples starting at `x_min` with spacing
//! `(x_max - x_min) / n_points`, so the last sample sits at `x_max - dx`.
//! All inner products use the rectangle rule with weight `dx`.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct Grid {
    n_points: usize,
    x_min: f64,
    x_max: f64,
    dx: f64,
    x: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSpec {
    n_points: usize,
    x_min: f64,
    x_max: f64,
}

impl TryFrom<GridSpec> for Grid {
    type Error = Error;

    fn try_from(spec: GridSpec) -> Result<Self> {
        Grid::new(spec.n_points, spec.x_min, spec.x_max)
    }
}

impl From<Grid> for GridSpec {
    fn from(grid: Grid) -> Self {
        GridSpec {
            n_points: grid.n_points,
            x_min: grid.x_min,
            x_max: grid.x_max,
        }
    }
}

impl Default for Grid {
    fn default() -> Self {
        Grid::new(128, -1.0, 1.0).expect("default grid is valid")
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n_points == other.n_points && self.x_min == other.x_min && self.x_max == other.x_max
    }
}

impl Grid {
    pub fn new(n_points: usize, x_min: f64, x_max: f64) -> Result<Self> {
        if n_points < 2 {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least 2 points, got {n_points}"
            )));
        }
        if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
            return Err(Error::InvalidParameter(format!(
                "grid bounds must satisfy x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        let dx = (x_max - x_min) / n_points as f64;
        let x = (0..n_points).map(|i| x_min + i as f64 * dx).collect();
        Ok(Grid {
            n_points,
            x_min,
            x_max,
            dx,
            x,
        })
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        self.n_points == 0
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// Whether `pos` lies strictly inside the domain.
    pub fn contains(&self, pos: f64) -> bool {
        pos > self.x_min && pos < self.x_max
    }

    /// Angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n_points;
        let dk = 2.0 * std::f64::consts::PI / (self.x_max - self.x_min);
        (0..n)
            .map(|i| {
                let j = if i <= n / 2 { i as f64 } else { i as f64 - n as f64 };
                j * dk
            })
            .collect()
    }
}

/// Complex amplitudes sampled on a [`Grid`].
#[derive(Debug, Clone)]
pub struct WaveFunction {
    grid: Arc<Grid>,
    values: Vec<Complex64>,
}

impl WaveFunction {
    pub fn new(grid: Arc<Grid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(WaveFunction { grid, values })
    }

    /// Builds a state from a real-valued profile.
    pub fn from_real(grid: Arc<Grid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.x().iter().map(|&x| Complex64::new(f(x), 0.0)).collect();
        WaveFunction { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    /// Probability mass outside `|x| <= limit`.
    pub fn mass_beyond(&self, limit: f64) -> f64 {
        self.grid
            .x()
            .iter()
            .zip(&self.values)
            .filter(|(x, _)| x.abs() > limit)
            .map(|(_, v)| v.norm_sqr())
            .sum::<f64>()
            * self.grid.dx()
    }
}

/// `<a|b> = sum conj(a_i) b_i dx`.
pub fn inner_product(a: &WaveFunction, b: &WaveFunction) -> Result<Complex64> {
    if *a.grid != *b.grid {
        return Err(Error::GridMismatch(format!(
            "{} points on [{}, {}) vs {} points on [{}, {})",
            a.grid.len(),
            a.grid.x_min(),
            a.grid.x_max(),
            b.grid.len(),
            b.grid.x_min(),
            b.grid.x_max()
        )));
    }
    Ok(raw_inner(&a.values, &b.values, a.grid.dx()))
}

pub(crate) fn raw_inner(a: &[Complex64], b: &[Complex64], dx: f64) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>() * dx
}

pub fn normalize(psi: &WaveFunction) -> Result<WaveFunction> {
    let norm = psi.norm_sqr().sqrt();
    if !(norm.is_finite() && norm > 0.0) {
        return Err(Error::DegenerateState(format!("cannot normalize state with norm {norm}")));
    }
    let values = psi.values.iter().map(|v| v / norm).collect();
    Ok(WaveFunction {
        grid: psi.grid.clone(),
        values,
    })
}

/// `sum x_i |psi_i|^2 dx` for a normalized state.
pub fn expectation_position(psi: &WaveFunction) -> f64 {
    psi.grid
        .x()
        .iter()
        .zip(&psi.values)
        .map(|(x, v)| x * v.norm_sqr())
        .sum::<f64>()
        * psi.grid.dx()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(grid: &Arc<Grid>, center: f64, width: f64) -> WaveFunction {
        normalize(&WaveFunction::from_real(grid.clone(), |x| {
            (-(x - center).powi(2) / (2.0 * width * width)).exp()
        }))
        .unwrap()
    }

    #[test]
    fn default_grid_is_periodic() {
        let g = Grid::default();
        assert_eq!(g.len(), 128);
        assert_eq!(g.x()[0], -1.0);
        assert!((g.x()[127] - (1.0 - g.dx())).abs() < 1e-15);
        assert!((g.dx() - 2.0 / 128.0).abs() < 1e-15);
        assert!(g.x().windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn self_overlap_is_one() {
        let g = Arc::new(Grid::default());
        let psi = gaussian(&g, 0.1, 0.1);
        let o = inner_product(&psi, &psi).unwrap();
        assert!((o.re - 1.0).abs() < 1e-12);
        assert!(o.im.abs() < 1e-15);
    }

    #[test]
    fn disjoint_support_is_orthogonal() {
        let g = Arc::new(Grid::default());
        let a = WaveFunction::from_real(g.clone(), |x| if x < 0.0 { 1.0 } else { 0.0 });
        let b = WaveFunction::from_real(g.clone(), |x| if x >= 0.0 { 1.0 } else { 0.0 });
        assert_eq!(inner_product(&a, &b).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn half_domain_shift_has_negligible_overlap() {
        let g = Arc::new(Grid::default());
        let a = gaussian(&g, -0.5, 0.07);
        let b = gaussian(&g, 0.5, 0.07);
        // direct summation oracle on independently normalized profiles
        let fa: Vec<f64> = g.x().iter().map(|&x| (-(x + 0.5f64).powi(2) / 0.0098).exp()).collect();
        let fb: Vec<f64> = g.x().iter().map(|&x| (-(x - 0.5f64).powi(2) / 0.0098).exp()).collect();
        let na: f64 = fa.iter().map(|v| v * v).sum::<f64>() * g.dx();
        let nb: f64 = fb.iter().map(|v| v * v).sum::<f64>() * g.dx();
        let direct: f64 =
            fa.iter().zip(&fb).map(|(p, q)| p * q).sum::<f64>() * g.dx() / (na * nb).sqrt();
        let o = inner_product(&a, &b).unwrap();
        assert!(direct < 1e-6);
        assert!(o.norm() < 1e-6);
        assert!((o.re - direct).abs() < 1e-12);
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let a = WaveFunction::from_real(Arc::new(Grid::default()), |_| 1.0);
        let b = WaveFunction::from_real(Arc::new(Grid::new(64, -1.0, 1.0).unwrap()), |_| 1.0);
        assert!(matches!(inner_product(&a, &b), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn normalize_zero_is_degenerate() {
        let z = WaveFunction::from_real(Arc::new(Grid::default()), |_| 0.0);
        assert!(matches!(normalize(&z), Err(Error::DegenerateState(_))));
    }

    #[test]
    fn normalize_is_scale_invariant_and_idempotent() {
        let g = Arc::new(Grid::default());
        let psi = gaussian(&g, 0.2, 0.15);
        let again = normalize(&psi).unwrap();
        let scaled = WaveFunction::new(g.clone(), psi.values().iter().map(|v| v * 3.0).collect())
            .unwrap();
        let rescaled = normalize(&scaled).unwrap();
        for ((a, b), c) in psi.values().iter().zip(again.values()).zip(rescaled.values()) {
            assert!((a - b).norm() < 1e-12);
            assert!((a - c).norm() < 1e-12);
        }
    }

    #[test]
    fn position_expectations() {
        let g = Arc::new(Grid::default());
        let even = gaussian(&g, 0.0, 0.1);
        // the periodic grid is symmetric about 0 except for the unpaired x = -1 sample
        assert!(expectation_position(&even).abs() < 1e-10);

        let k = 83;
        let mut values = vec![Complex64::new(0.0, 0.0); g.len()];
        values[k] = Complex64::new(1.0, 0.0);
        let delta = normalize(&WaveFunction::new(g.clone(), values).unwrap()).unwrap();
        assert!((expectation_position(&delta) - g.x()[k]).abs() < g.dx());
    }

    #[test]
    fn wavenumbers_follow_fft_order() {
        let g = Grid::new(8, 0.0, 2.0 * std::f64::consts::PI).unwrap();
        let k = g.wavenumbers();
        assert_eq!(k, vec![0.0, 1.0, 2.0, 3.0, 4.0, -3.0, -2.0, -1.0]);
    }
}
