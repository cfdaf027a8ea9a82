//! Total-variation inpainting on `M × N` grayscale images stored row-major.
//!
//! The discrete gradient `L x = (L1 x, L2 x)` uses forward differences with
//! zero rows/columns on the last row/column. A gradient field is stored flat
//! as `[gx (M·N), gy (M·N)]`.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, param, Error, Result};
use crate::ops::{op_norm_upper_bound, BoxProx, LinearMap, LipschitzOp, ProxOracle, ZeroOp};
use crate::product::{CompositeProblem, Layout};
use crate::rng::shuffled_indices;
use crate::splitting::{Monitor, Probe, StepView};
use crate::vecops::dist_sq;
use crate::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Image<T> {
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<T>,
}

impl<T: Scalar> Image<T> {
    pub fn new(rows: usize, cols: usize, pixels: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(param("image needs at least one pixel"));
        }
        check_dim(rows * cols, pixels.len())?;
        Ok(Self { rows, cols, pixels })
    }

    pub fn constant(rows: usize, cols: usize, value: T) -> Result<Self> {
        Self::new(rows, cols, vec![value; rows * cols])
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.pixels[i * self.cols + j]
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn in_unit_range(&self) -> bool {
        self.pixels.iter().all(|&p| p >= T::zero() && p <= T::one())
    }
}

/// Observation pattern; `true` marks an observed pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    pub rows: usize,
    pub cols: usize,
    pub observed: Vec<bool>,
}

impl Mask {
    pub fn new(rows: usize, cols: usize, observed: Vec<bool>) -> Result<Self> {
        check_dim(rows * cols, observed.len())?;
        Ok(Self { rows, cols, observed })
    }

    pub fn all_observed(rows: usize, cols: usize) -> Self {
        Self { rows, cols, observed: vec![true; rows * cols] }
    }

    pub fn missing(&self) -> usize {
        self.observed.iter().filter(|&&o| !o).count()
    }

    /// `P v`: zero at missing pixels.
    pub fn apply<T: Scalar>(&self, v: &[T]) -> Vec<T> {
        v.iter().zip(&self.observed).map(|(&x, &o)| if o { x } else { T::zero() }).collect()
    }
}

/// Marks exactly `round(missing_ratio · M · N)` pixels as missing: the first
/// indices of a seeded Fisher-Yates shuffle of `0..M·N`.
pub fn make_mask(rows: usize, cols: usize, missing_ratio: f64, seed: u64) -> Result<Mask> {
    if !(0.0..1.0).contains(&missing_ratio) {
        return Err(param(format!("missing ratio must lie in [0, 1), got {missing_ratio}")));
    }
    let n = rows * cols;
    let k = (missing_ratio * n as f64).round() as usize;
    let mut observed = vec![true; n];
    for &i in shuffled_indices(n, seed).iter().take(k) {
        observed[i] = false;
    }
    Mask::new(rows, cols, observed)
}

/// `b = P x`: missing pixels set to black.
pub fn corrupt<T: Scalar>(img: &Image<T>, mask: &Mask) -> Result<Image<T>> {
    check_dim(img.len(), mask.observed.len())?;
    Image::new(img.rows, img.cols, mask.apply(&img.pixels))
}

/// Flat gradient field `[gx, gy]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradField<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T: Scalar> GradField<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        check_dim(2 * rows * cols, data.len())?;
        Ok(Self { rows, cols, data })
    }

    pub fn gx(&self) -> &[T] {
        &self.data[..self.rows * self.cols]
    }

    pub fn gy(&self) -> &[T] {
        &self.data[self.rows * self.cols..]
    }
}

/// The discrete gradient as a linear map `R^{MN} -> R^{2MN}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gradient2d<T> {
    pub rows: usize,
    pub cols: usize,
    bound: T,
}

impl<T: Scalar> Gradient2d<T> {
    /// Uses the analytic bound `||L|| <= sqrt 8`.
    pub fn new(rows: usize, cols: usize) -> Self {
        Self { rows, cols, bound: T::lit(8.0).sqrt() }
    }

    /// Replaces the bound by a power-iteration estimate with safety margin.
    pub fn with_estimated_bound(mut self) -> Result<Self> {
        self.bound = op_norm_upper_bound(&self)?;
        Ok(self)
    }
}

impl<T: Scalar> LinearMap<T> for Gradient2d<T> {
    fn in_dim(&self) -> usize {
        self.rows * self.cols
    }

    fn out_dim(&self) -> usize {
        2 * self.rows * self.cols
    }

    fn apply_to(&self, x: &[T], out: &mut [T]) {
        let (m, n) = (self.rows, self.cols);
        let (gx, gy) = out.split_at_mut(m * n);
        for i in 0..m {
            for j in 0..n {
                let k = i * n + j;
                gx[k] = if i + 1 < m { x[k + n] - x[k] } else { T::zero() };
                gy[k] = if j + 1 < n { x[k + 1] - x[k] } else { T::zero() };
            }
        }
    }

    fn adjoint_to(&self, g: &[T], out: &mut [T]) {
        let (m, n) = (self.rows, self.cols);
        let (gx, gy) = g.split_at(m * n);
        for i in 0..m {
            for j in 0..n {
                let k = i * n + j;
                let mut v = T::zero();
                if i + 1 < m {
                    v = v - gx[k];
                }
                if i > 0 {
                    v = v + gx[k - n];
                }
                if j + 1 < n {
                    v = v - gy[k];
                }
                if j > 0 {
                    v = v + gy[k - 1];
                }
                out[k] = v;
            }
        }
    }

    fn norm_bound(&self) -> T {
        self.bound
    }
}

pub fn grad_forward<T: Scalar>(img: &Image<T>) -> GradField<T> {
    let l = Gradient2d::new(img.rows, img.cols);
    GradField { rows: img.rows, cols: img.cols, data: l.apply(&img.pixels) }
}

/// `L* g` (the negative discrete divergence).
pub fn div_adjoint<T: Scalar>(g: &GradField<T>) -> Vec<T> {
    Gradient2d::new(g.rows, g.cols).adjoint(&g.data)
}

/// Isotropic total variation, summed directly from pixel differences.
pub fn tv_iso<T: Scalar>(img: &Image<T>) -> T {
    let (m, n) = (img.rows, img.cols);
    let x = |i: usize, j: usize| img.get(i, j);
    let mut tv = T::zero();
    for i in 0..m.saturating_sub(1) {
        for j in 0..n.saturating_sub(1) {
            let a = x(i + 1, j) - x(i, j);
            let b = x(i, j + 1) - x(i, j);
            tv = tv + (a * a + b * b).sqrt();
        }
    }
    for j in 0..n.saturating_sub(1) {
        tv = tv + (x(m - 1, j + 1) - x(m - 1, j)).abs();
    }
    for i in 0..m.saturating_sub(1) {
        tv = tv + (x(i + 1, n - 1) - x(i, n - 1)).abs();
    }
    tv
}

/// `||(p, q)||_× = Σ sqrt(p_k^2 + q_k^2)`
pub fn cross_norm<T: Scalar>(g: &GradField<T>) -> T {
    g.gx().iter().zip(g.gy()).map(|(&p, &q)| (p * p + q * q).sqrt()).sum()
}

fn disks_to<T: Scalar>(g: &[T], out: &mut [T]) {
    let half = g.len() / 2;
    for k in 0..half {
        let (p, q) = (g[k], g[k + half]);
        let s = T::one().max((p * p + q * q).sqrt());
        out[k] = p / s;
        out[k + half] = q / s;
    }
}

/// Scales every pixel pair onto the closed unit disk.
pub fn proj_unit_disks<T: Scalar>(g: &GradField<T>) -> GradField<T> {
    let mut data = vec![T::zero(); g.data.len()];
    disks_to(&g.data, &mut data);
    GradField { rows: g.rows, cols: g.cols, data }
}

/// `prox_{gamma ||.||_×*}`: projection onto the product of unit disks,
/// independent of `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiskProjection {
    pub pixels: usize,
}

impl<T: Scalar> ProxOracle<T> for DiskProjection {
    fn dim(&self) -> usize {
        2 * self.pixels
    }

    fn prox_to(&self, _gamma: T, x: &[T], out: &mut [T]) {
        disks_to(x, out)
    }
}

/// `prox_{gamma ||.||_×}`: pixelwise group soft thresholding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CrossNormProx {
    pub pixels: usize,
}

impl<T: Scalar> ProxOracle<T> for CrossNormProx {
    fn dim(&self) -> usize {
        2 * self.pixels
    }

    fn prox_to(&self, gamma: T, x: &[T], out: &mut [T]) {
        let half = self.pixels;
        for k in 0..half {
            let (p, q) = (x[k], x[k + half]);
            let r = (p * p + q * q).sqrt();
            let s = if r > gamma { (r - gamma) / r } else { T::zero() };
            out[k] = s * p;
            out[k + half] = s * q;
        }
    }
}

/// `∇Ψ(x) = P(x - b)` for `Ψ = 1/2 ||Px - b||^2` with `b = Pb`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskPenalty<T> {
    observed: Vec<bool>,
    b: Vec<T>,
}

impl<T: Scalar> MaskPenalty<T> {
    pub fn new(mask: &Mask, b: &[T]) -> Result<Self> {
        check_dim(mask.observed.len(), b.len())?;
        Ok(Self { observed: mask.observed.clone(), b: b.to_vec() })
    }
}

impl<T: Scalar> LipschitzOp<T> for MaskPenalty<T> {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn eval_to(&self, x: &[T], out: &mut [T]) {
        for k in 0..out.len() {
            out[k] = if self.observed[k] { x[k] - self.b[k] } else { T::zero() };
        }
    }

    fn lipschitz(&self) -> T {
        T::one()
    }
}

pub fn psi_grad<T: Scalar>(x: &[T], mask: &Mask, b: &[T]) -> Result<Vec<T>> {
    check_dim(b.len(), x.len())?;
    Ok(MaskPenalty::new(mask, b)?.eval(x))
}

/// `10 log10(||x - b||^2 / ||x - xn||^2)` in dB; `+inf` for a perfect
/// reconstruction.
pub fn isnr<T: Scalar>(x: &[T], b: &[T], xn: &[T]) -> Result<f64> {
    check_dim(x.len(), b.len())?;
    check_dim(x.len(), xn.len())?;
    let num = dist_sq(x, b).as_f64();
    if num == 0.0 {
        return Err(Error::Undefined("ISNR needs a corrupted image different from the original".into()));
    }
    let den = dist_sq(x, xn).as_f64();
    if den == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (num / den).log10())
}

/// Piecewise-constant test scene: a background, a bright rectangle, a disk
/// and a dark bar.
pub fn synthetic_image<T: Scalar>(rows: usize, cols: usize) -> Result<Image<T>> {
    let (mf, nf) = (rows as f64, cols as f64);
    let radius = 0.22 * mf.min(nf);
    let mut pixels = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let (u, v) = (i as f64 + 0.5, j as f64 + 0.5);
            let (di, dj) = (u - 0.65 * mf, v - 0.62 * nf);
            let value = if di * di + dj * dj <= radius * radius {
                0.6
            } else if (0.12 * mf..0.5 * mf).contains(&u) && (0.1 * nf..0.48 * nf).contains(&v) {
                0.9
            } else if (0.78 * mf..0.88 * mf).contains(&u) && (0.08 * nf..0.4 * nf).contains(&v) {
                0.35
            } else {
                0.15
            };
            pixels.push(T::lit(value));
        }
    }
    Image::new(rows, cols, pixels)
}

/// How the Lipschitz constant of `L` enters the lifted problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GradientBound {
    /// `sqrt 8`
    #[default]
    Analytic,
    /// Power iteration with safety margin.
    Estimated,
}

/// `min_{x ∈ argmin Ψ} δ_{[0,1]^n}(x) + ||Lx||_×` with `Ψ = 1/2 ||Px - b||^2`.
pub fn build_inpainting_problem<T: Scalar>(b: &Image<T>, mask: &Mask, bound: GradientBound) -> Result<CompositeProblem<T>> {
    check_dim(b.len(), mask.observed.len())?;
    let n = b.len();
    let mut l = Gradient2d::new(b.rows, b.cols);
    if bound == GradientBound::Estimated {
        l = l.with_estimated_bound()?;
    }
    CompositeProblem::new(
        Box::new(BoxProx::new(n, T::zero(), T::one())?),
        Box::new(ZeroOp(n)),
        Box::new(MaskPenalty::new(mask, &b.pixels)?),
    )?
    .with_term(Box::new(DiskProjection { pixels: n }), Box::new(l))
}

/// Reports ISNR of the averaged and plain primal iterates, and tracks the
/// feasibility of every trial point (box for `y_n`, unit disks for `q_n`).
#[derive(Debug, Clone)]
pub struct InpaintMonitor<T> {
    clean: Vec<T>,
    corrupted: Vec<T>,
    layout: Layout,
    pub max_box_violation: f64,
    pub max_disk_violation: f64,
}

impl<T: Scalar> InpaintMonitor<T> {
    pub fn new(clean: &Image<T>, corrupted: &Image<T>, layout: Layout) -> Result<Self> {
        check_dim(clean.len(), corrupted.len())?;
        check_dim(clean.len(), layout.primal().len())?;
        Ok(Self {
            clean: clean.pixels.clone(),
            corrupted: corrupted.pixels.clone(),
            layout,
            max_box_violation: 0.0,
            max_disk_violation: 0.0,
        })
    }
}

impl<T: Scalar> Monitor<T> for InpaintMonitor<T> {
    fn observe(&mut self, view: &StepView<'_, T>) -> Probe {
        let p = self.layout.primal();
        for &v in &view.y[p.clone()] {
            let v = v.as_f64();
            let excess = (-v).max(v - 1.0);
            if excess > self.max_box_violation {
                self.max_box_violation = excess;
            }
        }
        let q = &view.y[self.layout.dual(0)];
        let half = q.len() / 2;
        for k in 0..half {
            let r = (q[k] * q[k] + q[k + half] * q[k + half]).sqrt().as_f64();
            self.max_disk_violation = self.max_disk_violation.max(r - 1.0);
        }
        Probe {
            distance: None,
            isnr_avg: isnr(&self.clean, &self.corrupted, &view.z[p.clone()]).ok(),
            isnr_nonavg: isnr(&self.clean, &self.corrupted, &view.x[p]).ok(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn img(rows: &[Vec<f64>]) -> Image<f64> {
        Image::new(rows.len(), rows[0].len(), rows.concat()).unwrap()
    }

    #[test]
    fn gradient_of_two_by_two() {
        let g = grad_forward(&img(&[vec![0.0, 1.0], vec![0.0, 1.0]]));
        assert_eq!(g.gx(), &[0.0, 0.0, 0.0, 0.0]);
        assert_eq!(g.gy(), &[1.0, 0.0, 1.0, 0.0]);
        assert_eq!(tv_iso(&img(&[vec![0.0, 1.0], vec![0.0, 1.0]])), 2.0);
    }

    #[test]
    fn single_pixel_and_constants() {
        let one = Image::constant(1, 1, 0.3).unwrap();
        assert_eq!(grad_forward(&one).data, vec![0.0, 0.0]);
        let c = Image::constant(3, 4, 0.5).unwrap();
        let g = grad_forward(&c);
        assert!(g.data.iter().all(|&v| v == 0.0));
        assert!(div_adjoint(&g).iter().all(|&v| v == 0.0));
        assert_eq!(tv_iso(&c), 0.0);
    }

    #[test]
    fn ramp_row_has_unit_tv() {
        let n = 7;
        let ramp: Vec<f64> = (0..n).map(|j| j as f64 / (n - 1) as f64).collect();
        let im = Image::new(1, n, ramp).unwrap();
        assert!((tv_iso(&im) - 1.0).abs() < 1e-15);
        assert!((cross_norm(&grad_forward(&im)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn disks() {
        let g = GradField::new(1, 3, vec![0.3, 3.0, 1.0, 0.4, 4.0, 0.0]).unwrap();
        let p = proj_unit_disks(&g);
        assert_eq!(p.data, vec![0.3, 0.6, 1.0, 0.4, 0.8, 0.0]);
    }

    #[test]
    fn mask_counts_and_determinism() {
        assert_eq!(make_mask(4, 4, 0.0, 1).unwrap().missing(), 0);
        assert_eq!(make_mask(2, 2, 0.5, 99).unwrap().missing(), 2);
        assert_eq!(make_mask(8, 9, 0.8, 7).unwrap(), make_mask(8, 9, 0.8, 7).unwrap());
        assert!(make_mask(2, 2, 1.0, 0).is_err());
        assert!(make_mask(2, 2, -0.1, 0).is_err());
    }

    #[test]
    fn penalty_gradient() {
        let mask = Mask::new(1, 2, vec![true, false]).unwrap();
        assert_eq!(psi_grad(&[0.7, 0.2], &mask, &[0.5, 0.0]).unwrap()[1], 0.0);
        assert!((psi_grad(&[0.7_f64, 0.2], &mask, &[0.5, 0.0]).unwrap()[0] - 0.2).abs() < 1e-15);
        let none = Mask::new(1, 2, vec![false, false]).unwrap();
        assert_eq!(psi_grad(&[0.7, 0.2], &none, &[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn isnr_values() {
        let x = [1.0, 0.0];
        let b = [0.0, 0.0];
        assert_eq!(isnr(&x, &b, &b).unwrap(), 0.0);
        assert!((isnr(&x, &b, &[0.9, 0.0]).unwrap() - 20.0).abs() < 1e-12);
        assert_eq!(isnr(&x, &b, &x).unwrap(), f64::INFINITY);
        assert!(matches!(isnr(&x, &x, &b), Err(Error::Undefined(_))));
    }

    #[test]
    fn synthetic_scene_is_piecewise_constant() {
        let im: Image<f64> = synthetic_image(16, 16).unwrap();
        assert!(im.in_unit_range());
        let mut levels: Vec<u64> = im.pixels.iter().map(|p| p.to_bits()).collect();
        levels.sort_unstable();
        levels.dedup();
        assert_eq!(levels.len(), 4);
    }
}
