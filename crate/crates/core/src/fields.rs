//! The two-component state `(f, p)`, boundary signals, traces, one-sided
//! normal derivatives, and the weighted inner product under which the
//! diffusion operator is symmetric.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{BoundarySegment, Grid, SegmentTag};

/// Flow arrangement of the permeate stream relative to the feed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    CoCurrent,
    CounterCurrent,
}

/// Physical coefficients of the coupled advection-diffusion system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Feed thermal diffusivity (> 0).
    pub alpha_f: f64,
    /// Permeate thermal diffusivity (> 0).
    pub alpha_p: f64,
    /// Feed flow velocity (>= 0).
    pub beta_f: f64,
    /// Permeate flow velocity magnitude; its direction follows `orientation`.
    pub beta_p: f64,
    /// Membrane coupling coefficient on the feed side (> 0).
    pub gamma_f: f64,
    /// Membrane coupling coefficient on the permeate side (> 0).
    pub gamma_p: f64,
    pub orientation: Orientation,
}

impl PhysicalParams {
    /// Constants of the reference simulation: `alpha_f = 3`, `alpha_p = 3.5`,
    /// `gamma_f = 0.2`, `gamma_p = 0.1`, no advection, co-current.
    pub fn reference() -> Self {
        PhysicalParams {
            alpha_f: 3.0,
            alpha_p: 3.5,
            beta_f: 0.0,
            beta_p: 0.0,
            gamma_f: 0.2,
            gamma_p: 0.1,
            orientation: Orientation::CoCurrent,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = [
            ("alpha_f", self.alpha_f),
            ("alpha_p", self.alpha_p),
            ("gamma_f", self.gamma_f),
            ("gamma_p", self.gamma_p),
        ];
        for (name, v) in pos {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParams(format!(
                    "{name} must be strictly positive, got {v}"
                )));
            }
        }
        for (name, v) in [("beta_f", self.beta_f), ("beta_p", self.beta_p)] {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be finite")));
            }
        }
        if self.beta_f < 0.0 {
            return Err(Error::InvalidParams(
                "beta_f must be nonnegative".to_string(),
            ));
        }
        Ok(())
    }

    /// Advection coefficients `(b_f, b_p)` in the evolution form
    /// `dw/dt = alpha*Lap(w) - b*dw/dy`. The feed always advects with
    /// `+beta_f`; the permeate advects with `+beta_p` (co-current) or
    /// `-beta_p` (counter-current).
    pub fn effective_advection(&self) -> [f64; 2] {
        let bp = match self.orientation {
            Orientation::CoCurrent => self.beta_p,
            Orientation::CounterCurrent => -self.beta_p,
        };
        [self.beta_f, bp]
    }

    /// Scale both advection coefficients; used by the operator-verification
    /// checks on `A0 + t*B0`.
    pub fn with_advection_scaled(&self, t: f64) -> Self {
        PhysicalParams {
            beta_f: self.beta_f * t,
            beta_p: self.beta_p * t,
            ..*self
        }
    }
}

/// The state `w = (f, p)` sampled on grid nodes, flat `j*nx + i` layout.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPair {
    pub f: Vec<f64>,
    pub p: Vec<f64>,
}

impl FieldPair {
    pub fn zeros(grid: &Grid) -> Self {
        FieldPair {
            f: vec![0.0; grid.n_nodes()],
            p: vec![0.0; grid.n_nodes()],
        }
    }

    /// Sample `(f, p) = init(x, y)` at every node.
    pub fn from_fn(grid: &Grid, init: impl Fn(f64, f64) -> (f64, f64)) -> Self {
        let mut w = FieldPair::zeros(grid);
        for j in 0..grid.ny() {
            for i in 0..grid.nx() {
                let (x, y) = grid.coords(i, j);
                let (vf, vp) = init(x, y);
                let k = grid.node(i, j);
                w.f[k] = vf;
                w.p[k] = vp;
            }
        }
        w
    }

    pub fn constant(grid: &Grid, cf: f64, cp: f64) -> Self {
        FieldPair {
            f: vec![cf; grid.n_nodes()],
            p: vec![cp; grid.n_nodes()],
        }
    }

    pub fn matches(&self, grid: &Grid) -> bool {
        self.f.len() == grid.n_nodes() && self.p.len() == grid.n_nodes()
    }

    pub fn check_grid(&self, grid: &Grid) -> Result<()> {
        if self.matches(grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn is_finite(&self) -> bool {
        self.f.iter().chain(self.p.iter()).all(|v| v.is_finite())
    }

    /// Interleave into the solver layout: unknown `2*(j*nx + i) + c` with
    /// component `c = 0` for `f` and `c = 1` for `p`.
    pub fn pack(&self) -> Vec<f64> {
        let n = self.f.len();
        let mut out = vec![0.0; 2 * n];
        for k in 0..n {
            out[2 * k] = self.f[k];
            out[2 * k + 1] = self.p[k];
        }
        out
    }

    pub fn unpack(packed: &[f64]) -> Self {
        let n = packed.len() / 2;
        let mut f = vec![0.0; n];
        let mut p = vec![0.0; n];
        for k in 0..n {
            f[k] = packed[2 * k];
            p[k] = packed[2 * k + 1];
        }
        FieldPair { f, p }
    }

    /// Componentwise `self - other`.
    pub fn sub(&self, other: &FieldPair) -> FieldPair {
        FieldPair {
            f: self.f.iter().zip(&other.f).map(|(a, b)| a - b).collect(),
            p: self.p.iter().zip(&other.p).map(|(a, b)| a - b).collect(),
        }
    }
}

/// A deterministic, two-component boundary data function `(t, s) -> (f, p)`
/// where `s` is the arclength coordinate along the segment.
#[derive(Clone)]
pub struct BoundarySignal {
    segment: SegmentTag,
    eval: Arc<dyn Fn(f64, f64) -> (f64, f64) + Send + Sync>,
}

impl BoundarySignal {
    pub fn new(
        segment: SegmentTag,
        eval: impl Fn(f64, f64) -> (f64, f64) + Send + Sync + 'static,
    ) -> Self {
        BoundarySignal {
            segment,
            eval: Arc::new(eval),
        }
    }

    pub fn zero(segment: SegmentTag) -> Self {
        BoundarySignal::new(segment, |_, _| (0.0, 0.0))
    }

    pub fn constant(segment: SegmentTag, vf: f64, vp: f64) -> Self {
        BoundarySignal::new(segment, move |_, _| (vf, vp))
    }

    pub fn segment(&self) -> SegmentTag {
        self.segment
    }

    #[inline]
    pub fn eval(&self, t: f64, s: f64) -> (f64, f64) {
        (self.eval)(t, s)
    }

    /// Sample both components at every node of `seg` at time `t`.
    pub fn sample(&self, seg: &BoundarySegment, t: f64) -> (Vec<f64>, Vec<f64>) {
        let n = seg.n_nodes();
        let mut vf = vec![0.0; n];
        let mut vp = vec![0.0; n];
        for k in 0..n {
            let (a, b) = self.eval(t, seg.arclength(k));
            vf[k] = a;
            vp[k] = b;
        }
        (vf, vp)
    }
}

impl std::fmt::Debug for BoundarySignal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BoundarySignal")
            .field("segment", &self.segment)
            .finish_non_exhaustive()
    }
}

/// The weighted `L^2` pairing
/// `alpha_p*gamma_p * int(a.f * b.f) + alpha_f*gamma_f * int(a.p * b.p)`
/// evaluated with trapezoidal quadrature.
pub fn weighted_inner_product(
    a: &FieldPair,
    b: &FieldPair,
    grid: &Grid,
    params: &PhysicalParams,
) -> Result<f64> {
    a.check_grid(grid)?;
    b.check_grid(grid)?;
    let ff = grid.integrate_product(&a.f, &b.f)?;
    let pp = grid.integrate_product(&a.p, &b.p)?;
    Ok(params.alpha_p * params.gamma_p * ff + params.alpha_f * params.gamma_f * pp)
}

/// Norm induced by [`weighted_inner_product`].
pub fn weighted_norm(a: &FieldPair, grid: &Grid, params: &PhysicalParams) -> Result<f64> {
    Ok(weighted_inner_product(a, a, grid, params)?.max(0.0).sqrt())
}

/// Nodal restriction of `(f, p)` to a boundary segment, in segment order.
pub fn trace(w: &FieldPair, seg: &BoundarySegment) -> Result<(Vec<f64>, Vec<f64>)> {
    w.check_grid(seg.grid())?;
    let idx = seg.node_indices();
    Ok((
        idx.iter().map(|&k| w.f[k]).collect(),
        idx.iter().map(|&k| w.p[k]).collect(),
    ))
}

/// One-sided second-order approximation of the outward normal derivative of
/// both components on a segment: `(3*w0 - 4*w1 + w2) / (2h)` with `w0` on the
/// boundary and `w1`, `w2` the next two nodes inward.
pub fn normal_derivative(w: &FieldPair, seg: &BoundarySegment) -> Result<(Vec<f64>, Vec<f64>)> {
    w.check_grid(seg.grid())?;
    let grid = seg.grid();
    let n = seg.n_nodes();
    let h = match seg.tag() {
        SegmentTag::Gamma1 | SegmentTag::Gamma3 => grid.hy(),
        SegmentTag::Gamma2 | SegmentTag::Gamma4 => grid.hx(),
    };
    let mut df = vec![0.0; n];
    let mut dp = vec![0.0; n];
    for k in 0..n {
        let (i, j) = seg.node_ij(k);
        // the two nodes stepping inward from the boundary node
        let (k1, k2) = match seg.tag() {
            SegmentTag::Gamma1 => (grid.node(i, 1), grid.node(i, 2)),
            SegmentTag::Gamma3 => (grid.node(i, grid.ny() - 2), grid.node(i, grid.ny() - 3)),
            SegmentTag::Gamma2 => (grid.node(1, j), grid.node(2, j)),
            SegmentTag::Gamma4 => (grid.node(grid.nx() - 2, j), grid.node(grid.nx() - 3, j)),
        };
        let k0 = grid.node(i, j);
        df[k] = (3.0 * w.f[k0] - 4.0 * w.f[k1] + w.f[k2]) / (2.0 * h);
        dp[k] = (3.0 * w.p[k0] - 4.0 * w.p[k1] + w.p[k2]) / (2.0 * h);
    }
    Ok((df, dp))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::new(11, 11, 2.0).unwrap()
    }

    #[test]
    fn weighted_inner_product_reference_constants() {
        let g = Grid::new(5, 5, 2.0).unwrap();
        let params = PhysicalParams::reference();
        let a = FieldPair::constant(&g, 1.0, 1.0);
        // 3.5*0.1*2 + 3*0.2*2 = 1.9
        let v = weighted_inner_product(&a, &a, &g, &params).unwrap();
        assert!((v - 1.9).abs() < 1e-14, "{v}");
    }

    #[test]
    fn weighted_inner_product_zero() {
        let g = grid();
        let params = PhysicalParams::reference();
        let a = FieldPair::zeros(&g);
        let b = FieldPair::from_fn(&g, |x, y| (x * y, x - y));
        assert_eq!(weighted_inner_product(&a, &b, &g, &params).unwrap(), 0.0);
    }

    #[test]
    fn weighted_inner_product_matches_summation_oracle() {
        let g = grid();
        let params = PhysicalParams::reference();
        let a = FieldPair::from_fn(&g, |x, y| ((3.0 * x + y).sin(), (x * y).cos()));
        let b = FieldPair::from_fn(&g, |x, y| (x * x - y, (2.0 * y).exp() * 0.1));
        // independent term-by-term oracle
        let mut oracle = 0.0;
        for j in 0..g.ny() {
            for i in 0..g.nx() {
                let k = g.node(i, j);
                let w = g.domain_weight(i, j);
                oracle += params.alpha_p * params.gamma_p * w * a.f[k] * b.f[k];
                oracle += params.alpha_f * params.gamma_f * w * a.p[k] * b.p[k];
            }
        }
        let v = weighted_inner_product(&a, &b, &g, &params).unwrap();
        assert!((v - oracle).abs() < 1e-12 * oracle.abs().max(1.0));
    }

    #[test]
    fn trace_examples() {
        let g = grid();
        let w = FieldPair::constant(&g, 2.5, -1.0);
        let (tf, tp) = trace(&w, &g.segment(SegmentTag::Gamma3)).unwrap();
        assert!(tf.iter().all(|&v| v == 2.5));
        assert!(tp.iter().all(|&v| v == -1.0));

        // f(x,y) = y vanishes on Gamma1
        let w = FieldPair::from_fn(&g, |_, y| (y, 0.0));
        let (tf, _) = trace(&w, &g.segment(SegmentTag::Gamma1)).unwrap();
        assert!(tf.iter().all(|&v| v == 0.0));

        // f(x,y) = x^2 is identically one on Gamma4
        let w = FieldPair::from_fn(&g, |x, _| (x * x, 0.0));
        let (tf, _) = trace(&w, &g.segment(SegmentTag::Gamma4)).unwrap();
        assert!(tf.iter().all(|&v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn normal_derivative_exact_for_linear_fields() {
        let g = grid();
        let w = FieldPair::from_fn(&g, |_, y| (y, 2.0 * y));
        let (df, dp) = normal_derivative(&w, &g.segment(SegmentTag::Gamma1)).unwrap();
        assert!(df.iter().all(|&v| (v + 1.0).abs() < 1e-13));
        assert!(dp.iter().all(|&v| (v + 2.0).abs() < 1e-13));

        let (df, _) = normal_derivative(&w, &g.segment(SegmentTag::Gamma3)).unwrap();
        assert!(df.iter().all(|&v| (v - 1.0).abs() < 1e-13));

        let w = FieldPair::from_fn(&g, |x, _| (3.0 * x, 0.0));
        let (df, _) = normal_derivative(&w, &g.segment(SegmentTag::Gamma2)).unwrap();
        assert!(df.iter().all(|&v| (v + 3.0).abs() < 1e-13));
        let (df, _) = normal_derivative(&w, &g.segment(SegmentTag::Gamma4)).unwrap();
        assert!(df.iter().all(|&v| (v - 3.0).abs() < 1e-13));
    }

    #[test]
    fn normal_derivative_second_order_on_quadratic_tail() {
        // f = y^2 on Gamma3 of (0,1)x(0,2): d/dnu = 2L = 4, exact for the
        // 3-point stencil; a quartic shows the O(h^2) decay instead.
        let g = grid();
        let w = FieldPair::from_fn(&g, |_, y| (y * y, 0.0));
        let (df, _) = normal_derivative(&w, &g.segment(SegmentTag::Gamma3)).unwrap();
        assert!(df.iter().all(|&v| (v - 4.0).abs() < 1e-12));

        let mut errs = Vec::new();
        for &n in &[11usize, 21, 41] {
            let g = Grid::new(3, n, 2.0).unwrap();
            let w = FieldPair::from_fn(&g, |_, y| (y * y * y * y, 0.0));
            let (df, _) = normal_derivative(&w, &g.segment(SegmentTag::Gamma3)).unwrap();
            let exact = 4.0 * 8.0; // d/dy y^4 at y=2
            errs.push((df[0] - exact).abs());
        }
        let order1 = (errs[0] / errs[1]).log2();
        let order2 = (errs[1] / errs[2]).log2();
        assert!(order1 > 1.9, "order {order1}");
        assert!(order2 > 1.9, "order {order2}");
    }

    #[test]
    fn pack_unpack_roundtrip() {
        let g = Grid::new(4, 3, 1.0).unwrap();
        let w = FieldPair::from_fn(&g, |x, y| (x + 10.0 * y, x * y - 1.0));
        let packed = w.pack();
        assert_eq!(packed.len(), 2 * g.n_nodes());
        assert_eq!(FieldPair::unpack(&packed), w);
    }

    #[test]
    fn params_validation() {
        let mut p = PhysicalParams::reference();
        assert!(p.validate().is_ok());
        p.gamma_f = 0.0;
        assert!(p.validate().is_err());
        let mut p = PhysicalParams::reference();
        p.alpha_p = -1.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn effective_advection_signs() {
        let mut p = PhysicalParams::reference();
        p.beta_f = 0.6;
        p.beta_p = 0.7;
        p.orientation = Orientation::CoCurrent;
        assert_eq!(p.effective_advection(), [0.6, 0.7]);
        p.orientation = Orientation::CounterCurrent;
        assert_eq!(p.effective_advection(), [0.6, -0.7]);
    }
}
