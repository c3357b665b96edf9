//! Geometry of the rectangle `Omega = (0,1) x (0,L)`: node indexing, boundary
//! segments, and trapezoidal quadrature for domain and boundary integrals.

use crate::error::{Error, Result};

/// The four edges of the rectangle.
///
/// `Gamma1` is the bottom (`y = 0`), `Gamma2` the left (`x = 0`), `Gamma3` the
/// top (`y = L`) and `Gamma4` the right (`x = 1`, the membrane edge).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SegmentTag {
    Gamma1,
    Gamma2,
    Gamma3,
    Gamma4,
}

impl SegmentTag {
    pub const ALL: [SegmentTag; 4] = [
        SegmentTag::Gamma1,
        SegmentTag::Gamma2,
        SegmentTag::Gamma3,
        SegmentTag::Gamma4,
    ];

    /// Outward unit normal of the segment.
    pub fn normal(self) -> (f64, f64) {
        match self {
            SegmentTag::Gamma1 => (0.0, -1.0),
            SegmentTag::Gamma2 => (-1.0, 0.0),
            SegmentTag::Gamma3 => (0.0, 1.0),
            SegmentTag::Gamma4 => (1.0, 0.0),
        }
    }

    /// True for the vertical edges `x = 0` and `x = 1`.
    pub fn is_vertical(self) -> bool {
        matches!(self, SegmentTag::Gamma2 | SegmentTag::Gamma4)
    }
}

impl std::fmt::Display for SegmentTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            SegmentTag::Gamma1 => "Gamma1",
            SegmentTag::Gamma2 => "Gamma2",
            SegmentTag::Gamma3 => "Gamma3",
            SegmentTag::Gamma4 => "Gamma4",
        };
        f.write_str(name)
    }
}

/// Uniform rectangular grid on `(0,1) x (0,L)`.
///
/// Node `(i, j)` sits at `(i*hx, j*hy)` with `0 <= i < nx`, `0 <= j < ny`;
/// the flat index is `j*nx + i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    nx: usize,
    ny: usize,
    length_l: f64,
    hx: f64,
    hy: f64,
}

impl Grid {
    /// Build a grid with `nx` nodes across and `ny` nodes up the domain of
    /// height `length_l`. Needs at least 3 nodes per direction so that the
    /// interior stencils and one-sided boundary stencils are defined.
    pub fn new(nx: usize, ny: usize, length_l: f64) -> Result<Self> {
        if nx < 3 || ny < 3 {
            return Err(Error::GridTooSmall { nx, ny });
        }
        if !(length_l > 0.0) || !length_l.is_finite() {
            return Err(Error::NonPositiveLength(length_l));
        }
        Ok(Grid {
            nx,
            ny,
            length_l,
            hx: 1.0 / (nx - 1) as f64,
            hy: length_l / (ny - 1) as f64,
        })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn length_l(&self) -> f64 {
        self.length_l
    }

    pub fn hx(&self) -> f64 {
        self.hx
    }

    pub fn hy(&self) -> f64 {
        self.hy
    }

    /// Total number of nodes.
    pub fn n_nodes(&self) -> usize {
        self.nx * self.ny
    }

    /// Flat index of node `(i, j)`.
    #[inline]
    pub fn node(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx && j < self.ny);
        j * self.nx + i
    }

    /// Physical coordinates of node `(i, j)`.
    #[inline]
    pub fn coords(&self, i: usize, j: usize) -> (f64, f64) {
        (i as f64 * self.hx, j as f64 * self.hy)
    }

    /// Trapezoidal quadrature weight of node `(i, j)` for domain integrals.
    #[inline]
    pub fn domain_weight(&self, i: usize, j: usize) -> f64 {
        let wx = if i == 0 || i == self.nx - 1 { 0.5 } else { 1.0 };
        let wy = if j == 0 || j == self.ny - 1 { 0.5 } else { 1.0 };
        wx * wy * self.hx * self.hy
    }

    /// The boundary segment with the given tag.
    pub fn segment(&self, tag: SegmentTag) -> BoundarySegment {
        BoundarySegment { grid: *self, tag }
    }

    /// Segments the boundary node `(i, j)` geometrically lies on: one for an
    /// edge node, two for a corner, none for an interior node.
    pub fn segments_at(&self, i: usize, j: usize) -> Vec<SegmentTag> {
        let mut out = Vec::with_capacity(2);
        if j == 0 {
            out.push(SegmentTag::Gamma1);
        }
        if i == 0 {
            out.push(SegmentTag::Gamma2);
        }
        if j == self.ny - 1 {
            out.push(SegmentTag::Gamma3);
        }
        if i == self.nx - 1 {
            out.push(SegmentTag::Gamma4);
        }
        out
    }

    /// Unique owner of a boundary node once corner precedence is applied.
    ///
    /// `carries_pointwise_data` flags the segments whose condition pins the
    /// nodal value (Dirichlet). Such a segment wins a shared corner; if both
    /// incident segments pin the value the lower-numbered one wins; otherwise
    /// the vertical segment (`Gamma2` or `Gamma4`) wins over the horizontal.
    /// Returns `None` for interior nodes.
    pub fn owner_at(
        &self,
        i: usize,
        j: usize,
        carries_pointwise_data: impl Fn(SegmentTag) -> bool,
    ) -> Option<SegmentTag> {
        let segs = self.segments_at(i, j);
        match segs.as_slice() {
            [] => None,
            [only] => Some(*only),
            [a, b] => {
                let (da, db) = (carries_pointwise_data(*a), carries_pointwise_data(*b));
                Some(match (da, db) {
                    (true, false) => *a,
                    (false, true) => *b,
                    (true, true) => *a, // segments_at lists tags in ascending order
                    (false, false) => {
                        if a.is_vertical() {
                            *a
                        } else {
                            *b
                        }
                    }
                })
            }
            _ => unreachable!("a node lies on at most two segments"),
        }
    }

    /// `sqrt` of the trapezoidal quadrature of `field^2` over the domain.
    pub fn l2_norm_domain(&self, field: &[f64]) -> Result<f64> {
        if field.len() != self.n_nodes() {
            return Err(Error::SizeMismatch {
                what: "domain field",
                expected: self.n_nodes(),
                got: field.len(),
            });
        }
        let mut acc = 0.0;
        for j in 0..self.ny {
            for i in 0..self.nx {
                let v = field[self.node(i, j)];
                acc += self.domain_weight(i, j) * v * v;
            }
        }
        Ok(acc.sqrt())
    }

    /// Trapezoidal quadrature of `a*b` over the domain.
    pub fn integrate_product(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        if a.len() != self.n_nodes() || b.len() != self.n_nodes() {
            return Err(Error::SizeMismatch {
                what: "domain field",
                expected: self.n_nodes(),
                got: a.len().min(b.len()),
            });
        }
        let mut acc = 0.0;
        for j in 0..self.ny {
            for i in 0..self.nx {
                let k = self.node(i, j);
                acc += self.domain_weight(i, j) * a[k] * b[k];
            }
        }
        Ok(acc)
    }
}

/// One edge of the grid: an ordered node list with an outward normal.
#[derive(Debug, Clone, Copy)]
pub struct BoundarySegment {
    grid: Grid,
    tag: SegmentTag,
}

impl BoundarySegment {
    pub fn tag(&self) -> SegmentTag {
        self.tag
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Outward unit normal.
    pub fn normal(&self) -> (f64, f64) {
        self.tag.normal()
    }

    /// Number of nodes along the segment (corners included).
    pub fn n_nodes(&self) -> usize {
        if self.tag.is_vertical() {
            self.grid.ny
        } else {
            self.grid.nx
        }
    }

    /// Physical length of the segment.
    pub fn length(&self) -> f64 {
        if self.tag.is_vertical() {
            self.grid.length_l
        } else {
            1.0
        }
    }

    /// Node spacing along the segment.
    pub fn spacing(&self) -> f64 {
        if self.tag.is_vertical() {
            self.grid.hy
        } else {
            self.grid.hx
        }
    }

    /// Grid coordinates of the `k`-th node along the segment.
    #[inline]
    pub fn node_ij(&self, k: usize) -> (usize, usize) {
        match self.tag {
            SegmentTag::Gamma1 => (k, 0),
            SegmentTag::Gamma2 => (0, k),
            SegmentTag::Gamma3 => (k, self.grid.ny - 1),
            SegmentTag::Gamma4 => (self.grid.nx - 1, k),
        }
    }

    /// Flat node indices in segment order.
    pub fn node_indices(&self) -> Vec<usize> {
        (0..self.n_nodes())
            .map(|k| {
                let (i, j) = self.node_ij(k);
                self.grid.node(i, j)
            })
            .collect()
    }

    /// Arclength coordinate of the `k`-th node (`x` on horizontal segments,
    /// `y` on vertical ones).
    #[inline]
    pub fn arclength(&self, k: usize) -> f64 {
        k as f64 * self.spacing()
    }

    /// Trapezoidal quadrature weight of the `k`-th node.
    #[inline]
    pub fn weight(&self, k: usize) -> f64 {
        let w = if k == 0 || k == self.n_nodes() - 1 {
            0.5
        } else {
            1.0
        };
        w * self.spacing()
    }

    /// `sqrt` of the 1D trapezoidal quadrature of `trace^2` along the segment.
    pub fn l2_norm(&self, trace: &[f64]) -> Result<f64> {
        if trace.len() != self.n_nodes() {
            return Err(Error::SizeMismatch {
                what: "boundary trace",
                expected: self.n_nodes(),
                got: trace.len(),
            });
        }
        let mut acc = 0.0;
        for (k, v) in trace.iter().enumerate() {
            acc += self.weight(k) * v * v;
        }
        Ok(acc.sqrt())
    }
}
