//! Uniform radial meshes and parity-tagged fields.

mod quadrature;
mod stencil;

pub use quadrature::{
    integrate_radial, lq_norm, quadrature_1d, simpson, sobolev_norm, GAUSS_LEGENDRE_5,
};
pub use stencil::{d_r, derivative_from_extended, fornberg_weights, laplacian, Derivatives};

use crate::error::{Error, Result};

/// Behaviour of a radial profile under `r -> -r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn flip(self) -> Self {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

/// Uniform mesh `r_i = i * dr`, `i = 0..=n_cells`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialGrid {
    n_cells: usize,
    dr: f64,
    dim: usize,
    ghost: usize,
}

impl RadialGrid {
    pub const DEFAULT_GHOST: usize = 3;

    pub fn new(n_cells: usize, r_max: f64, dim: usize) -> Result<Self> {
        Self::with_ghost(n_cells, r_max, dim, Self::DEFAULT_GHOST)
    }

    pub fn with_ghost(n_cells: usize, r_max: f64, dim: usize, ghost: usize) -> Result<Self> {
        if dim != 2 && dim != 4 {
            return Err(Error::param("dim", format!("must be 2 or 4, got {dim}")));
        }
        if n_cells == 0 {
            return Err(Error::param("n_cells", "must be positive"));
        }
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(Error::param("r_max", format!("must be positive, got {r_max}")));
        }
        if ghost < 2 {
            return Err(Error::param("ghost", format!("at least 2 required, got {ghost}")));
        }
        Ok(Self {
            n_cells,
            dr: r_max / n_cells as f64,
            dim,
            ghost,
        })
    }

    /// Same nodes, different dimension tag.
    pub fn with_dim(self, dim: usize) -> Result<Self> {
        Self::with_ghost(self.n_cells, self.r_max(), dim, self.ghost)
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn n_nodes(&self) -> usize {
        self.n_cells + 1
    }

    pub fn dr(&self) -> f64 {
        self.dr
    }

    pub fn r_max(&self) -> f64 {
        self.dr * self.n_cells as f64
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ghost(&self) -> usize {
        self.ghost
    }

    pub fn r(&self, i: usize) -> f64 {
        i as f64 * self.dr
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n_nodes()).map(move |i| self.r(i))
    }

    /// True when both grids share the same nodes (dimension tags may differ).
    pub fn same_nodes(&self, other: &RadialGrid) -> bool {
        self.n_cells == other.n_cells && self.dr == other.dr
    }
}

/// Nodal values of a radial profile with a parity tag.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    grid: RadialGrid,
    values: Vec<f64>,
    parity: Parity,
}

impl RadialField {
    /// Wrap nodal values. Odd fields get `f(0) = 0` exactly.
    pub fn new(grid: RadialGrid, mut values: Vec<f64>, parity: Parity) -> Result<Self> {
        if values.len() != grid.n_nodes() {
            return Err(Error::param(
                "values",
                format!("expected {} nodes, got {}", grid.n_nodes(), values.len()),
            ));
        }
        if parity == Parity::Odd {
            values[0] = 0.0;
        }
        Ok(Self {
            grid,
            values,
            parity,
        })
    }

    pub fn zeros(grid: RadialGrid, parity: Parity) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.n_nodes()],
            parity,
        }
    }

    pub fn from_fn(grid: RadialGrid, parity: Parity, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().map(f).collect();
        Self::new(grid, values, parity).expect("length matches grid")
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Same field, reinterpreted on a grid with a different dimension tag.
    pub fn with_dim(mut self, dim: usize) -> Result<Self> {
        self.grid = self.grid.with_dim(dim)?;
        Ok(self)
    }

    /// Values with `grid.ghost()` mirrored nodes prepended.
    pub fn extended(&self) -> Vec<f64> {
        let g = self.grid.ghost;
        let mut ext = Vec::with_capacity(self.values.len() + g);
        fill_extended(&self.values, g, self.parity, &mut ext);
        ext
    }

    /// Pointwise map keeping grid and parity.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> RadialField {
        RadialField {
            grid: self.grid,
            values: self.values.iter().map(|&x| f(x)).collect(),
            parity: self.parity,
        }
    }

    pub fn scaled(&self, k: f64) -> RadialField {
        self.map(|x| k * x)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Append `ghost` mirrored values followed by `values` to `out`.
pub(crate) fn fill_extended(values: &[f64], ghost: usize, parity: Parity, out: &mut Vec<f64>) {
    out.clear();
    let sign = parity.sign();
    for k in (1..=ghost).rev() {
        out.push(sign * values[k]);
    }
    out.extend_from_slice(values);
}

/// A field and its time derivative at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub f: RadialField,
    pub f_t: RadialField,
    pub time: f64,
}

impl FieldState {
    pub fn new(f: RadialField, f_t: RadialField, time: f64) -> Result<Self> {
        if f.grid != f_t.grid {
            return Err(Error::GridMismatch);
        }
        if f.parity != f_t.parity {
            return Err(Error::ParityMismatch);
        }
        Ok(Self { f, f_t, time })
    }

    pub fn grid(&self) -> &RadialGrid {
        self.f.grid()
    }

    pub fn parity(&self) -> Parity {
        self.f.parity()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_span_extent() {
        let g = RadialGrid::new(64, 8.0, 4).unwrap();
        assert_eq!(g.n_nodes(), 65);
        assert_eq!(g.r(0), 0.0);
        assert!((g.r(64) - 8.0).abs() < 1e-15);
        assert_eq!(g.dr() * g.n_cells() as f64, g.r_max());
        assert!(RadialGrid::new(64, 8.0, 3).is_err());
        assert!(RadialGrid::with_ghost(64, 8.0, 4, 1).is_err());
    }

    #[test]
    fn odd_fields_vanish_at_origin() {
        let g = RadialGrid::new(16, 1.0, 4).unwrap();
        let f = RadialField::new(g, vec![1.0; 17], Parity::Odd).unwrap();
        assert_eq!(f.values()[0], 0.0);
        let e = RadialField::new(g, vec![1.0; 17], Parity::Even).unwrap();
        assert_eq!(e.values()[0], 1.0);
    }

    #[test]
    fn ghost_fill_follows_parity() {
        let g = RadialGrid::with_ghost(8, 1.0, 4, 3).unwrap();
        let f = RadialField::from_fn(g, Parity::Odd, |r| r + r * r * r);
        let ext = f.extended();
        assert_eq!(ext.len(), 12);
        for k in 1..=3 {
            assert_eq!(ext[3 - k], -f.values()[k]);
        }
        let e = RadialField::from_fn(g, Parity::Even, |r| 1.0 + r * r);
        let ext = e.extended();
        for k in 1..=3 {
            assert_eq!(ext[3 - k], e.values()[k]);
        }
        assert_eq!(&ext[3..], e.values());
    }

    #[test]
    fn state_requires_matching_fields() {
        let g = RadialGrid::new(8, 1.0, 4).unwrap();
        let h = RadialGrid::new(16, 1.0, 4).unwrap();
        let a = RadialField::zeros(g, Parity::Even);
        assert_eq!(
            FieldState::new(a.clone(), RadialField::zeros(h, Parity::Even), 0.0),
            Err(Error::GridMismatch)
        );
        assert_eq!(
            FieldState::new(a.clone(), RadialField::zeros(g, Parity::Odd), 0.0),
            Err(Error::ParityMismatch)
        );
        assert!(FieldState::new(a.clone(), a, 0.0).is_ok());
    }
}
