//! Uniform-grid fields, finite-difference operators and sphere-valued maps.

mod grid;
pub mod io;
pub mod ops;
mod value;

pub use grid::GridSpec;
pub use ops::{
    dz_dzbar, gradient, gradient_periodic, hessian_norm, laplacian, laplacian_periodic,
    masked_gradient, project_to_sphere, tension_field, tension_field_periodic, Tension,
};
pub use value::{ComplexValue, Kind, Value};

use crate::{Error, Result, Vec3};

/// Values sampled at the cell centres of a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    pub spec: GridSpec,
    pub values: Vec<T>,
}

impl<T: Value> Field<T> {
    pub fn new(spec: GridSpec, values: Vec<T>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::Grid(format!(
                "value count {} does not match {}x{}",
                values.len(),
                spec.nx,
                spec.ny
            )));
        }
        Ok(Self { spec, values })
    }

    pub fn constant(spec: GridSpec, v: T) -> Self {
        Self { spec, values: vec![v; spec.len()] }
    }

    pub fn zeros(spec: GridSpec) -> Self {
        Self::constant(spec, T::zero())
    }

    /// Samples `f(x, y)` at every cell centre.
    pub fn from_fn<F>(spec: GridSpec, f: F) -> Self
    where
        F: Fn(f64, f64) -> T + Sync + Send,
    {
        let values = crate::par::map_range(spec.ny, |j| {
            let y = spec.y(j);
            (0..spec.nx).map(|i| f(spec.x(i), y)).collect::<Vec<_>>()
        })
        .concat();
        Self { spec, values }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> T {
        self.values[j * self.spec.nx + i]
    }

    pub fn map<U: Value, F: Fn(T) -> U + Sync + Send>(&self, f: F) -> Field<U> {
        Field { spec: self.spec, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map<U: Value, V: Value, F>(&self, other: &Field<U>, f: F) -> Field<V>
    where
        F: Fn(T, U) -> V,
    {
        debug_assert_eq!(self.values.len(), other.values.len());
        Field {
            spec: self.spec,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    /// Pointwise modulus `|f|`.
    pub fn modulus(&self) -> Field<f64> {
        self.map(|v| v.norm())
    }

    /// First non-finite node, if any.
    pub fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            None => Ok(()),
            Some(k) => Err(Error::NonFinite { i: k % self.spec.nx, j: k / self.spec.nx }),
        }
    }

    pub fn max_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// `∫|f|^p` over cells where `mask` holds (all cells when `None`).
    pub fn integral_pow(&self, p: f64, mask: Option<&[bool]>) -> f64 {
        let nx = self.spec.nx;
        let rows = crate::par::map_range(self.spec.ny, |j| {
            let mut s = 0.0;
            for i in 0..nx {
                let k = j * nx + i;
                if mask.map_or(true, |m| m[k]) {
                    s += self.values[k].norm().powf(p);
                }
            }
            s
        });
        rows.into_iter().sum::<f64>() * self.spec.cell_area()
    }

    /// Bilinear interpolation at a physical point inside the sample hull.
    pub fn bilinear(&self, p: [f64; 2]) -> Option<T> {
        let q = self.spec.to_index(p);
        let (nx, ny) = (self.spec.nx, self.spec.ny);
        if !(q[0] >= 0.0 && q[1] >= 0.0 && q[0] <= (nx - 1) as f64 && q[1] <= (ny - 1) as f64) {
            return None;
        }
        let i0 = (q[0].floor() as usize).min(nx - 2);
        let j0 = (q[1].floor() as usize).min(ny - 2);
        let tx = q[0] - i0 as f64;
        let ty = q[1] - j0 as f64;
        let a = self.at(i0, j0).scale((1.0 - tx) * (1.0 - ty));
        let b = self.at(i0 + 1, j0).scale(tx * (1.0 - ty));
        let c = self.at(i0, j0 + 1).scale((1.0 - tx) * ty);
        let d = self.at(i0 + 1, j0 + 1).scale(tx * ty);
        Some(a + b + c + d)
    }

    /// Copies the cells `[i0, i0+nx) × [j0, j0+ny)` into a new field.
    pub fn crop(&self, i0: usize, j0: usize, nx: usize, ny: usize) -> Result<Self> {
        if i0 + nx > self.spec.nx || j0 + ny > self.spec.ny {
            return Err(Error::Grid("crop window exceeds the grid".into()));
        }
        let spec = self.spec.window(i0, j0, nx, ny)?;
        let mut values = Vec::with_capacity(nx * ny);
        for j in j0..j0 + ny {
            let row = j * self.spec.nx;
            values.extend_from_slice(&self.values[row + i0..row + i0 + nx]);
        }
        Ok(Self { spec, values })
    }
}

/// Sphere-valued map `u: grid → 𝕊²`.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldMap {
    field: Field<Vec3>,
}

/// Tolerance on `||u| − 1|` for the unit-norm invariant.
pub const UNIT_TOL: f64 = 1e-10;

impl ManifoldMap {
    /// Validates finiteness and the unit-norm invariant.
    pub fn new(field: Field<Vec3>) -> Result<Self> {
        field.check_finite()?;
        let dev = field.values.iter().fold(0.0f64, |m, v| m.max((v.norm() - 1.0).abs()));
        if dev > UNIT_TOL {
            return Err(Error::NotUnit(dev));
        }
        Ok(Self { field })
    }

    pub fn constant(spec: GridSpec, v: Vec3) -> Result<Self> {
        Self::new(Field::constant(spec, v.normalize()))
    }

    /// Samples `f` and renormalises each value (for generators whose output is
    /// unit up to rounding).
    pub fn from_fn<F>(spec: GridSpec, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Vec3 + Sync + Send,
    {
        project_to_sphere(&Field::from_fn(spec, f))
    }

    pub fn field(&self) -> &Field<Vec3> {
        &self.field
    }

    pub fn into_field(self) -> Field<Vec3> {
        self.field
    }

    pub fn spec(&self) -> &GridSpec {
        &self.field.spec
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Vec3 {
        self.field.at(i, j)
    }

    pub fn crop(&self, i0: usize, j0: usize, nx: usize, ny: usize) -> Result<Self> {
        Ok(Self { field: self.field.crop(i0, j0, nx, ny)? })
    }

    /// Energy density `|∇u|²` (one-sided stencils at the boundary).
    pub fn energy_density(&self) -> Field<f64> {
        let (ux, uy) = gradient(&self.field);
        ux.zip_map(&uy, |a, b| a.norm_squared() + b.norm_squared())
    }

    /// Dirichlet energy `∫|∇u|²` over the masked cells.
    pub fn energy(&self, mask: Option<&[bool]>) -> f64 {
        self.energy_density().integral_pow(1.0, mask)
    }

    /// Bilinear sample renormalised onto the sphere.
    pub fn sample(&self, p: [f64; 2]) -> Option<Vec3> {
        self.field.bilinear(p).map(|v| {
            let n = v.norm();
            if n > 0.0 {
                v / n
            } else {
                v
            }
        })
    }
}
